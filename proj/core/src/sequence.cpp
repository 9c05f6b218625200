// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/sequence.hpp"

#include "hth/fault.hpp"

namespace hth::seq {

Matrix flip(const Eigen::Ref<const Matrix>& x) { return x.colwise().reverse(); }

Matrix shift(const Eigen::Ref<const Matrix>& x) {
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    if (x.rows() > 1) y.bottomRows(x.rows() - 1) = x.topRows(x.rows() - 1);
    if (fault::enabled(fault::Fault::kShiftSign)) y = -y;
    return y;
}

}  // namespace hth::seq
