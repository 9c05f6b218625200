// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// The two parameter-free sequence operators used to assemble a
// quasiseparable mixer from causal scans: reversal and right shift.

#pragma once

#include "hth/tensor.hpp"

namespace hth::seq {

/// Reverses the order of rows. Involutive.
Matrix flip(const Eigen::Ref<const Matrix>& x);

/// y[0] = 0, y[t] = x[t-1]; the last row of x is dropped.
Matrix shift(const Eigen::Ref<const Matrix>& x);

}  // namespace hth::seq
