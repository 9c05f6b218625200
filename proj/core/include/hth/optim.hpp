// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hth/tensor.hpp"

namespace hth {

/// Rounds every entry to the nearest float. Parameters and optimizer state
/// live on the float grid so a float32 checkpoint restores them exactly.
void round_to_float(Tensor& t);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
   public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Moments are created lazily on the first step to match `params`.
    void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

    std::size_t steps_taken() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    std::vector<Tensor>& first_moments() { return m_; }
    std::vector<Tensor>& second_moments() { return v_; }
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }

    /// Restores state saved from another instance.
    void restore(std::size_t steps, std::vector<Tensor> m, std::vector<Tensor> v);

   private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace hth
