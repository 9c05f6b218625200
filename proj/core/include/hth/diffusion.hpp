// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rectified-flow objective and deterministic sampler.
//
// Time runs from data (t = 0) to noise (t = 1) along x_t = (1 - t) x0 + t eps,
// and the model predicts the constant velocity eps - x0 of that path.
// Sampling integrates dx/dt = v from t = 1 to t = 0 with uniform Euler steps.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hth/model.hpp"

namespace hth::diffusion {

struct DiffusionConfig {
    std::size_t sample_steps = 20;
    double guidance = 1.0;
    double cond_drop = 0.1;

    void validate() const;
};

/// x_t = (1 - t) x0 + t eps
Tensor noise(const Tensor& x0, const Tensor& eps, double t);
/// Per-sample times; x0 and eps are [B, ...], t has B entries.
Tensor noise_batch(const Tensor& x0, const Tensor& eps, std::span<const double> t);
/// eps - x0
Tensor velocity_target(const Tensor& x0, const Tensor& eps);

/// Mean squared error between the model's velocity and eps - x0.
/// Labels are used as given; see `drop_labels` for the unconditional dropout.
Var loss(const HthModel& model, const ModelWeights<Var>& w, const Tensor& x0, const Tensor& eps,
         std::span<const double> t, std::span<const std::size_t> labels);

/// Replaces each label by `null_label` with probability `p`.
std::vector<std::size_t> drop_labels(std::span<const std::size_t> labels, double p, std::size_t null_label, Rng& rng);

/// v_uncond + s (v_cond - v_uncond)
Tensor guided_velocity(const Tensor& v_cond, const Tensor& v_uncond, double s);

/// (x, t, conditional) -> velocity
using VelocityFn = std::function<Tensor(const Tensor&, double, bool)>;

/// Euler integration from t = 1 to t = 0 with classifier-free guidance.
/// guidance == 1 evaluates only the conditional branch, guidance == 0 only
/// the unconditional one.
Tensor sample(const VelocityFn& velocity, const Tensor& noise_init, std::size_t steps, double guidance);

Tensor sample(const HthModel& model, const Tensor& noise_init, std::span<const std::size_t> labels,
              const DiffusionConfig& cfg);

}  // namespace hth::diffusion
