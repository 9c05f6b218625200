// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/diffusion.hpp"

#include <stdexcept>
#include <string>

#include "hth/ops.hpp"

namespace hth::diffusion {

void DiffusionConfig::validate() const {
    if (sample_steps < 1) throw std::invalid_argument("sample_steps must be at least 1");
    if (!(cond_drop >= 0.0 && cond_drop <= 1.0)) throw std::invalid_argument("cond_drop must lie in [0, 1]");
}

namespace {

void check_time(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("diffusion time must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace

Tensor noise(const Tensor& x0, const Tensor& eps, double t) {
    check_time(t);
    if (x0.shape() != eps.shape()) throw ShapeError("noise: x0 and eps shapes differ");
    Tensor out(x0.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - t) * x0[i] + t * eps[i];
    return out;
}

Tensor noise_batch(const Tensor& x0, const Tensor& eps, std::span<const double> t) {
    if (x0.shape() != eps.shape()) throw ShapeError("noise: x0 and eps shapes differ");
    if (x0.rank() == 0 || x0.dim(0) != t.size()) throw ShapeError("noise: need one time per sample");
    const std::size_t per = x0.size() / t.size();
    Tensor out(x0.shape());
    for (std::size_t b = 0; b < t.size(); ++b) {
        check_time(t[b]);
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) out[i] = (1.0 - t[b]) * x0[i] + t[b] * eps[i];
    }
    return out;
}

Tensor velocity_target(const Tensor& x0, const Tensor& eps) { return eps - x0; }

Var loss(const HthModel& model, const ModelWeights<Var>& w, const Tensor& x0, const Tensor& eps,
         std::span<const double> t, std::span<const std::size_t> labels) {
    const Tensor xt = noise_batch(x0, eps, t);
    const Var pred = model.forward(w, xt, t, labels);
    const Tensor target = patchify(velocity_target(x0, eps), model.config().patch);
    return ops::mse(pred, Var::constant(target.reshaped(pred.shape())));
}

std::vector<std::size_t> drop_labels(std::span<const std::size_t> labels, double p, std::size_t null_label, Rng& rng) {
    std::vector<std::size_t> out(labels.begin(), labels.end());
    for (auto& l : out) {
        if (rng.uniform() < p) l = null_label;
    }
    return out;
}

Tensor guided_velocity(const Tensor& v_cond, const Tensor& v_uncond, double s) {
    if (v_cond.shape() != v_uncond.shape()) throw ShapeError("guided_velocity: shapes differ");
    // exact reductions; the affine form would round
    if (s == 1.0) return v_cond;
    if (s == 0.0) return v_uncond;
    Tensor out(v_cond.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v_uncond[i] + s * (v_cond[i] - v_uncond[i]);
    return out;
}

Tensor sample(const VelocityFn& velocity, const Tensor& noise_init, std::size_t steps, double guidance) {
    if (steps < 1) throw std::invalid_argument("sample: steps must be at least 1");
    Tensor x = noise_init;
    const double dt = 1.0 / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = 1.0 - static_cast<double>(k) * dt;
        Tensor v;
        if (guidance == 1.0) {
            v = velocity(x, t, true);
        } else if (guidance == 0.0) {
            v = velocity(x, t, false);
        } else {
            v = guided_velocity(velocity(x, t, true), velocity(x, t, false), guidance);
        }
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= dt * v[i];
        x.require_finite("sample");
    }
    return x;
}

Tensor sample(const HthModel& model, const Tensor& noise_init, std::span<const std::size_t> labels,
              const DiffusionConfig& cfg) {
    cfg.validate();
    const std::size_t B = noise_init.dim(0);
    if (labels.size() != B) throw ShapeError("sample: need one label per sample");
    const std::vector<std::size_t> cond(labels.begin(), labels.end());
    const std::vector<std::size_t> uncond(B, model.null_label());
    const VelocityFn fn = [&](const Tensor& x, double t, bool conditional) {
        const std::vector<double> times(B, t);
        return model.denoise(x, times, conditional ? cond : uncond);
    };
    return sample(fn, noise_init, cfg.sample_steps, cfg.guidance);
}

}  // namespace hth::diffusion
