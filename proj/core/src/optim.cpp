// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace hth {

void round_to_float(Tensor& t) {
    for (double& x : t.data()) x = static_cast<double>(static_cast<float>(x));
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam: params and grads differ in count");
    if (m_.empty()) {
        for (const Tensor* p : params) {
            m_.emplace_back(p->shape());
            v_.emplace_back(p->shape());
        }
    }
    if (m_.size() != params.size()) throw std::invalid_argument("adam: parameter count changed between steps");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        if (g.size() != p.size()) throw ShapeError("adam: gradient shape mismatch");
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
            p[k] -= cfg_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.eps);
        }
        round_to_float(m);
        round_to_float(v);
        round_to_float(p);
        p.require_finite("adam step");
    }
}

void Adam::restore(std::size_t steps, std::vector<Tensor> m, std::vector<Tensor> v) {
    if (m.size() != v.size()) throw std::invalid_argument("adam: moment counts differ");
    t_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace hth
