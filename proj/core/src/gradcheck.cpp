// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hth/ops.hpp"

namespace hth::gradcheck {

namespace {

double project(const Tensor& y, const Tensor& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
}

}  // namespace

Result check(const Fn& f, std::span<const Tensor> inputs, Rng& rng, double sample, Scale scale, double step) {
    std::vector<Var> consts;
    for (const auto& t : inputs) consts.push_back(Var::constant(t));
    const Tensor probe = f(consts).value();
    const Tensor r = rng.normal_tensor(probe.shape());

    Tape tape;
    std::vector<Var> params;
    for (const auto& t : inputs) params.push_back(tape.param(t));
    const Var y = f(params);
    const Var loss = ops::sum(ops::mul(y, Var::constant(r)));
    const Gradients g = tape.grad(loss, params);

    auto eval = [&](std::size_t which, std::size_t k, double delta) {
        std::vector<Var> in;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (i != which) {
                in.push_back(Var::constant(inputs[i]));
                continue;
            }
            Tensor t = inputs[i];
            t[k] += delta;
            in.push_back(Var::constant(std::move(t)));
        }
        return project(f(in).value(), r);
    };

    Result res;
    double all_diff = 0.0, all_num = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        double max_diff = 0.0, max_num = 0.0;
        const std::size_t n = inputs[i].size();
        std::vector<std::size_t> idx(n);
        for (std::size_t k = 0; k < n; ++k) idx[k] = k;
        std::size_t take = n;
        if (sample < 1.0) {
            take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(sample * static_cast<double>(n))));
            for (std::size_t k = 0; k < take; ++k) std::swap(idx[k], idx[k + rng.below(n - k)]);
        }
        for (std::size_t j = 0; j < take; ++j) {
            const std::size_t k = idx[j];
            const double num = (eval(i, k, step) - eval(i, k, -step)) / (2.0 * step);
            max_diff = std::max(max_diff, std::abs(g[i][k] - num));
            max_num = std::max(max_num, std::abs(num));
            ++res.checked;
        }
        res.rel_error = std::max(res.rel_error, max_num > 0.0 ? max_diff / max_num : max_diff);
        all_diff = std::max(all_diff, max_diff);
        all_num = std::max(all_num, max_num);
    }
    if (scale == Scale::kGlobal) res.rel_error = all_num > 0.0 ? all_diff / all_num : all_diff;
    return res;
}

}  // namespace hth::gradcheck
