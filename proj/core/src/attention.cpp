// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hth/ops.hpp"

namespace hth::attention {

namespace {

constexpr Eigen::Index kRowBlock = 256;

void softmax_inplace(Eigen::Ref<Matrix> s) {
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
    }
}

Var tile_cols(const Var& v, std::size_t times) {
    if (times == 1) return v;
    std::vector<Var> parts(times, v);
    return ops::concat_cols(parts);
}

Var project_qk(const Var& x, const Var& w, const Var& gain, std::size_t heads, std::size_t head_dim) {
    return ops::mul_cols(ops::rmsnorm(ops::matmul(x, w), head_dim), tile_cols(gain, heads));
}

}  // namespace

void AttentionConfig::validate() const {
    if (heads == 0 || model_dim == 0 || model_dim % heads != 0) {
        throw std::invalid_argument("attention: model_dim must be a positive multiple of heads");
    }
}

AttentionConfig AttentionConfig::published() { return {3072, 32}; }

AttnParams init_params(const AttentionConfig& cfg, Rng& rng, bool zero_out_proj) {
    cfg.validate();
    const std::size_t D = cfg.model_dim;
    AttnParams p;
    p.wq = rng.truncated_normal_tensor({D, D}, 0.02);
    p.wk = rng.truncated_normal_tensor({D, D}, 0.02);
    p.wv = rng.truncated_normal_tensor({D, D}, 0.02);
    p.wo = zero_out_proj ? Tensor({D, D}) : rng.truncated_normal_tensor({D, D}, 0.02);
    p.q_scale = Tensor({1, cfg.head_dim()}, 1.0);
    p.k_scale = Tensor({1, cfg.head_dim()}, 1.0);
    return p;
}

Var softmax_attention(const Var& q, const Var& k, const Var& v, std::size_t heads) {
    const auto Lq = static_cast<Eigen::Index>(q.rows());
    const auto Lk = static_cast<Eigen::Index>(k.rows());
    if (Lk < 1) throw ShapeError("attention: empty key sequence");
    if (v.rows() != k.rows() || q.cols() != k.cols() || v.cols() != k.cols()) {
        throw ShapeError("attention: q, k, v widths and k, v lengths must agree");
    }
    if (heads == 0 || q.cols() % heads != 0) throw ShapeError("attention: width must be a multiple of heads");
    const auto dh = static_cast<Eigen::Index>(q.cols() / heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor out({q.rows(), q.cols()});
    auto om = out.matrix();
    const auto qm = q.value().matrix();
    const auto km = k.value().matrix();
    const auto vm = v.value().matrix();
    for (std::size_t h = 0; h < heads; ++h) {
        const auto c0 = static_cast<Eigen::Index>(h) * dh;
        const Matrix kh = km.middleCols(c0, dh);
        const Matrix vh = vm.middleCols(c0, dh);
        for (Eigen::Index r0 = 0; r0 < Lq; r0 += kRowBlock) {
            const Eigen::Index n = std::min(kRowBlock, Lq - r0);
            Matrix s = (qm.block(r0, c0, n, dh) * kh.transpose()) * scale;
            softmax_inplace(s);
            om.block(r0, c0, n, dh).noalias() = s * vh;
        }
    }
    return Tape::record(std::move(out), {&q, &k, &v},
                        [q, k, v, heads, dh, scale](const Tensor& g) {
                            const auto qm = q.value().matrix();
                            const auto km = k.value().matrix();
                            const auto vm = v.value().matrix();
                            const auto gm = g.matrix();
                            Tensor gq(q.shape()), gk(k.shape()), gv(v.shape());
                            for (std::size_t h = 0; h < heads; ++h) {
                                const auto c0 = static_cast<Eigen::Index>(h) * dh;
                                const Matrix qh = qm.middleCols(c0, dh);
                                const Matrix kh = km.middleCols(c0, dh);
                                const Matrix vh = vm.middleCols(c0, dh);
                                const Matrix go = gm.middleCols(c0, dh);
                                Matrix p = (qh * kh.transpose()) * scale;
                                softmax_inplace(p);
                                gv.matrix().middleCols(c0, dh).noalias() = p.transpose() * go;
                                const Matrix dp = go * vh.transpose();
                                const Vector rowdot = dp.cwiseProduct(p).rowwise().sum();
                                const Matrix ds = p.cwiseProduct(dp.colwise() - rowdot) * scale;
                                gq.matrix().middleCols(c0, dh).noalias() = ds * kh;
                                gk.matrix().middleCols(c0, dh).noalias() = ds.transpose() * qh;
                            }
                            accumulate_grad(q, gq);
                            accumulate_grad(k, gk);
                            accumulate_grad(v, gv);
                        },
                        "softmax_attention");
}

Var cross_attention(const AttentionWeights<Var>& p, const AttentionConfig& cfg, const Var& x, const Var& ctx) {
    if (ctx.rows() < 1) throw ShapeError("cross_attention: empty context");
    if (x.cols() != cfg.model_dim || ctx.cols() != cfg.model_dim) {
        throw ShapeError("attention: token width must equal model_dim");
    }
    const std::size_t dh = cfg.head_dim();
    const Var q = project_qk(x, p.wq, p.q_scale, cfg.heads, dh);
    const Var k = project_qk(ctx, p.wk, p.k_scale, cfg.heads, dh);
    const Var v = ops::matmul(ctx, p.wv);
    return ops::matmul(softmax_attention(q, k, v, cfg.heads), p.wo);
}

Var self_attention(const AttentionWeights<Var>& p, const AttentionConfig& cfg, const Var& x) {
    if (x.rows() < 1) throw ShapeError("self_attention: empty sequence");
    return cross_attention(p, cfg, x, x);
}

}  // namespace hth::attention
