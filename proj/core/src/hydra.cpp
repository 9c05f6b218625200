// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/hydra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hth/ops.hpp"
#include "hth/sequence.hpp"

namespace hth::hydra {

void HydraConfig::validate() const {
    if (model_dim == 0 || heads == 0 || head_dim == 0 || state_dim == 0) {
        throw std::invalid_argument("hydra: dimensions must be positive");
    }
    if (heads * head_dim != 2 * model_dim) {
        throw std::invalid_argument("hydra: heads * head_dim must equal 2 * model_dim (expansion 2)");
    }
    if (conv_window % 2 == 0) throw std::invalid_argument("hydra: convolution window must be odd");
    if (chunk == 0) throw std::invalid_argument("hydra: chunk must be positive");
}

HydraConfig HydraConfig::published() {
    HydraConfig c;
    c.model_dim = 3072;
    c.heads = 96;
    c.head_dim = 64;
    c.state_dim = 256;
    c.conv_window = 7;
    return c;
}

MixerParams init_params(const HydraConfig& cfg, Rng& rng, InitOptions opts) {
    cfg.validate();
    const std::size_t D = cfg.model_dim;
    const std::size_t E = cfg.inner_dim();
    const std::size_t H = cfg.heads;
    MixerParams p;
    p.in_proj = rng.truncated_normal_tensor({D, cfg.in_proj_width()}, 0.02);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.conv_window));
    p.conv_w = rng.uniform_tensor({cfg.conv_channels(), cfg.conv_window}, -bound, bound);
    p.conv_b = Tensor({1, cfg.conv_channels()});
    // step sizes log-uniform in [1e-3, 1e-1], stored through inverse softplus
    p.dt_bias = Tensor({1, H});
    for (auto& v : p.dt_bias.data()) {
        const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
        v = dt + std::log(-std::expm1(-dt));
    }
    p.a_log = Tensor({1, H});
    for (auto& v : p.a_log.data()) v = std::log(rng.uniform(1.0, 16.0));
    p.d_diag = Tensor({1, H}, 1.0);
    p.out_proj = opts.zero_out_proj ? Tensor({E, D}) : rng.truncated_normal_tensor({E, D}, 0.02);
    return p;
}

ssd::DiscretizedParams flipped(const ssd::DiscretizedParams& d) {
    return {d.a_bar.reverse(), seq::flip(d.b_bar)};
}

Matrix value_path(const ssd::DiscretizedParams& d, const Matrix& c, const Matrix& x, double d_diag,
                  Combine combine, std::size_t chunk) {
    const Matrix fwd = ssd::chunked_scan(d, c, x, chunk);
    Matrix y = d_diag * x;
    if (combine == Combine::kCausal) return y + fwd;
    const Matrix bwd = ssd::chunked_scan(flipped(d), seq::flip(c), seq::flip(x), chunk);
    if (combine == Combine::kAdditive) return y + fwd + seq::flip(bwd);
    return y + seq::shift(fwd) + seq::flip(seq::shift(bwd));
}

Matrix materialize_qs(const ssd::DiscretizedParams& d, const Matrix& c, double d_diag, std::size_t bound) {
    const auto T = static_cast<Eigen::Index>(d.length());
    if (d.length() > bound) {
        throw std::invalid_argument("materialize_qs: length " + std::to_string(T) + " exceeds verification bound " +
                                    std::to_string(bound));
    }
    const Matrix fwd = ssd::materialize_matrix(d, c);
    const Matrix bwd = ssd::materialize_matrix(flipped(d), c.colwise().reverse());
    // explicit permutation matrices, independent of the sequence operators
    Matrix shift = Matrix::Zero(T, T);
    for (Eigen::Index i = 1; i < T; ++i) shift(i, i - 1) = 1.0;
    Matrix flip = Matrix::Zero(T, T);
    for (Eigen::Index i = 0; i < T; ++i) flip(i, T - 1 - i) = 1.0;
    Matrix qs = shift * fwd + flip * shift * bwd * flip;
    qs.diagonal().array() += d_diag;
    return qs;
}

Var selective_scan(const Var& x, const Var& delta, const Var& a_cont, const Var& b, const Var& c,
                   std::size_t chunk) {
    const std::size_t T = x.rows();
    if (delta.value().size() != T || b.rows() != T || c.rows() != T) {
        throw ShapeError("selective_scan: per-position inputs must have " + std::to_string(T) + " rows");
    }
    if (a_cont.value().size() != 1) throw ShapeError("selective_scan: decay must be a scalar");
    auto params = std::make_shared<ssd::SsmStepParams>();
    params->delta = Eigen::Map<const Vector>(delta.value().data().data(), static_cast<Eigen::Index>(T));
    params->a_cont = a_cont.value()[0];
    params->b_in = b.value().matrix();
    params->c_out = c.value().matrix();
    const ssd::DiscretizedParams d = ssd::discretize(*params);
    Tensor y = Tensor::from_matrix(ssd::chunked_scan(d, params->c_out, x.value().matrix(), chunk));
    return Tape::record(std::move(y), {&x, &delta, &a_cont, &b, &c},
                        [x, delta, a_cont, b, c, params](const Tensor& g) {
                            const ssd::ScanGradients sg =
                                ssd::scan_backward(*params, x.value().matrix(), g.matrix());
                            accumulate_grad(x, Tensor::from_matrix(sg.dx));
                            Tensor gd(delta.shape());
                            std::copy(sg.ddelta.data(), sg.ddelta.data() + sg.ddelta.size(), gd.data().begin());
                            accumulate_grad(delta, gd);
                            accumulate_grad(a_cont, Tensor(a_cont.shape(), sg.da));
                            accumulate_grad(b, Tensor::from_matrix(sg.db));
                            accumulate_grad(c, Tensor::from_matrix(sg.dc));
                        },
                        "selective_scan");
}

Var mix_head(const Var& x, const Var& delta, const Var& a_cont, const Var& b, const Var& c, const Var& d_diag,
             Combine combine, std::size_t chunk) {
    const Var fwd = selective_scan(x, delta, a_cont, b, c, chunk);
    const Var skip = ops::mul_scalar(x, d_diag);
    if (combine == Combine::kCausal) return ops::add(fwd, skip);
    const Var bwd = selective_scan(ops::flip_rows(x), ops::flip_rows(delta), a_cont, ops::flip_rows(b),
                                   ops::flip_rows(c), chunk);
    if (combine == Combine::kAdditive) return ops::add(ops::add(fwd, ops::flip_rows(bwd)), skip);
    return ops::add(ops::add(ops::shift_rows(fwd), ops::flip_rows(ops::shift_rows(bwd))), skip);
}

Var hydra_apply(const HydraWeights<Var>& p, const HydraConfig& cfg, const Var& x) {
    if (x.rows() < 1) throw ShapeError("hydra_apply: empty sequence");
    if (x.cols() != cfg.model_dim) throw ShapeError("hydra_apply: input width must equal model_dim");
    const std::size_t E = cfg.inner_dim();
    const std::size_t N = cfg.state_dim;
    const std::size_t H = cfg.heads;
    const std::size_t P = cfg.head_dim;

    const Var u = ops::matmul(x, p.in_proj);
    const Var gate = ops::slice_cols(u, 0, E);
    const Var xbc_raw = ops::slice_cols(u, E, E + 2 * N);
    const Var dt_raw = ops::slice_cols(u, 2 * E + 2 * N, H);

    // a causal mixer needs a causal conv, or the window leaks future tokens
    const auto padding = cfg.combine == Combine::kCausal ? ops::Padding::kCausal : ops::Padding::kCentered;
    const Var xbc = ops::silu(ops::depthwise_conv1d(xbc_raw, p.conv_w, p.conv_b, padding));
    const Var values = ops::slice_cols(xbc, 0, E);
    const Var b = ops::slice_cols(xbc, E, N);
    const Var c = ops::slice_cols(xbc, E + N, N);
    const Var delta = ops::softplus(ops::add_bias(dt_raw, p.dt_bias));
    const Var a_cont = ops::scale(ops::exp(p.a_log), -1.0);

    std::vector<Var> heads;
    heads.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
        heads.push_back(mix_head(ops::slice_cols(values, h * P, P), ops::slice_cols(delta, h, 1),
                                 ops::slice_cols(a_cont, h, 1), b, c, ops::slice_cols(p.d_diag, h, 1), cfg.combine,
                                 cfg.chunk));
    }
    const Var y = H == 1 ? heads[0] : ops::concat_cols(heads);
    return ops::matmul(ops::mul(y, ops::silu(gate)), p.out_proj);
}

Tensor hydra_apply(const MixerParams& p, const HydraConfig& cfg, const Tensor& x) {
    return hydra_apply(constants(p), cfg, Var::constant(x)).value();
}

}  // namespace hth::hydra
