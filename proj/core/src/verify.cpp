// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <thread>

#include <Eigen/SVD>

#include "hth/attention.hpp"
#include "hth/diffusion.hpp"
#include "hth/gradcheck.hpp"
#include "hth/hydra.hpp"
#include "hth/model.hpp"
#include "hth/ops.hpp"
#include "hth/scan.hpp"
#include "hth/sequence.hpp"
#include "hth/ssd.hpp"

namespace hth::verify {

void Checker::expect(bool ok, std::string_view what) {
    ++checks_;
    if (!ok) {
        if (failures_ == 0) first_failure_ = std::string(what);
        ++failures_;
    }
}

void Checker::within(double err, double tol, std::string_view what) {
    worst_ratio_ = std::max(worst_ratio_, err / tol);
    if (!(err <= tol)) {
        expect(false, std::string(what) + ": error " + std::to_string(err) + " > " + std::to_string(tol));
    } else {
        expect(true, what);
    }
}

namespace {

double rel(const Matrix& a, const Matrix& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

Matrix normal_matrix(Rng& rng, std::size_t r, std::size_t c) {
    return rng.normal_tensor({r, c}).matrix();
}

ssd::SsmStepParams random_step(Rng& rng, std::size_t T, std::size_t N) {
    ssd::SsmStepParams p;
    p.delta.resize(static_cast<Eigen::Index>(T));
    for (Eigen::Index i = 0; i < p.delta.size(); ++i) p.delta(i) = rng.uniform(0.05, 1.0);
    p.a_cont = -rng.uniform(0.2, 2.0);
    p.b_in = normal_matrix(rng, T, N);
    p.c_out = normal_matrix(rng, T, N);
    return p;
}

ssd::DiscretizedParams ones_params(std::size_t T) {
    return {Vector::Ones(static_cast<Eigen::Index>(T)), Matrix::Ones(static_cast<Eigen::Index>(T), 1)};
}

Tensor vec_tensor(const Vector& v) {
    Tensor t({static_cast<std::size_t>(v.size()), 1});
    for (Eigen::Index i = 0; i < v.size(); ++i) t[static_cast<std::size_t>(i)] = v(i);
    return t;
}

std::size_t numerical_rank(const Matrix& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-9 * s(0)) ++r;
    return r;
}

Var mix_head_const(const ssd::SsmStepParams& p, const Matrix& x, double d, hydra::Combine combine, std::size_t chunk) {
    return hydra::mix_head(Var::constant(Tensor::from_matrix(x)), Var::constant(vec_tensor(p.delta)),
                           Var::constant(Tensor::scalar(p.a_cont)), Var::constant(Tensor::from_matrix(p.b_in)),
                           Var::constant(Tensor::from_matrix(p.c_out)), Var::constant(Tensor::scalar(d)), combine,
                           chunk);
}

ModelConfig tiny_model(std::size_t frames = 1) {
    ModelConfig c;
    c.model_dim = 8;
    c.attn_heads = 2;
    c.ssm_heads = 2;
    c.head_dim = 8;
    c.state_dim = 4;
    c.conv_window = 3;
    c.patch = 2;
    c.latent_channels = 2;
    c.latent = {frames, 4, 4};
    c.text_dim = 4;
    c.ctx_len = 2;
    c.n_classes = 3;
    return c;
}

}  // namespace

void ssd_equivalence(Checker& c) {
    Rng rng(101);
    {
        const auto d = ssd::discretize(Vector::Constant(1, std::numbers::ln2), -1.0, Matrix::Ones(1, 1));
        c.within(std::abs(d.a_bar(0) - 0.5), 1e-15, "zoh a_bar at delta=ln2");
        c.within(std::abs(d.b_bar(0, 0) - 0.5), 1e-15, "zoh b_bar at delta=ln2");
    }
    {
        const auto d = ssd::discretize(Vector::Constant(1, 1e-12), -1.0, Matrix::Constant(1, 1, 2.0));
        c.within(std::abs(d.b_bar(0, 0) - 2e-12) / 2e-12, 1e-9, "zoh small-step limit b_bar");
        c.within(std::abs(d.a_bar(0) - 1.0), 1e-11, "zoh small-step limit a_bar");
    }
    {
        Matrix b(1, 2);
        b << 1.0, 0.0;
        const auto d = ssd::discretize(Vector::Constant(1, 1.0), -1.0, b);
        c.within(std::abs(d.a_bar(0) - std::exp(-1.0)), 1e-15, "zoh a_bar at delta=1");
        c.within(std::abs(d.b_bar(0, 0) - (1.0 - std::exp(-1.0))), 1e-15, "zoh b_bar at delta=1");
        c.expect(d.b_bar(0, 1) == 0.0, "zoh keeps zero input columns zero");
    }
    {
        const auto d = ssd::discretize(Vector::Constant(2, 0.5), -1.0, Matrix::Ones(2, 1));
        c.expect(d.a_bar(1) == std::exp(-0.5), "zoh a_bar at delta=0.5");
    }
    {
        const auto d = ones_params(3);
        Matrix x(3, 1);
        x << 1, 2, 3;
        Matrix want(3, 1);
        want << 1, 3, 6;
        const Matrix cm = Matrix::Ones(3, 1);
        c.within(rel(ssd::ssm_recurrence(d, cm, x), want), 1e-15, "prefix sums via recurrence");
        c.within(rel(ssd::materialize_matrix(d, cm) * x, want), 1e-15, "prefix sums via matrix");
        const Matrix lower = Matrix::Ones(3, 3).triangularView<Eigen::Lower>();
        c.within(rel(ssd::materialize_matrix(d, cm), lower), 0.0, "decay-free matrix is all-ones lower");
        for (std::size_t q : {1, 2, 3}) c.within(rel(ssd::chunked_scan(d, cm, x, q), want), 1e-15, "prefix sums via chunks");
        c.expect(ssd::ssm_recurrence(d, cm, Matrix::Zero(3, 2)).isZero(0.0), "zero input gives zero output");
    }
    for (int i = 0; i < 60; ++i) {
        const std::size_t T = pick(rng, 1, 64), N = pick(rng, 1, 8), P = pick(rng, 1, 4);
        const auto p = random_step(rng, T, N);
        const auto d = ssd::discretize(p);
        const Matrix x = normal_matrix(rng, T, P);
        const Matrix ref = ssd::ssm_recurrence(d, p.c_out, x);
        const std::string tag = "instance " + std::to_string(i) + " (T=" + std::to_string(T) + ")";
        c.within(rel(ssd::materialize_matrix(d, p.c_out) * x, ref), 1e-8, "matrix vs recurrence, " + tag);
        c.within(rel(ssd::chunked_scan(d, p.c_out, x, pick(rng, 1, T)), ref), 1e-8, "chunked vs recurrence, " + tag);
        c.within(rel(ssd::chunked_scan(d, p.c_out, x, T), ref), 1e-8, "single chunk, " + tag);
        c.within(rel(ssd::chunked_scan(d, p.c_out, x, 1), ref), 1e-8, "unit chunks, " + tag);
    }
    {
        const auto p = random_step(rng, 257, 4);
        const auto d = ssd::discretize(p);
        const Matrix x = normal_matrix(rng, 257, 3);
        c.within(rel(ssd::chunked_scan(d, p.c_out, x, 32), ssd::ssm_recurrence(d, p.c_out, x)), 1e-8,
                 "T=257 with chunk 32");
    }
}

void ssd_structure(Checker& c) {
    Rng rng(202);
    for (int i = 0; i < 30; ++i) {
        const std::size_t T = pick(rng, 4, 16), N = pick(rng, 1, std::min<std::size_t>(4, T / 2));
        const auto p = random_step(rng, T, N);
        const auto d = ssd::discretize(p);
        const Matrix m = ssd::materialize_matrix(d, p.c_out);
        const Matrix qs = hydra::materialize_qs(d, p.c_out, 0.0);
        const auto Ti = static_cast<Eigen::Index>(T);
        for (Eigen::Index k = 1; k < Ti; ++k) {
            c.expect(numerical_rank(m.bottomLeftCorner(Ti - k, k)) <= N, "semiseparable off-diagonal rank");
            c.expect(numerical_rank(qs.bottomLeftCorner(Ti - k, k)) <= N, "quasiseparable lower block rank");
            c.expect(numerical_rank(qs.topRightCorner(k, Ti - k)) <= N, "quasiseparable upper block rank");
        }
        c.expect(m.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0), "semiseparable is causal");
        c.expect(qs.diagonal().isZero(0.0), "shifted terms leave the diagonal empty");

        const Matrix x = normal_matrix(rng, T, 2);
        const std::size_t s = pick(rng, 0, T - 1);
        Matrix x2 = x;
        x2.row(static_cast<Eigen::Index>(s)).array() += 1.0;
        const Matrix y1 = ssd::chunked_scan(d, p.c_out, x, 4), y2 = ssd::chunked_scan(d, p.c_out, x2, 4);
        bool causal = true;
        for (std::size_t t = 0; t < s; ++t)
            causal = causal && (y1.row(static_cast<Eigen::Index>(t)) - y2.row(static_cast<Eigen::Index>(t))).isZero(0.0);
        c.expect(causal, "perturbing x_s leaves y_t, t < s, unchanged");

        const std::size_t mid = T / 2;
        Matrix x3 = x;
        x3.row(static_cast<Eigen::Index>(mid)).array() += 1.0;
        const Matrix q1 = hydra::value_path(d, p.c_out, x, 0.0), q3 = hydra::value_path(d, p.c_out, x3, 0.0);
        const Matrix diff = (q1 - q3).cwiseAbs();
        c.expect(diff.topRows(static_cast<Eigen::Index>(mid)).maxCoeff() > 0.0 &&
                     diff.bottomRows(Ti - static_cast<Eigen::Index>(mid) - 1).maxCoeff() > 0.0,
                 "value path reacts on both sides of a perturbation");
    }
}

void quasiseparable(Checker& c) {
    Rng rng(303);
    {
        const auto d = ones_params(3);
        const Matrix cm = Matrix::Ones(3, 1);
        Matrix x(3, 1);
        x << 1, 2, 3;
        Matrix want(3, 1);
        want << 5, 4, 3;
        c.within(rel(hydra::value_path(d, cm, x, 0.0), want), 1e-15, "degenerate value path [5,4,3]");
        want << 6, 6, 6;
        c.within(rel(hydra::value_path(d, cm, x, 1.0), want), 1e-15, "degenerate value path with D=1 [6,6,6]");
        Matrix qs(3, 3);
        qs << 0, 1, 1, 1, 0, 1, 1, 1, 0;
        c.within(rel(hydra::materialize_qs(d, cm, 0.0), qs), 1e-15, "degenerate quasiseparable matrix");
        c.within(rel(hydra::materialize_qs(d, cm, 0.0) * x, Matrix(want.array() - x.array())), 1e-15,
                 "degenerate matrix times x");
    }
    {
        const auto p = random_step(rng, 1, 3);
        const Matrix qs = hydra::materialize_qs(ssd::discretize(p), p.c_out, 0.7);
        c.expect(qs.rows() == 1 && qs(0, 0) == 0.7, "length-1 matrix is [d]");
    }
    for (int i = 0; i < 60; ++i) {
        const std::size_t T = pick(rng, 1, 48), N = pick(rng, 1, 8), P = pick(rng, 1, 4);
        const auto p = random_step(rng, T, N);
        const auto d = ssd::discretize(p);
        const double dd = rng.normal();
        const Matrix x = normal_matrix(rng, T, P);
        const Matrix oracle = hydra::materialize_qs(d, p.c_out, dd) * x;
        const std::size_t chunk = pick(rng, 1, T);
        const std::string tag = "instance " + std::to_string(i) + " (T=" + std::to_string(T) + ")";
        const Matrix mixed = mix_head_const(p, x, dd, hydra::Combine::kQuasiseparable, chunk).value().matrix();
        c.within(rel(mixed, oracle), 1e-8, "mixer value path vs quasiseparable matrix, " + tag);
        c.within(rel(hydra::value_path(d, p.c_out, x, dd, hydra::Combine::kQuasiseparable, chunk), oracle), 1e-8,
                 "discretized value path vs quasiseparable matrix, " + tag);

        // Reversing the sequence and every per-position parameter mirrors the output.
        ssd::SsmStepParams r = p;
        r.delta = p.delta.reverse().eval();
        r.b_in = seq::flip(p.b_in);
        r.c_out = seq::flip(p.c_out);
        const Matrix mirrored = seq::flip(mix_head_const(r, seq::flip(x), dd, hydra::Combine::kQuasiseparable, chunk)
                                             .value()
                                             .matrix());
        c.within(rel(mirrored, mixed), 1e-12, "mirrored computation, " + tag);
    }
}

void op_gradients(Checker& c) {
    Rng rng(404);
    using gradcheck::Fn;
    struct Case {
        Fn f;
        std::vector<Tensor> in;
    };
    auto mat = [&](std::size_t r, std::size_t k) { return rng.normal_tensor({r, k}); };
    auto dim = [&] { return pick(rng, 1, 5); };
    auto unary = [](Var (*op)(const Var&)) { return [op](std::span<const Var> v) { return op(v[0]); }; };

    std::vector<std::pair<std::string, std::function<Case()>>> cases = {
        {"add", [&] { auto r = dim(), k = dim(); return Case{[](auto v) { return ops::add(v[0], v[1]); }, {mat(r, k), mat(r, k)}}; }},
        {"sub", [&] { auto r = dim(), k = dim(); return Case{[](auto v) { return ops::sub(v[0], v[1]); }, {mat(r, k), mat(r, k)}}; }},
        {"mul", [&] { auto r = dim(), k = dim(); return Case{[](auto v) { return ops::mul(v[0], v[1]); }, {mat(r, k), mat(r, k)}}; }},
        {"scale", [&] { const double s = rng.normal(); return Case{[s](auto v) { return ops::scale(v[0], s); }, {mat(dim(), dim())}}; }},
        {"mul_scalar", [&] { return Case{[](auto v) { return ops::mul_scalar(v[0], v[1]); }, {mat(dim(), dim()), mat(1, 1)}}; }},
        {"add_bias", [&] { auto k = dim(); return Case{[](auto v) { return ops::add_bias(v[0], v[1]); }, {mat(dim(), k), mat(1, k)}}; }},
        {"mul_cols", [&] { auto k = dim(); return Case{[](auto v) { return ops::mul_cols(v[0], v[1]); }, {mat(dim(), k), mat(1, k)}}; }},
        {"matmul", [&] { auto r = dim(), k = dim(), m = dim(); return Case{[](auto v) { return ops::matmul(v[0], v[1]); }, {mat(r, k), mat(k, m)}}; }},
        {"transpose", [&] { return Case{unary(ops::transpose), {mat(dim(), dim())}}; }},
        {"reshape", [&] { auto r = dim(), k = dim(); return Case{[r, k](auto v) { return ops::reshape(v[0], {k, r}); }, {mat(r, k)}}; }},
        {"sum", [&] { return Case{unary(ops::sum), {mat(dim(), dim())}}; }},
        {"mean", [&] { return Case{unary(ops::mean), {mat(dim(), dim())}}; }},
        {"square", [&] { return Case{unary(ops::square), {mat(dim(), dim())}}; }},
        {"exp", [&] { return Case{unary(ops::exp), {mat(dim(), dim())}}; }},
        {"silu", [&] { return Case{unary(ops::silu), {mat(dim(), dim())}}; }},
        {"softplus", [&] { return Case{unary(ops::softplus), {mat(dim(), dim())}}; }},
        {"mse", [&] { auto r = dim(), k = dim(); return Case{[](auto v) { return ops::mse(v[0], v[1]); }, {mat(r, k), mat(r, k)}}; }},
        {"rmsnorm", [&] { return Case{[](auto v) { return ops::rmsnorm(v[0]); }, {mat(dim(), pick(rng, 2, 6))}}; }},
        {"rmsnorm_grouped", [&] { auto g = pick(rng, 1, 3); return Case{[g](auto v) { return ops::rmsnorm(v[0], g); }, {mat(dim(), g * pick(rng, 1, 3))}}; }},
        {"layernorm", [&] { return Case{[](auto v) { return ops::layernorm(v[0]); }, {mat(dim(), pick(rng, 2, 6))}}; }},
        {"softmax_rows", [&] { return Case{[](auto v) { return ops::softmax_rows(v[0]); }, {mat(dim(), dim())}}; }},
        {"slice_cols", [&] { auto k = pick(rng, 2, 6); auto b = pick(rng, 0, k - 1); auto n = pick(rng, 1, k - b);
                             return Case{[b, n](auto v) { return ops::slice_cols(v[0], b, n); }, {mat(dim(), k)}}; }},
        {"slice_rows", [&] { auto r = pick(rng, 2, 6); auto b = pick(rng, 0, r - 1); auto n = pick(rng, 1, r - b);
                             return Case{[b, n](auto v) { return ops::slice_rows(v[0], b, n); }, {mat(r, dim())}}; }},
        {"concat_cols", [&] { auto r = dim(); return Case{[](auto v) { return ops::concat_cols(v); }, {mat(r, dim()), mat(r, dim()), mat(r, dim())}}; }},
        {"concat_rows", [&] { auto k = dim(); return Case{[](auto v) { return ops::concat_rows(v); }, {mat(dim(), k), mat(dim(), k)}}; }},
        {"gather_rows", [&] { auto r = dim(); std::vector<std::size_t> idx(pick(rng, 1, 8));
                              for (auto& i : idx) i = rng.below(r);
                              return Case{[idx](auto v) { return ops::gather_rows(v[0], idx); }, {mat(r, dim())}}; }},
        {"flip_rows", [&] { return Case{unary(ops::flip_rows), {mat(dim(), dim())}}; }},
        {"shift_rows", [&] { return Case{unary(ops::shift_rows), {mat(dim(), dim())}}; }},
        {"depthwise_conv1d", [&] { auto ch = dim(); auto k = 2 * pick(rng, 0, 3) + 1;
                                   return Case{[](auto v) { return ops::depthwise_conv1d(v[0], v[1], v[2]); },
                                               {mat(pick(rng, 1, 9), ch), mat(ch, k), mat(1, ch)}}; }},
        {"depthwise_conv1d_causal", [&] { auto ch = dim(); auto k = 2 * pick(rng, 0, 3) + 1;
                                   return Case{[](auto v) { return ops::depthwise_conv1d(v[0], v[1], v[2], ops::Padding::kCausal); },
                                               {mat(pick(rng, 1, 9), ch), mat(ch, k), mat(1, ch)}}; }},
        {"selective_scan", [&] {
             auto T = pick(rng, 1, 12), N = pick(rng, 1, 3), P = pick(rng, 1, 3);
             auto q = pick(rng, 1, T);
             Tensor delta = rng.uniform_tensor({T, 1}, 0.1, 1.0);
             return Case{[q](auto v) { return hydra::selective_scan(v[0], v[1], v[2], v[3], v[4], q); },
                         {mat(T, P), delta, Tensor::scalar(-rng.uniform(0.3, 1.5)), mat(T, N), mat(T, N)}}; }},
    };
    for (auto combine : {hydra::Combine::kQuasiseparable, hydra::Combine::kCausal, hydra::Combine::kAdditive}) {
        cases.push_back({"mix_head/" + std::to_string(static_cast<int>(combine)), [&, combine] {
             auto T = pick(rng, 1, 10), N = pick(rng, 1, 3), P = pick(rng, 1, 3);
             auto q = pick(rng, 1, T);
             return Case{[q, combine](auto v) { return hydra::mix_head(v[0], v[1], v[2], v[3], v[4], v[5], combine, q); },
                         {mat(T, P), rng.uniform_tensor({T, 1}, 0.1, 1.0), Tensor::scalar(-rng.uniform(0.3, 1.5)),
                          mat(T, N), mat(T, N), mat(1, 1)}}; }});
    }
    cases.push_back({"hydra_apply", [&] {
        hydra::HydraConfig cfg;
        cfg.model_dim = 4;
        cfg.heads = 2;
        cfg.head_dim = 4;
        cfg.state_dim = pick(rng, 1, 3);
        cfg.conv_window = 3;
        cfg.chunk = pick(rng, 1, 4);
        auto w = hydra::init_params(cfg, rng, {.zero_out_proj = false});
        w.out_proj = rng.normal_tensor(w.out_proj.shape(), 0.5);
        w.in_proj = rng.normal_tensor(w.in_proj.shape(), 0.5);
        std::vector<Tensor> in{mat(pick(rng, 1, 8), 4)};
        for (auto& [name, t] : named_tensors(w)) in.push_back(*t);
        return Case{[cfg, w](std::span<const Var> v) {
                        std::size_t k = 1;
                        auto bound = convert_weights(w, [&](const std::string&, const Tensor&) { return v[k++]; });
                        return hydra::hydra_apply(bound, cfg, v[0]);
                    },
                    in};
    }});
    cases.push_back({"softmax_attention", [&] {
        auto heads = pick(rng, 1, 2), dh = pick(rng, 1, 3), lq = dim(), lk = dim();
        return Case{[heads](auto v) { return attention::softmax_attention(v[0], v[1], v[2], heads); },
                    {mat(lq, heads * dh), mat(lk, heads * dh), mat(lk, heads * dh)}};
    }});
    cases.push_back({"cross_attention", [&] {
        attention::AttentionConfig cfg{.model_dim = 4, .heads = 2};
        auto w = attention::init_params(cfg, rng, false);
        for (auto& [name, t] : named_tensors(w)) *t = rng.normal_tensor(t->shape(), 0.5);
        std::vector<Tensor> in{mat(dim(), 4), mat(dim(), 4)};
        for (auto& [name, t] : named_tensors(w)) in.push_back(*t);
        return Case{[cfg, w](std::span<const Var> v) {
                        std::size_t k = 2;
                        auto bound = convert_weights(w, [&](const std::string&, const Tensor&) { return v[k++]; });
                        return attention::cross_attention(bound, cfg, v[0], v[1]);
                    },
                    in};
    }});
    cases.push_back({"scan_gather", [&] {
        const scan::Grid g{pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 3)};
        const auto plan = scan::build_plan(static_cast<scan::Pattern>(rng.below(6)), g);
        return Case{[plan](auto v) { return scan::scatter(plan, ops::square(scan::gather(plan, v[0]))); },
                    {mat(g.size(), dim())}};
    }});

    for (auto& [name, make] : cases) {
        for (int i = 0; i < 20; ++i) {
            Case k = make();
            const auto r = gradcheck::check(k.f, k.in, rng);
            c.within(r.rel_error, 1e-3, name + " instance " + std::to_string(i));
        }
    }
}

void model_gradient(Checker& c) {
    Rng rng(505);
    const ModelConfig cfg = tiny_model();
    const HthModel model = HthModel::init(cfg, rng, {.zero_init = false});
    const std::size_t B = 2;
    const Tensor x0 = rng.normal_tensor({B, 1, 4, 4, 2});
    const Tensor eps = rng.normal_tensor(x0.shape());
    const std::vector<double> t{0.3, 0.8};
    const std::vector<std::size_t> labels{1, model.null_label()};
    std::vector<Tensor> in;
    auto named = named_tensors(const_cast<ModelWeights<Tensor>&>(model.weights()));
    for (auto& [name, w] : named) in.push_back(*w);
    const gradcheck::Fn f = [&](std::span<const Var> v) {
        std::size_t k = 0;
        auto bound = convert_weights(model.weights(), [&](const std::string&, const Tensor&) { return v[k++]; });
        return diffusion::loss(model, bound, x0, eps, t, labels);
    };
    const auto r = gradcheck::check(f, in, rng, 0.01, gradcheck::Scale::kGlobal);
    c.within(r.rel_error, 1e-2, "11-block model loss gradient on sampled parameters");
    c.expect(r.checked >= model.parameter_count() / 100, "sampled at least 1% of parameters");
}

void scan_plans(Checker& c) {
    using scan::Pattern;
    Rng rng(606);
    auto perm = [](Pattern p, scan::Grid g) { return scan::build_plan(p, g).perm; };
    using P = std::vector<std::size_t>;
    c.expect(perm(Pattern::kH, {1, 2, 2}) == P{0, 1, 2, 3}, "H on (1,2,2)");
    c.expect(perm(Pattern::kV, {1, 2, 2}) == P{0, 2, 1, 3}, "V on (1,2,2)");
    c.expect(perm(Pattern::kTH, {2, 1, 2}) == P{0, 2, 1, 3}, "TH on (2,1,2)");
    {
        const Tensor grid = Tensor::column({1, 2, 3, 4});
        const Tensor seq = scan::gather(scan::build_plan(Pattern::kV, {1, 2, 2}), grid);
        c.expect(seq == Tensor::column({1, 3, 2, 4}), "V gather of [[a,b],[c,d]] is [a,c,b,d]");
    }
    const Pattern all[] = {Pattern::kH, Pattern::kV, Pattern::kTH, Pattern::kTV, Pattern::kHT, Pattern::kVT};
    for (int i = 0; i < 200; ++i) {
        const scan::Grid g{pick(rng, 1, 6), pick(rng, 1, 6), pick(rng, 1, 6)};
        const Tensor x = rng.normal_tensor({g.size(), 2});
        for (Pattern p : all) {
            const auto plan = scan::build_plan(p, g);
            std::set<std::size_t> seen(plan.perm.begin(), plan.perm.end());
            bool inverse = plan.perm.size() == g.size();
            for (std::size_t k = 0; k < plan.perm.size() && inverse; ++k) inverse = plan.inv_perm[plan.perm[k]] == k;
            c.expect(seen.size() == g.size() && *seen.rbegin() == g.size() - 1 && inverse,
                     std::string("bijection for ") + std::string(scan::to_string(p)) + " on " + scan::to_string(g));
            c.expect(scan::scatter(plan, scan::gather(plan, x)) == x, "gather/scatter round trip");
        }
        // locality: H neighbours along w, TH neighbours along t
        const auto h = scan::build_plan(Pattern::kH, g), th = scan::build_plan(Pattern::kTH, g);
        bool local = true;
        for (std::size_t t = 0; t < g.frames; ++t)
            for (std::size_t y = 0; y < g.height; ++y)
                for (std::size_t w = 0; w < g.width; ++w) {
                    if (w + 1 < g.width)
                        local = local && h.inv_perm[g.index(t, y, w + 1)] == h.inv_perm[g.index(t, y, w)] + 1;
                    if (t + 1 < g.frames)
                        local = local && th.inv_perm[g.index(t + 1, y, w)] == th.inv_perm[g.index(t, y, w)] + 1;
                }
        c.expect(local, "scan locality on " + scan::to_string(g));
        const scan::Grid img{1, g.height, g.width};
        c.expect(perm(Pattern::kTH, img) == perm(Pattern::kH, img), "TH reduces to H at T=1");
        c.expect(perm(Pattern::kTV, img) == perm(Pattern::kV, img), "TV reduces to V at T=1");
        c.expect(perm(Pattern::kHT, img) == perm(Pattern::kH, img), "HT reduces to H at T=1");
        c.expect(perm(Pattern::kVT, img) == perm(Pattern::kV, img), "VT reduces to V at T=1");
    }
    c.expect(scan::build_schedule(11, 1).describe() == "H,V,H,V,H,V,H,V,H,V,attn", "stage-1 schedule");
    c.expect(scan::build_schedule(11, 2).describe() == "HT,VT,TH,TV,HT,VT,TH,TV,HT,VT,attn", "stage-2 schedule");
    for (std::size_t n : {11, 22, 33}) {
        for (int stage : {1, 2}) {
            const auto s = scan::build_schedule(n, stage);
            c.expect(s.blocks.size() == n, "schedule length");
            std::size_t temporal = 0;
            bool layout = true;
            for (std::size_t i = 0; i < n; ++i) {
                const bool attn_slot = i % scan::kSetSize == scan::kSetSize - 1;
                layout = layout && (s.blocks[i].kind == MixerKind::kAttention) == attn_slot;
                if (!attn_slot && s.pattern(i) && scan::is_temporal_major(*s.pattern(i))) ++temporal;
            }
            c.expect(layout, "self-attention exactly at the last slot of every set");
            c.expect(s.count(MixerKind::kHydra) * 1 == 10 * (n / 11) && s.count(MixerKind::kAttention) == n / 11,
                     "10:1 per set");
            c.expect(stage == 1 ? temporal == 0 : temporal * 10 == 4 * s.count(MixerKind::kHydra),
                     "temporal-major share");
        }
    }
    const auto s33 = scan::build_schedule(33, 2);
    c.expect(s33.count(MixerKind::kHydra) == 30 && s33.count(MixerKind::kAttention) == 3, "30:3 at 33 blocks");
}

void stage_equivalence(Checker& c) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        Rng rng(seed);
        ModelConfig cfg;
        cfg.latent = {1, 8, 8};
        HthModel model = HthModel::init(cfg, rng, {.zero_init = false});
        const Tensor x = rng.normal_tensor({2, 1, 8, 8, cfg.latent_channels});
        const std::vector<double> t{0.25, 0.75};
        const std::vector<std::size_t> labels{2, model.null_label()};
        const Tensor s1 = model.denoise(x, t, labels);
        model.set_stage(2);
        const Tensor s2 = model.denoise(x, t, labels);
        c.within(max_relative_error(s2, s1), 1e-12, "stage 2 equals stage 1 on single frames");

        // Not vacuous: on video the two stages disagree.
        const Tensor v = rng.normal_tensor({1, 3, 4, 4, cfg.latent_channels});
        const Tensor v2 = model.denoise(v, std::vector<double>{0.5}, std::vector<std::size_t>{1});
        model.set_stage(1);
        const Tensor v1 = model.denoise(v, std::vector<double>{0.5}, std::vector<std::size_t>{1});
        c.expect(max_relative_error(v2, v1) > 1e-6, "stages differ on multi-frame input");
    }
}

void diffusion_identities(Checker& c) {
    Rng rng(707);
    const Tensor x0 = Tensor::column({2.0}), zero = Tensor::column({0.0});
    c.expect(diffusion::noise(x0, zero, 0.5) == Tensor::column({1.0}), "x_0.5 of 2 and 0 is 1");
    for (int i = 0; i < 10; ++i) {
        const Tensor a = rng.normal_tensor({3, 4}), e = rng.normal_tensor({3, 4});
        c.expect(diffusion::noise(a, e, 0.0) == a && diffusion::noise(a, e, 1.0) == e, "endpoints of the path");
        const Tensor target = diffusion::velocity_target(a, e);
        for (std::size_t steps : {1, 2, 7, 20}) {
            const diffusion::VelocityFn field = [&](const Tensor&, double, bool) { return target; };
            c.within(max_relative_error(diffusion::sample(field, e, steps, 1.0), a), 1e-12,
                     "constant field integrates back to x0");
        }
        const Tensor vc = rng.normal_tensor({3, 4}), vu = rng.normal_tensor({3, 4});
        c.expect(diffusion::guided_velocity(vc, vu, 1.0) == vc, "s = 1 gives the conditional velocity");
        c.expect(diffusion::guided_velocity(vc, vu, 0.0) == vu, "s = 0 gives the unconditional velocity");
        const Tensor g2 = diffusion::guided_velocity(vc, vu, 2.0);
        const Tensor lin = 2.0 * diffusion::guided_velocity(vc, vu, 1.0) - diffusion::guided_velocity(vc, vu, 0.0);
        c.within(max_abs(g2 - lin), 1e-10, "guidance is affine in s");
    }
    {
        ModelConfig cfg = tiny_model();
        const HthModel model = HthModel::init(cfg, rng, {.zero_init = false});
        const Tensor x = rng.normal_tensor({2, 1, 4, 4, 2});
        const std::vector<double> t{0.4, 0.4};
        const std::vector<std::size_t> cond{0, 2}, uncond(2, model.null_label());
        const Tensor vc = model.denoise(x, t, cond), vu = model.denoise(x, t, uncond);
        const Tensor lin = 2.0 * diffusion::guided_velocity(vc, vu, 1.0) - diffusion::guided_velocity(vc, vu, 0.0);
        c.within(max_abs(diffusion::guided_velocity(vc, vu, 2.0) - lin), 1e-10, "guidance is affine on a model");
        c.expect(max_abs(vc - vu) > 0.0, "labels change the prediction");
    }
    {
        ModelConfig cfg = tiny_model();
        const HthModel model = HthModel::init(cfg, rng);
        const Tensor a = rng.normal_tensor({2, 1, 4, 4, 2}), e = rng.normal_tensor({2, 1, 4, 4, 2});
        const std::vector<double> t{0.1, 0.9};
        const std::vector<std::size_t> labels{0, 1};
        const double l = diffusion::loss(model, constants(model.weights()), a, e, t, labels).value()[0];
        const Tensor v = diffusion::velocity_target(a, e);
        double ref = 0.0;
        for (double d : v.data()) ref += d * d / static_cast<double>(v.size());
        c.within(std::abs(l - ref) / ref, 1e-12, "zero predictor loss equals mean squared target");
    }
}

void model_contract(Checker& c) {
    Rng rng(808);
    {
        const Tensor x = rng.normal_tensor({2, 2, 4, 6, 3});
        c.expect(unpatchify(patchify(x, 2), 2) == x, "patchify round trip");
        c.expect(patchify(x, 1).values() == x.values(), "p = 1 is the identity");
        const Tensor small({1, 1, 2, 2, 1}, {1, 2, 3, 4});
        c.expect(patchify(small, 2).values() == std::vector<double>{1, 2, 3, 4}, "[[a,b],[c,d]] becomes [a,b,c,d]");
    }
    {
        const Tensor pe = sinusoidal_pe({2, 3, 3}, 16);
        bool origin = true, bounded = true;
        for (std::size_t k = 0; k < 16; ++k) origin = origin && pe.at(0, k) == (k % 2 == 0 ? 0.0 : 1.0);
        for (double v : pe.data()) bounded = bounded && std::abs(v) <= 1.0;
        c.expect(origin, "origin embedding alternates 0, 1");
        c.expect(bounded, "embedding bounded by 1");
        std::set<std::vector<double>> rows;
        for (std::size_t r = 0; r < pe.rows(); ++r) {
            const auto row = pe.matrix().row(static_cast<Eigen::Index>(r));
            rows.insert(std::vector<double>(row.data(), row.data() + row.size()));
        }
        c.expect(rows.size() == pe.rows(), "positions map to distinct embeddings");
    }
    const ModelConfig cfg = tiny_model(2);
    const HthModel zero = HthModel::init(cfg, rng);
    const HthModel model = HthModel::init(cfg, rng, {.zero_init = false});
    const scan::Grid grid = cfg.token_grid();
    {
        const Var x = Var::constant(rng.normal_tensor({grid.size(), cfg.model_dim}));
        const Var ctx = Var::constant(rng.normal_tensor({cfg.ctx_len, cfg.model_dim}));
        const auto wz = constants(zero.weights());
        const auto plan_h = scan::build_plan(scan::Pattern::kH, grid), plan_v = scan::build_plan(scan::Pattern::kV, grid);
        c.expect(block_forward(wz.blocks[0], cfg, x, ctx, plan_h).value() == x.value(), "zero-initialized block is the identity");
        const auto w = constants(model.weights());
        c.expect(max_abs(block_forward(w.blocks[0], cfg, x, ctx, plan_h).value() -
                         block_forward(w.blocks[0], cfg, x, ctx, plan_v).value()) > 1e-9,
                 "hydra block depends on the scan plan");
        const auto& attn = w.blocks[scan::kSetSize - 1];
        c.expect(attn.kind == MixerKind::kAttention, "last block of the set is attention");
        c.expect(block_forward(attn, cfg, x, ctx, plan_h).value() == block_forward(attn, cfg, x, ctx, plan_v).value(),
                 "attention block ignores the scan plan");
    }
    {
        const Tensor x = rng.normal_tensor({2, 2, 4, 4, 2});
        const std::vector<double> t{0.2, 0.6};
        const std::vector<std::size_t> labels{0, 1};
        const Tensor a = model.denoise(x, t, labels), b = model.denoise(x, t, labels);
        c.expect(a == b, "forward is deterministic");
        c.expect(a.shape() == x.shape(), "prediction has the latent shape");
        const Tensor big = rng.normal_tensor({1, 2, 8, 8, 2});
        const Tensor out = model.denoise(big, std::vector<double>{0.5}, std::vector<std::size_t>{2});
        c.expect(out.shape() == big.shape() && out.all_finite(), "larger grid at inference");
        c.expect(timestep_features(0.3, 8) == timestep_features(0.3, 8), "time features are deterministic");

        Tape tape;
        const auto w = bind(tape, model.weights());
        const Tensor eps = rng.normal_tensor(x.shape());
        const Var loss = diffusion::loss(model, w, x, eps, t, labels);
        const Var params[] = {w.time_w1, w.time_w2};
        const auto g = tape.grad(loss, params);
        c.expect(max_abs(g[0]) > 0.0 && max_abs(g[1]) > 0.0, "loss gradient reaches the timestep embedding");
    }
}

const std::vector<Suite>& suites() {
    static const std::vector<Suite> list = {
        {"ssd-equivalence", "recurrence, matrix and chunked scan agree", ssd_equivalence},
        {"ssd-structure", "low-rank off-diagonal blocks, causality, bidirectionality", ssd_structure},
        {"quasiseparable", "mixer value path against the dense quasiseparable matrix", quasiseparable},
        {"op-gradients", "finite-difference checks of every differentiable op", op_gradients},
        {"model-gradient", "finite-difference check of an 11-block model", model_gradient},
        {"scan-plans", "plan bijectivity, reductions and schedules", scan_plans},
        {"stage-equivalence", "stage 2 matches stage 1 on single frames", stage_equivalence},
        {"diffusion", "path, sampler and guidance identities", diffusion_identities},
        {"model-contract", "patchify, embeddings and block contracts", model_contract},
    };
    return list;
}

const Suite& suite(std::string_view name) {
    for (const auto& s : suites())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
}

SuiteResult run_suite(const Suite& s) {
    SuiteResult r;
    r.name = s.name;
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        s.run(c);
        r.passed = c.passed();
        r.message = c.first_failure();
    } catch (const std::exception& e) {
        r.passed = false;
        r.message = std::string("exception: ") + e.what();
    }
    r.checks = c.checks();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<SuiteResult> run_all(std::span<const Suite> list, std::size_t threads) {
    std::vector<SuiteResult> out(list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < list.size(); i = next++) out[i] = run_suite(list[i]);
    };
    const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(list.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("HTH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace hth::verify
