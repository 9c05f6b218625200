// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hth/bench.hpp"
#include "hth/compare.hpp"
#include "hth/config.hpp"
#include "hth/diffusion.hpp"
#include "hth/hydra.hpp"
#include "hth/scan.hpp"
#include "hth/ssd.hpp"
#include "hth/train.hpp"
#include "hth/verify.hpp"

#ifndef HTH_SOURCE_DIR
#error "HTH_SOURCE_DIR must point at the source tree"
#endif

namespace {

using namespace hth;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(const Matrix& a, const Matrix& b) {
    const double scale = b.cwiseAbs().maxCoeff();
    return (a - b).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

Matrix normal_matrix(Rng& rng, std::size_t r, std::size_t c) { return rng.normal_tensor({r, c}).matrix(); }

ssd::SsmStepParams random_step(Rng& rng, std::size_t T, std::size_t N) {
    ssd::SsmStepParams p;
    p.delta = Vector(static_cast<Eigen::Index>(T));
    for (auto& d : p.delta) d = rng.uniform(0.05, 1.5);
    p.a_cont = -rng.uniform(0.1, 2.0);
    p.b_in = normal_matrix(rng, T, N);
    p.c_out = normal_matrix(rng, T, N);
    return p;
}

// Product of a_bar over positions lo..hi inclusive (1 when empty).
double decay(const ssd::DiscretizedParams& d, Eigen::Index lo, Eigen::Index hi) {
    double v = 1.0;
    for (Eigen::Index k = lo; k <= hi; ++k) v *= d.a_bar(k);
    return v;
}

// y_i = sum_{j <= i} c_i . b_j prod_{j < k <= i} a_k x_j, one entry at a time.
Matrix causal_oracle(const ssd::DiscretizedParams& d, const Matrix& c, const Matrix& x) {
    const Eigen::Index T = x.rows();
    Matrix y = Matrix::Zero(T, x.cols());
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) y.row(i) += c.row(i).dot(d.b_bar.row(j)) * decay(d, j + 1, i) * x.row(j);
    return y;
}

// Lower part reads c one step behind, upper part one step ahead; the
// diagonal is D alone.
Matrix qs_oracle(const ssd::DiscretizedParams& d, const Matrix& c, double dd) {
    const Eigen::Index T = c.rows();
    Matrix m = Matrix::Zero(T, T);
    for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < T; ++j) {
            if (j < i) m(i, j) = c.row(i - 1).dot(d.b_bar.row(j)) * decay(d, j + 1, i - 1);
            if (j > i) m(i, j) = c.row(i + 1).dot(d.b_bar.row(j)) * decay(d, i + 1, j - 1);
            if (j == i) m(i, j) = dd;
        }
    return m;
}

std::size_t numerical_rank(const Matrix& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double tol = std::max(m.rows(), m.cols()) * 1e-12 * s(0);
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > tol ? 1 : 0;
    return r;
}

Outcome from_checker(const verify::Checker& c, const std::string& what) {
    if (!c.passed()) return {false, what + ": " + c.first_failure()};
    return {true, fmt("%s, %zu checks, worst err/tol %.3g", what.c_str(), c.checks(), c.worst_ratio())};
}

RunConfig load(const char* name) { return load_config(std::string(HTH_SOURCE_DIR) + "/configs/" + name); }

Outcome criterion1() {
    const auto t0 = Clock::now();
    Rng rng(101);
    verify::Checker c;
    for (int i = 0; i < 60; ++i) {
        const std::size_t T = pick(rng, 1, 64), N = pick(rng, 1, 8), P = pick(rng, 1, 4);
        const auto p = random_step(rng, T, N);
        const auto d = ssd::discretize(p);
        const Matrix x = normal_matrix(rng, T, P);
        const Matrix want = causal_oracle(d, p.c_out, x);
        const std::string tag = fmt("instance %d T=%zu N=%zu", i, T, N);
        c.within(rel(ssd::ssm_recurrence(d, p.c_out, x), want), 1e-8, "recurrence, " + tag);
        c.within(rel(ssd::materialize_matrix(d, p.c_out) * x, want), 1e-8, "matrix form, " + tag);
        c.within(rel(ssd::chunked_scan(d, p.c_out, x, pick(rng, 1, T)), want), 1e-8, "chunked scan, " + tag);
    }
    verify::ssd_equivalence(c);
    const double s = seconds_since(t0);
    c.expect(s < 30.0, "runtime under 30 s");
    return from_checker(c, "60 random instances plus the ssd suite");
}

Outcome criterion2() {
    Rng rng(202);
    verify::Checker c;
    {
        ssd::DiscretizedParams d{Vector::Ones(3), Matrix::Ones(3, 1)};
        Matrix x(3, 1), want(3, 1);
        x << 1, 2, 3;
        want << 5, 4, 3;
        c.within(rel(hydra::value_path(d, Matrix::Ones(3, 1), x, 0.0), want), 1e-15, "degenerate [5,4,3]");
        c.within(rel(qs_oracle(d, Matrix::Ones(3, 1), 0.0) * x, want), 1e-15, "degenerate oracle [5,4,3]");
    }
    for (int i = 0; i < 60; ++i) {
        const std::size_t T = i == 0 ? 1 : pick(rng, 1, 48), N = pick(rng, 1, 8), P = pick(rng, 1, 4);
        const auto p = random_step(rng, T, N);
        const auto d = ssd::discretize(p);
        const double dd = rng.normal();
        const Matrix x = normal_matrix(rng, T, P);
        const Matrix oracle = qs_oracle(d, p.c_out, dd);
        const Matrix want = oracle * x;
        const std::string tag = fmt("instance %d T=%zu", i, T);
        c.within(rel(hydra::materialize_qs(d, p.c_out, dd), oracle), 1e-12, "materialized matrix, " + tag);
        c.within(rel(hydra::value_path(d, p.c_out, x, dd, hydra::Combine::kQuasiseparable, pick(rng, 1, T)), want),
                 1e-8, "value path, " + tag);
    }
    verify::quasiseparable(c);
    return from_checker(c, "60 random instances, [5,4,3] and the quasiseparable suite");
}

Outcome criterion3() {
    Rng rng(303);
    verify::Checker c;
    for (std::size_t T = 2; T <= 16; ++T)
        for (std::size_t N = 1; N <= 4; ++N) {
            const auto p = random_step(rng, T, N);
            const auto d = ssd::discretize(p);
            const Matrix ss = ssd::materialize_matrix(d, p.c_out);
            const Matrix qs = hydra::materialize_qs(d, p.c_out, rng.normal());
            for (std::size_t k = 1; k < T; ++k) {
                const auto ki = static_cast<Eigen::Index>(k), Ti = static_cast<Eigen::Index>(T);
                for (const Matrix& block : {Matrix(ss.bottomLeftCorner(Ti - ki, ki)), Matrix(qs.bottomLeftCorner(Ti - ki, ki)),
                                            Matrix(qs.topRightCorner(ki, Ti - ki))}) {
                    const std::size_t r = numerical_rank(block);
                    c.expect(r <= N, fmt("off-diagonal block rank %zu > N=%zu at T=%zu split %zu", r, N, T, k));
                }
            }
        }
    verify::ssd_structure(c);
    return from_checker(c, "every split of T=2..16, N=1..4");
}

Outcome criterion4() {
    const auto t0 = Clock::now();
    verify::Checker ops, model;
    verify::op_gradients(ops);
    verify::model_gradient(model);
    const double s = seconds_since(t0);
    if (!ops.passed()) return {false, "per-op: " + ops.first_failure()};
    if (!model.passed()) return {false, "model: " + model.first_failure()};
    if (s >= 300.0) return {false, fmt("runtime %.1f s", s)};
    return {true, fmt("%zu per-op checks (worst err/tol %.3g), 11-block model worst err/tol %.3g", ops.checks(),
                      ops.worst_ratio(), model.worst_ratio())};
}

Outcome criterion5() {
    Rng rng(505);
    verify::Checker c;
    using scan::Pattern;
    const Pattern all[] = {Pattern::kH, Pattern::kV, Pattern::kTH, Pattern::kTV, Pattern::kHT, Pattern::kVT};
    for (int i = 0; i < 200; ++i) {
        const scan::Grid g{pick(rng, 1, 5), pick(rng, 1, 9), pick(rng, 1, 9)};
        for (Pattern p : all) {
            const auto plan = scan::build_plan(p, g);
            std::vector<bool> seen(g.size(), false);
            bool ok = plan.perm.size() == g.size();
            for (std::size_t k = 0; ok && k < plan.perm.size(); ++k) {
                ok = plan.perm[k] < g.size() && !seen[plan.perm[k]] && plan.inv_perm[plan.perm[k]] == k;
                if (ok) seen[plan.perm[k]] = true;
            }
            c.expect(ok, fmt("%s is a bijection on %s", std::string(scan::to_string(p)).c_str(),
                             scan::to_string(g).c_str()));
        }
        const scan::Grid img{1, g.height, g.width};
        auto perm = [&](Pattern p) { return scan::build_plan(p, img).perm; };
        c.expect(perm(Pattern::kTH) == perm(Pattern::kH) && perm(Pattern::kHT) == perm(Pattern::kH) &&
                     perm(Pattern::kTV) == perm(Pattern::kV) && perm(Pattern::kVT) == perm(Pattern::kV),
                 "T=1 reductions on " + scan::to_string(img));
    }
    for (std::size_t n : {11, 22, 33}) {
        const auto s1 = scan::build_schedule(n, 1), s2 = scan::build_schedule(n, 2);
        c.expect(s1.count(MixerKind::kHydra) == 10 * n / 11 && s1.count(MixerKind::kAttention) == n / 11,
                 "10:1 per set");
        std::size_t temporal = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (auto p = s2.pattern(i)) temporal += scan::is_temporal_major(*p) ? 1 : 0;
        c.expect(temporal * 10 == 4 * s2.count(MixerKind::kHydra), fmt("40%% temporal-major at n=%zu", n));
        if (n == 33)
            c.expect(s2.count(MixerKind::kHydra) == 30 && s2.count(MixerKind::kAttention) == 3, "30:3 at n=33");
    }
    verify::scan_plans(c);
    return from_checker(c, "200 random grids, T=1 reductions, schedules at 11/22/33");
}

Outcome criterion6() {
    verify::Checker c;
    verify::stage_equivalence(c);
    return from_checker(c, "stage 2 == stage 1 on single frames at rel 1e-12");
}

Outcome criterion7() {
    const auto t0 = Clock::now();
    std::vector<bench::BenchRecord> records;
    for (std::size_t e = 10; e <= 16; ++e) records.push_back(bench::bench_mixer(MixerKind::kHydra, std::size_t{1} << e, {}));
    for (std::size_t e = 10; e <= 14; ++e)
        records.push_back(bench::bench_mixer(MixerKind::kAttention, std::size_t{1} << e, {}));
    std::ofstream("acceptance_bench.csv") << [&] {
        std::ostringstream s;
        bench::write_csv(s, records);
        return s.str();
    }();
    const double hs = bench::loglog_slope(records, "hydra", 1 << 10, 1 << 16);
    const double as = bench::loglog_slope(records, "attention", 1 << 10, 1 << 14);
    const auto measured = bench::crossover(records, "hydra", "attention");
    const auto fitted = bench::fitted_crossover(records, "hydra", "attention");
    const double s = seconds_since(t0);
    std::string detail = fmt("hydra slope %.3f, attention slope %.3f, crossover measured %s, fitted %s tokens", hs, as,
                             measured ? std::to_string(*measured).c_str() : "none",
                             fitted ? fmt("%.0f", *fitted).c_str() : "none");
    const bool ok = hs <= 1.3 && as >= 1.7 && measured.has_value() && s < 900.0;
    return {ok, detail};
}

Outcome criterion8() {
    const auto t0 = Clock::now();
    RunConfig cfg = load("overfit.cfg");
    Trainer tr(cfg);
    double ratio = 1.0;
    while (tr.steps_done() < 2000) {
        for (int i = 0; i < 100; ++i) tr.step();
        const auto e = tr.evaluate_train();
        ratio = e.loss / e.zero_loss;
        if (ratio < 0.1) break;
    }
    const double train_s = seconds_since(t0);
    std::string detail = fmt("overfit ratio %.4f after %zu steps in %.0f s", ratio, tr.steps_done(), train_s);
    bool ok = ratio < 0.1 && train_s < 1200.0;

    // A constant field eps - x0 carries eps to x0 in any number of steps.
    Rng rng(808);
    const Tensor x0 = rng.normal_tensor({2, 1, 4, 4, 3}), eps = rng.normal_tensor({2, 1, 4, 4, 3});
    const Tensor v = diffusion::velocity_target(x0, eps);
    double worst = 0.0;
    for (std::size_t steps : {1, 2, 7, 50}) {
        const Tensor x = diffusion::sample([&](const Tensor&, double, bool) { return v; }, eps, steps, 1.0);
        worst = std::max(worst, max_relative_error(x, x0));
    }
    ok = ok && worst <= 1e-12;
    detail += fmt(", constant-field recovery %.2g", worst);

    // Guidance is affine on the trained model.
    const HthModel& model = tr.model();
    const Tensor noise = rng.normal_tensor({2, 1, 8, 8, cfg.model.latent_channels});
    const std::vector<double> t{0.3, 0.8};
    const std::vector<std::size_t> cond{1, 5}, uncond(2, model.null_label());
    const Tensor vc = model.denoise(noise, t, cond), vu = model.denoise(noise, t, uncond);
    const double cfg_err = max_abs(diffusion::guided_velocity(vc, vu, 2.0) - (2.0 * vc - vu));
    ok = ok && cfg_err <= 1e-10;
    detail += fmt(", CFG v(2) - (2 v(1) - v(0)) = %.2g", cfg_err);
    return {ok, detail};
}

Outcome criterion9() {
    const RunConfig cfg = load("compare.cfg");
    const MixerKind all[] = {MixerKind::kCausalSsm, MixerKind::kAdditiveSsm, MixerKind::kHydra, MixerKind::kAttention};
    const CompareReport report = compare_mixers(cfg, all, verify::thread_budget());
    std::ofstream("acceptance_compare.txt") << report.to_text();
    bool finite = true;
    double bidi = 0.0;
    for (const auto& r : report.rows) {
        finite = finite && std::isfinite(r.final_train_loss) && std::isfinite(r.heldout_loss) && std::isfinite(r.asymmetry);
        if (r.kind != MixerKind::kCausalSsm) bidi = std::max(bidi, r.asymmetry);
    }
    const double causal = report.find(MixerKind::kCausalSsm).asymmetry;
    const double h = report.find(MixerKind::kHydra).heldout_loss, a = report.find(MixerKind::kAdditiveSsm).heldout_loss;
    std::string detail = fmt("asymmetry causal %.3f, additive %.3f, hydra %.3f, attention %.3f; "
                             "hydra heldout %.4g %s additive %.4g (recorded)",
                             causal, report.find(MixerKind::kAdditiveSsm).asymmetry,
                             report.find(MixerKind::kHydra).asymmetry, report.find(MixerKind::kAttention).asymmetry, h,
                             h <= a ? "<=" : ">", a);
    return {finite && causal >= 2.0 * bidi, detail};
}

Outcome criterion10() {
    RunConfig cfg = load("compare.cfg");
    cfg.train.steps = 150;
    Trainer tr(cfg);
    for (std::size_t i = 0; i < cfg.train.steps; ++i) tr.step();
    const auto trained = tr.model().config().token_grid();
    const scan::Grid big{1, 2 * cfg.model.latent.height, 2 * cfg.model.latent.width};
    Rng rng(1010);
    const Tensor init = rng.normal_tensor({2, big.frames, big.height, big.width, cfg.model.latent_channels});
    const std::vector<std::size_t> labels{0, 3};
    const Tensor x = diffusion::sample(tr.model(), init, labels, cfg.diffusion);
    const auto grid = tr.model().config().token_grid_for(big);
    bool ok = x.shape() == init.shape() && x.all_finite() && trained.height == 8 && trained.width == 8 &&
              grid.height == 16 && grid.width == 16;
    std::string detail = fmt("trained on %s tokens, sampled %s tokens, output %s, finite %s",
                             scan::to_string(trained).c_str(), scan::to_string(grid).c_str(),
                             shape_string(x.shape()).c_str(), x.all_finite() ? "yes" : "no");

    // Halving the step size barely moves samples on the training grid.
    const Tensor small = rng.normal_tensor({2, 1, cfg.model.latent.height, cfg.model.latent.width, cfg.model.latent_channels});
    diffusion::DiffusionConfig fine = cfg.diffusion;
    fine.sample_steps *= 2;
    const Tensor a = diffusion::sample(tr.model(), small, labels, cfg.diffusion);
    const Tensor b = diffusion::sample(tr.model(), small, labels, fine);
    const double change = l2_norm(a - b) / l2_norm(b);
    ok = ok && change < 0.05;
    detail += fmt(", %zu vs %zu sampler steps differ by %.2f%%", cfg.diffusion.sample_steps, fine.sample_steps, 100 * change);
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9, criterion10};
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(n)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s  %s  (%.1fs)\n", n, o.passed ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    return failed ? 1 : 0;
}
