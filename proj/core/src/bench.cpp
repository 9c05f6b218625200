// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/bench.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hth/attention.hpp"
#include "hth/config.hpp"
#include "hth/hydra.hpp"

namespace hth::bench {

namespace {

std::function<Tensor(const Tensor&)> make_mixer(MixerKind kind, std::size_t dim, Rng& rng) {
    if (kind == MixerKind::kAttention) {
        attention::AttentionConfig cfg{.model_dim = dim, .heads = 2};
        auto w = constants(attention::init_params(cfg, rng, false));
        return [cfg, w](const Tensor& x) { return attention::self_attention(w, cfg, Var::constant(x)).value(); };
    }
    hydra::HydraConfig cfg;
    cfg.model_dim = dim;
    cfg.heads = 2;
    cfg.head_dim = dim;
    cfg.combine = kind == MixerKind::kCausalSsm     ? hydra::Combine::kCausal
                  : kind == MixerKind::kAdditiveSsm ? hydra::Combine::kAdditive
                                                    : hydra::Combine::kQuasiseparable;
    auto w = hydra::init_params(cfg, rng, {.zero_out_proj = false});
    return [cfg, w](const Tensor& x) { return hydra::hydra_apply(w, cfg, x); };
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

}  // namespace

BenchRecord bench_mixer(MixerKind kind, std::size_t tokens, const BenchOptions& opts) {
    if (opts.reps < kMinReps) throw std::invalid_argument("bench: at least 5 repetitions are required");
    if (tokens == 0) throw std::invalid_argument("bench: tokens must be positive");
    Rng rng(opts.seed);
    const auto mixer = make_mixer(kind, opts.model_dim, rng);
    const Tensor x = rng.normal_tensor({tokens, opts.model_dim});
    double sink = 0.0;
    for (std::size_t i = 0; i < opts.warmup; ++i) sink += mixer(x)[0];
    std::vector<double> ms;
    for (std::size_t i = 0; i < opts.reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor y = mixer(x);
        const auto t1 = std::chrono::steady_clock::now();
        sink += y[0];
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    if (!std::isfinite(sink)) throw NonFiniteError("bench: mixer produced non-finite output");
    double mean = 0.0;
    for (double v : ms) mean += v;
    mean /= static_cast<double>(ms.size());
    double var = 0.0;
    for (double v : ms) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ms.size() - 1);
    return {std::string(mixer_name(kind)), tokens, mean, std::sqrt(var), opts.reps};
}

std::string csv_header() { return "mixer,tokens,ms_mean,ms_std,reps"; }

void write_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << csv_header() << '\n';
    for (const auto& r : records)
        out << r.mixer << ',' << r.tokens << ',' << fmt(r.ms_mean) << ',' << fmt(r.ms_std) << ',' << r.reps << '\n';
}

std::vector<BenchRecord> parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) throw std::invalid_argument("bench csv: bad header");
    std::vector<BenchRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell[5];
        for (auto& c : cell)
            if (!std::getline(row, c, ',')) throw std::invalid_argument("bench csv: short row '" + line + "'");
        BenchRecord r;
        r.mixer = cell[0];
        r.tokens = std::stoull(cell[1]);
        r.ms_mean = std::stod(cell[2]);
        r.ms_std = std::stod(cell[3]);
        r.reps = std::stoull(cell[4]);
        out.push_back(std::move(r));
    }
    return out;
}

LogLogFit loglog_fit(std::span<const BenchRecord> records, std::string_view mixer, std::size_t lo, std::size_t hi) {
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (r.mixer != mixer || r.tokens < lo || r.tokens > hi) continue;
        xs.push_back(std::log(static_cast<double>(r.tokens)));
        ys.push_back(std::log(r.ms_mean));
    }
    if (xs.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points for " + std::string(mixer));
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: token counts are all equal");
    return {sxy / sxx, my - sxy / sxx * mx};
}

double loglog_slope(std::span<const BenchRecord> records, std::string_view mixer, std::size_t lo, std::size_t hi) {
    return loglog_fit(records, mixer, lo, hi).slope;
}

std::optional<std::size_t> crossover(std::span<const BenchRecord> records, std::string_view fast, std::string_view slow) {
    std::map<std::size_t, double> a, b;
    for (const auto& r : records) {
        if (r.mixer == fast) a[r.tokens] = r.ms_mean;
        if (r.mixer == slow) b[r.tokens] = r.ms_mean;
    }
    for (const auto& [t, ms] : a) {
        const auto it = b.find(t);
        if (it != b.end() && ms < it->second) return t;
    }
    return std::nullopt;
}

std::optional<double> fitted_crossover(std::span<const BenchRecord> records, std::string_view a, std::string_view b) {
    const LogLogFit fa = loglog_fit(records, a, 0, SIZE_MAX), fb = loglog_fit(records, b, 0, SIZE_MAX);
    if (std::abs(fa.slope - fb.slope) < 1e-9) return std::nullopt;
    return std::exp((fb.intercept - fa.intercept) / (fa.slope - fb.slope));
}

}  // namespace hth::bench
