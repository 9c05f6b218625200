// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Wall-time scaling of single mixer forwards over sequence length.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hth/weights.hpp"

namespace hth::bench {

inline constexpr std::size_t kMinReps = 5;

struct BenchRecord {
    std::string mixer;
    std::size_t tokens = 0;
    double ms_mean = 0.0;
    double ms_std = 0.0;
    std::size_t reps = 0;

    bool operator==(const BenchRecord&) const = default;
};

struct BenchOptions {
    std::size_t model_dim = 64;
    std::size_t reps = kMinReps;
    std::size_t warmup = 1;  // untimed runs before the timed ones
    std::uint64_t seed = 0;
};

/// Times `reps` forwards of a freshly initialized mixer on a random
/// [tokens, model_dim] input.
BenchRecord bench_mixer(MixerKind kind, std::size_t tokens, const BenchOptions& opts);

std::string csv_header();
void write_csv(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> parse_csv(std::string_view text);

/// Least-squares slope of log(ms_mean) against log(tokens) for one mixer,
/// restricted to tokens in [lo, hi]. Needs two distinct token counts.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;  // log(ms) at log(tokens) = 0
};

/// Least-squares fit of log(ms_mean) against log(tokens) over lo <= tokens <= hi.
LogLogFit loglog_fit(std::span<const BenchRecord> records, std::string_view mixer, std::size_t lo, std::size_t hi);
double loglog_slope(std::span<const BenchRecord> records, std::string_view mixer, std::size_t lo, std::size_t hi);

/// Smallest token count measured for both mixers at which `fast` beats `slow`.
std::optional<std::size_t> crossover(std::span<const BenchRecord> records, std::string_view fast, std::string_view slow);

/// Token count where the two fitted power laws intersect; empty when the
/// slopes agree to 1e-9. May lie outside the measured range.
std::optional<double> fitted_crossover(std::span<const BenchRecord> records, std::string_view a, std::string_view b);

}  // namespace hth::bench
