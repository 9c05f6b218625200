// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/random.hpp"

#include <cmath>

namespace hth {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::fork(std::uint64_t key) const { return Rng(splitmix64(seed_ ^ splitmix64(key + 0x51ed2701ULL))); }

double Rng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

double Rng::normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }

double Rng::truncated_normal(double stddev) {
    for (;;) {
        const double v = normal();
        if (std::abs(v) <= 2.0) return v * stddev;
    }
}

std::uint64_t Rng::below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

Tensor Rng::normal_tensor(Tensor::Shape shape, double stddev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = normal(0.0, stddev);
    return t;
}

Tensor Rng::truncated_normal_tensor(Tensor::Shape shape, double stddev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = truncated_normal(stddev);
    return t;
}

Tensor Rng::uniform_tensor(Tensor::Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = uniform(lo, hi);
    return t;
}

}  // namespace hth
