// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "hth/tensor.hpp"

namespace hth {

/// Seeded generator. Every stochastic choice in the library draws from one
/// of these; sub-streams are derived with `fork` so that, e.g., the noise of
/// training step k does not depend on how many draws earlier steps made.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent stream keyed by (seed, key).
    Rng fork(std::uint64_t key) const;

    double uniform(double lo = 0.0, double hi = 1.0);
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Normal truncated to +-2 standard deviations.
    double truncated_normal(double stddev);
    std::uint64_t below(std::uint64_t n);

    Tensor normal_tensor(Tensor::Shape shape, double stddev = 1.0);
    Tensor truncated_normal_tensor(Tensor::Shape shape, double stddev);
    Tensor uniform_tensor(Tensor::Shape shape, double lo, double hi);

    std::mt19937_64& engine() { return engine_; }

   private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hth
