// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trains equally sized toy models that differ only in the token mixer and
// reports their losses plus a causality probe: the ratio of held-out error
// on the first token of the H scan to that on the last one. Both are
// corners, and the first token comes first in the V scan as well, so a
// causal mixer sees no context there at any depth and the ratio grows well
// above 1; a bidirectional mixer stays near 1.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hth/train.hpp"

namespace hth {

struct MixerResult {
    MixerKind kind = MixerKind::kHydra;
    double final_train_loss = 0.0;  // evaluated, not the last batch loss
    double heldout_loss = 0.0;
    double heldout_zero_loss = 0.0;
    double asymmetry = 0.0;
    std::vector<double> token_error;
};

struct CompareReport {
    std::vector<MixerResult> rows;

    const MixerResult& find(MixerKind kind) const;
    /// Human-readable table plus the derived findings.
    std::string to_text() const;
};

/// token_error.front() / token_error.back().
double asymmetry_ratio(std::span<const double> token_error);

/// Progress sink: (mixer, step, batch loss).
using ProgressFn = std::function<void(MixerKind, std::size_t, double)>;

/// Every model uses `base` with its mixer swapped in and the per-set
/// attention slot disabled, so each one mixes tokens only through the
/// mixer under test. Up to `threads` models train concurrently.
CompareReport compare_mixers(const RunConfig& base, std::span<const MixerKind> mixers, std::size_t threads = 1,
                             const ProgressFn& progress = {});

}  // namespace hth
