// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference checks of recorded gradients.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hth/autodiff.hpp"
#include "hth/random.hpp"

namespace hth::gradcheck {

inline constexpr double kStep = 1e-4;

/// Maps a list of inputs to an output of any shape.
using Fn = std::function<Var(std::span<const Var>)>;

enum class Scale {
    /// Each input is scaled by its own largest numeric derivative.
    kPerInput,
    /// One scale for all inputs. Suited to sampled checks over many tensors,
    /// where some inputs may only have entries whose true derivative is zero.
    kGlobal,
};

struct Result {
    /// max |analytic - numeric| / max |numeric| over the checked entries,
    /// worst over inputs for kPerInput.
    double rel_error = 0.0;
    std::size_t checked = 0;
};

/// Reduces f to a scalar with a fixed random projection, then compares the
/// tape gradient of every input entry against central differences. When
/// `sample` is below 1, only that fraction of entries (at least one per
/// input) is perturbed.
Result check(const Fn& f, std::span<const Tensor> inputs, Rng& rng, double sample = 1.0,
             Scale scale = Scale::kPerInput, double step = kStep);

}  // namespace hth::gradcheck
