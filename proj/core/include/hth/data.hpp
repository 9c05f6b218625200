// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural latent grids with class labels standing in for prompts.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hth/random.hpp"
#include "hth/scan.hpp"

namespace hth::data {

/// Eight classes:
///   0, 1  horizontal / vertical gradient
///   2, 3  diagonal / anti-diagonal gradient
///   4, 5  fine / coarse checkerboard
///   6, 7  blob moving right / down across frames
/// Every sample draws a random amplitude and phase, so within-class
/// variation has to be read off the grid itself.
inline constexpr std::size_t kClasses = 8;

struct Sample {
    Tensor latents;  // [T, H, W, C]
    std::size_t label;
};

struct DataSpec {
    scan::Grid latent{1, 8, 8};
    std::size_t channels = 4;
    std::size_t n_classes = kClasses;  // labels drawn from [0, n_classes)
};

Sample make_sample(const DataSpec& spec, std::size_t label, Rng& rng);

/// `count` samples cycling through the labels.
std::vector<Sample> make_dataset(const DataSpec& spec, std::size_t count, Rng& rng);

/// Stacks samples[indices[i]] into [B, T, H, W, C].
Tensor stack(std::span<const Sample> samples, std::span<const std::size_t> indices);
std::vector<std::size_t> labels_of(std::span<const Sample> samples, std::span<const std::size_t> indices);

}  // namespace hth::data
