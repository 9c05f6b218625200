// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scan orders over (T, H, W) token grids and the per-block mixer schedule.
//
// Tokens are stored canonically in (t, h, w) row-major order. A ScanPlan is
// a permutation `perm` with sequence[i] = grid[perm[i]]:
//
//   H   w fastest, then h, then t        (frame-by-frame horizontal raster)
//   V   h fastest, then w, then t        (frame-by-frame vertical raster)
//   HT  same order as H, tagged as the spatial-major scan of a video stage
//   VT  same order as V, likewise
//   TH  t fastest, then w, then h        (temporal-major, horizontal)
//   TV  t fastest, then h, then w        (temporal-major, vertical)

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hth/autodiff.hpp"
#include "hth/weights.hpp"

namespace hth::scan {

enum class Pattern { kH, kV, kTH, kTV, kHT, kVT };

std::string_view to_string(Pattern p);
/// Accepts "H", "V", "TH", "TV", "HT", "VT".
Pattern parse_pattern(std::string_view s);
bool is_temporal_major(Pattern p);

struct Grid {
    std::size_t frames = 1;
    std::size_t height = 1;
    std::size_t width = 1;

    std::size_t size() const { return frames * height * width; }
    std::size_t index(std::size_t t, std::size_t h, std::size_t w) const { return (t * height + h) * width + w; }
    bool operator==(const Grid&) const = default;
};

std::string to_string(const Grid& g);

struct ScanPlan {
    Pattern pattern;
    Grid grid;
    std::vector<std::size_t> perm;      // scan position -> canonical index
    std::vector<std::size_t> inv_perm;  // canonical index -> scan position
};

ScanPlan build_plan(Pattern pattern, Grid grid);

/// tokens [grid.size(), C] canonical -> [grid.size(), C] in scan order.
Tensor gather(const ScanPlan& plan, const Tensor& tokens);
/// Inverse of gather.
Tensor scatter(const ScanPlan& plan, const Tensor& sequence);
Var gather(const ScanPlan& plan, const Var& tokens);
Var scatter(const ScanPlan& plan, const Var& sequence);

inline constexpr std::size_t kSetSize = 11;
inline constexpr std::size_t kHydraPerSet = 10;

struct ScheduleEntry {
    MixerKind kind = MixerKind::kHydra;
    std::optional<Pattern> stage1;  // empty for attention blocks
    std::optional<Pattern> stage2;
};

struct MixerSchedule {
    int stage = 1;
    std::vector<ScheduleEntry> blocks;

    /// Active pattern of block i for this schedule's stage.
    std::optional<Pattern> pattern(std::size_t i) const;
    std::size_t count(MixerKind kind) const;
    /// e.g. "H,V,H,V,H,V,H,V,H,V,attn"
    std::string describe() const;
};

/// n_blocks must be a positive multiple of 11; stage is 1 or 2.
MixerSchedule build_schedule(std::size_t n_blocks, int stage);

}  // namespace hth::scan
