// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/scan.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "hth/ops.hpp"

namespace hth::scan {

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::kH: return "H";
        case Pattern::kV: return "V";
        case Pattern::kTH: return "TH";
        case Pattern::kTV: return "TV";
        case Pattern::kHT: return "HT";
        case Pattern::kVT: return "VT";
    }
    return "?";
}

Pattern parse_pattern(std::string_view s) {
    for (Pattern p : {Pattern::kH, Pattern::kV, Pattern::kTH, Pattern::kTV, Pattern::kHT, Pattern::kVT}) {
        if (to_string(p) == s) return p;
    }
    throw std::invalid_argument("unknown scan pattern '" + std::string(s) + "'");
}

bool is_temporal_major(Pattern p) { return p == Pattern::kTH || p == Pattern::kTV; }

std::string to_string(const Grid& g) {
    return std::to_string(g.frames) + "x" + std::to_string(g.height) + "x" + std::to_string(g.width);
}

ScanPlan build_plan(Pattern pattern, Grid grid) {
    if (grid.frames == 0 || grid.height == 0 || grid.width == 0) {
        throw std::invalid_argument("build_plan: zero-sized grid " + to_string(grid));
    }
    ScanPlan plan{pattern, grid, {}, {}};
    plan.perm.reserve(grid.size());
    const auto& [T, H, W] = std::array{grid.frames, grid.height, grid.width};
    switch (pattern) {
        case Pattern::kH:
        case Pattern::kHT:
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t h = 0; h < H; ++h)
                    for (std::size_t w = 0; w < W; ++w) plan.perm.push_back(grid.index(t, h, w));
            break;
        case Pattern::kV:
        case Pattern::kVT:
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t w = 0; w < W; ++w)
                    for (std::size_t h = 0; h < H; ++h) plan.perm.push_back(grid.index(t, h, w));
            break;
        case Pattern::kTH:
            for (std::size_t h = 0; h < H; ++h)
                for (std::size_t w = 0; w < W; ++w)
                    for (std::size_t t = 0; t < T; ++t) plan.perm.push_back(grid.index(t, h, w));
            break;
        case Pattern::kTV:
            for (std::size_t w = 0; w < W; ++w)
                for (std::size_t h = 0; h < H; ++h)
                    for (std::size_t t = 0; t < T; ++t) plan.perm.push_back(grid.index(t, h, w));
            break;
    }
    plan.inv_perm.assign(plan.perm.size(), 0);
    for (std::size_t i = 0; i < plan.perm.size(); ++i) plan.inv_perm[plan.perm[i]] = i;
    return plan;
}

namespace {

void check_rows(const ScanPlan& plan, std::size_t rows) {
    if (rows != plan.grid.size()) {
        throw ShapeError("scan: " + std::to_string(rows) + " tokens do not match grid " + to_string(plan.grid));
    }
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& index) {
    const std::size_t C = x.cols();
    Tensor out({index.size(), C});
    for (std::size_t i = 0; i < index.size(); ++i) {
        std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(index[i] * C), C,
                    out.data().begin() + static_cast<std::ptrdiff_t>(i * C));
    }
    return out;
}

}  // namespace

Tensor gather(const ScanPlan& plan, const Tensor& tokens) {
    check_rows(plan, tokens.rows());
    return permute_rows(tokens, plan.perm);
}

Tensor scatter(const ScanPlan& plan, const Tensor& sequence) {
    check_rows(plan, sequence.rows());
    return permute_rows(sequence, plan.inv_perm);
}

Var gather(const ScanPlan& plan, const Var& tokens) {
    check_rows(plan, tokens.rows());
    return ops::gather_rows(tokens, plan.perm);
}

Var scatter(const ScanPlan& plan, const Var& sequence) {
    check_rows(plan, sequence.rows());
    return ops::gather_rows(sequence, plan.inv_perm);
}

std::optional<Pattern> MixerSchedule::pattern(std::size_t i) const {
    const auto& e = blocks.at(i);
    return stage == 1 ? e.stage1 : e.stage2;
}

std::size_t MixerSchedule::count(MixerKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(blocks.begin(), blocks.end(), [&](const ScheduleEntry& e) { return e.kind == kind; }));
}

std::string MixerSchedule::describe() const {
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += ',';
        const auto p = pattern(i);
        out += p ? std::string(to_string(*p)) : std::string("attn");
    }
    return out;
}

MixerSchedule build_schedule(std::size_t n_blocks, int stage) {
    if (n_blocks == 0 || n_blocks % kSetSize != 0) {
        throw std::invalid_argument("build_schedule: block count must be a positive multiple of 11, got " +
                                    std::to_string(n_blocks));
    }
    if (stage != 1 && stage != 2) throw std::invalid_argument("build_schedule: stage must be 1 or 2");
    // positions within each set whose stage-2 scan is temporal-major
    constexpr std::array<Pattern, kHydraPerSet> kStage2 = {Pattern::kHT, Pattern::kVT, Pattern::kTH, Pattern::kTV,
                                                           Pattern::kHT, Pattern::kVT, Pattern::kTH, Pattern::kTV,
                                                           Pattern::kHT, Pattern::kVT};
    MixerSchedule s;
    s.stage = stage;
    s.blocks.reserve(n_blocks);
    for (std::size_t i = 0; i < n_blocks; ++i) {
        const std::size_t pos = i % kSetSize;
        ScheduleEntry e;
        if (pos == kHydraPerSet) {
            e.kind = MixerKind::kAttention;
        } else {
            e.kind = MixerKind::kHydra;
            e.stage1 = pos % 2 == 0 ? Pattern::kH : Pattern::kV;
            e.stage2 = kStage2[pos];
        }
        s.blocks.push_back(e);
    }
    return s;
}

}  // namespace hth::scan
