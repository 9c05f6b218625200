// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "hth/random.hpp"
#include "hth/scan.hpp"

using namespace hth;
using namespace hth::scan;

namespace {
constexpr Pattern kAll[] = {Pattern::kH, Pattern::kV, Pattern::kTH, Pattern::kTV, Pattern::kHT, Pattern::kVT};
}

TEST(ScanPlan, HandPermutations) {
    const Grid g{1, 2, 3};
    EXPECT_EQ(build_plan(Pattern::kH, g).perm, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(build_plan(Pattern::kV, g).perm, (std::vector<std::size_t>{0, 3, 1, 4, 2, 5}));
    const Grid v{2, 1, 2};
    EXPECT_EQ(build_plan(Pattern::kTH, v).perm, (std::vector<std::size_t>{0, 2, 1, 3}));
    EXPECT_EQ(build_plan(Pattern::kHT, v).perm, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(ScanPlan, BijectiveOnRandomGrids) {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const Grid g{1 + rng.below(4), 1 + rng.below(6), 1 + rng.below(6)};
        for (Pattern p : kAll) {
            const auto plan = build_plan(p, g);
            auto sorted = plan.perm;
            std::sort(sorted.begin(), sorted.end());
            std::vector<std::size_t> iota(g.size());
            std::iota(iota.begin(), iota.end(), 0);
            ASSERT_EQ(sorted, iota);
            for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(plan.inv_perm[plan.perm[k]], k);
        }
    }
}

TEST(ScanPlan, GatherScatterRoundTrip) {
    Rng rng(2);
    const Grid g{2, 3, 4};
    const Tensor x = rng.normal_tensor({g.size(), 5});
    for (Pattern p : kAll) {
        const auto plan = build_plan(p, g);
        EXPECT_EQ(scatter(plan, gather(plan, x)), x);
        EXPECT_EQ(scatter(plan, gather(plan, Var::constant(x))).value(), x);
    }
    EXPECT_THROW(gather(build_plan(Pattern::kH, g), rng.normal_tensor({g.size() + 1, 5})), ShapeError);
}

TEST(ScanPlan, SingleFrameReductions) {
    for (std::size_t h = 1; h <= 5; ++h)
        for (std::size_t w = 1; w <= 5; ++w) {
            const Grid g{1, h, w};
            EXPECT_EQ(build_plan(Pattern::kTH, g).perm, build_plan(Pattern::kH, g).perm);
            EXPECT_EQ(build_plan(Pattern::kHT, g).perm, build_plan(Pattern::kH, g).perm);
            EXPECT_EQ(build_plan(Pattern::kTV, g).perm, build_plan(Pattern::kV, g).perm);
            EXPECT_EQ(build_plan(Pattern::kVT, g).perm, build_plan(Pattern::kV, g).perm);
        }
}

TEST(ScanPlan, TemporalMajorKeepsTimeAdjacent) {
    const Grid g{3, 2, 2};
    const auto plan = build_plan(Pattern::kTH, g);
    for (std::size_t k = 0; k + 1 < plan.perm.size(); ++k)
        if ((k + 1) % g.frames != 0) {
            EXPECT_EQ(plan.perm[k + 1] - plan.perm[k], g.height * g.width);
        }
}

TEST(ScanPlan, ZeroGridThrows) { EXPECT_THROW(build_plan(Pattern::kH, Grid{0, 2, 2}), std::invalid_argument); }

TEST(ScanPlan, PatternNames) {
    for (Pattern p : kAll) EXPECT_EQ(parse_pattern(to_string(p)), p);
    EXPECT_THROW(parse_pattern("D"), std::invalid_argument);
}

TEST(Schedule, SetComposition) {
    for (std::size_t n : {11u, 22u, 33u})
        for (int stage : {1, 2}) {
            const auto s = build_schedule(n, stage);
            ASSERT_EQ(s.blocks.size(), n);
            EXPECT_EQ(s.count(MixerKind::kHydra), n / 11 * 10);
            EXPECT_EQ(s.count(MixerKind::kAttention), n / 11);
            for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(s.pattern(i).has_value(), i % 11 != 10);
        }
    EXPECT_EQ(build_schedule(11, 1).describe(), "H,V,H,V,H,V,H,V,H,V,attn");
}

TEST(Schedule, StageTwoTemporalFraction) {
    const auto s = build_schedule(33, 2);
    std::size_t temporal = 0, hydra = 0;
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        if (!s.pattern(i)) continue;
        ++hydra;
        temporal += is_temporal_major(*s.pattern(i)) ? 1 : 0;
    }
    EXPECT_EQ(hydra, 30u);
    EXPECT_EQ(temporal * 10, hydra * 4);
}

TEST(Schedule, StagesShareSpatialOrder) {
    const auto s1 = build_schedule(22, 1), s2 = build_schedule(22, 2);
    for (std::size_t i = 0; i < 22; ++i) {
        if (!s1.pattern(i)) continue;
        const Grid g{1, 3, 4};
        EXPECT_EQ(build_plan(*s1.pattern(i), g).perm, build_plan(*s2.pattern(i), g).perm);
    }
}

TEST(Schedule, RejectsBadCounts) {
    EXPECT_THROW(build_schedule(0, 1), std::invalid_argument);
    EXPECT_THROW(build_schedule(12, 1), std::invalid_argument);
    EXPECT_THROW(build_schedule(11, 3), std::invalid_argument);
}
