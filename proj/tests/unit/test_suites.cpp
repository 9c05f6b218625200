// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "hth/verify.hpp"

using namespace hth;

class VerifySuite : public ::testing::TestWithParam<std::string> {};

TEST_P(VerifySuite, Passes) {
    const auto r = verify::run_suite(verify::suite(GetParam()));
    EXPECT_TRUE(r.passed) << r.message;
    EXPECT_GT(r.checks, 0u);
}

INSTANTIATE_TEST_SUITE_P(All, VerifySuite,
                         ::testing::Values("ssd-equivalence", "ssd-structure", "quasiseparable", "op-gradients",
                                           "model-gradient", "scan-plans", "stage-equivalence", "diffusion",
                                           "model-contract"),
                         [](const auto& info) {
                             std::string s = info.param;
                             for (auto& ch : s)
                                 if (ch == '-') ch = '_';
                             return s;
                         });

TEST(VerifyRegistry, UnknownSuiteThrows) { EXPECT_THROW(verify::suite("nope"), std::invalid_argument); }

TEST(Checker, TracksFirstFailureAndWorstRatio) {
    verify::Checker c;
    c.within(0.5, 1.0, "a");
    c.within(3.0, 1.0, "b");
    c.expect(false, "c");
    EXPECT_FALSE(c.passed());
    EXPECT_EQ(c.checks(), 3u);
    EXPECT_EQ(c.failures(), 2u);
    EXPECT_NE(c.first_failure().find("b"), std::string::npos);
    EXPECT_DOUBLE_EQ(c.worst_ratio(), 3.0);
}
