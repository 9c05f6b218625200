// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "hth/model.hpp"

using namespace hth;

namespace {

ModelConfig tiny() {
    ModelConfig c;
    c.model_dim = 8;
    c.attn_heads = 2;
    c.ssm_heads = 2;
    c.head_dim = 8;
    c.state_dim = 2;
    c.conv_window = 3;
    c.latent_channels = 2;
    c.latent = {1, 4, 4};
    c.text_dim = 4;
    c.ctx_len = 2;
    c.n_classes = 3;
    return c;
}

}  // namespace

TEST(Patchify, RoundTripAndLayout) {
    Rng rng(1);
    const Tensor x = rng.normal_tensor({2, 3, 4, 6, 2});
    const Tensor p = patchify(x, 2);
    EXPECT_EQ(p.shape(), (Tensor::Shape{2, 3, 2, 3, 8}));
    EXPECT_EQ(unpatchify(p, 2), x);
    // first token holds the top-left 2x2 block, row-major, channels innermost
    EXPECT_EQ(p[0], x[0]);
    EXPECT_EQ(p[2], x[2]);
    EXPECT_EQ(p[4], x[6 * 2]);
}

TEST(Patchify, Errors) {
    EXPECT_THROW(patchify(Tensor({1, 1, 3, 4, 1}), 2), ShapeError);
    EXPECT_THROW(patchify(Tensor({1, 4, 4, 1}), 2), ShapeError);
    EXPECT_THROW(unpatchify(Tensor({1, 1, 2, 2, 3}), 2), ShapeError);
}

TEST(PositionalEncoding, BoundedAndDistinct) {
    const scan::Grid g{2, 3, 3};
    const Tensor pe = sinusoidal_pe(g, 16);
    EXPECT_EQ(pe.shape(), (Tensor::Shape{18, 16}));
    EXPECT_LE(max_abs(pe), 1.0);
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b) {
            double d = 0.0;
            for (std::size_t k = 0; k < 16; ++k) d += std::abs(pe.at(a, k) - pe.at(b, k));
            EXPECT_GT(d, 1e-6) << a << " vs " << b;
        }
    EXPECT_THROW(sinusoidal_pe(g, 7), std::invalid_argument);
}

TEST(PositionalEncoding, SingleFrameIsPrefixOfVideo) {
    const Tensor img = sinusoidal_pe({1, 2, 2}, 12);
    const Tensor vid = sinusoidal_pe({3, 2, 2}, 12);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(img[i], vid[i]);
}

TEST(Timestep, RangeChecked) {
    EXPECT_NO_THROW(timestep_features(0.0, 8));
    EXPECT_NO_THROW(timestep_features(1.0, 8));
    EXPECT_THROW(timestep_features(1.5, 8), std::invalid_argument);
    EXPECT_THROW(timestep_features(std::nan(""), 8), std::invalid_argument);
}

TEST(ModelConfig, Validation) {
    ModelConfig c = tiny();
    EXPECT_NO_THROW(c.validate());
    c.n_blocks = 12;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny();
    c.latent = {1, 5, 4};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny();
    c.stage = 3;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ModelConfig, PublishedShapes) {
    const ModelConfig c = ModelConfig::published();
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.hydra().inner_dim(), 2 * c.model_dim);
    EXPECT_EQ(c.attention().head_dim(), 96u);
    EXPECT_EQ(c.patch_dim(), 48u);
    EXPECT_EQ(model_schedule(c).count(MixerKind::kAttention), 3u);
}

TEST(HthModel, ZeroInitPredictsZero) {
    Rng rng(2);
    const HthModel m = HthModel::init(tiny(), rng);
    const Tensor x = rng.normal_tensor({2, 1, 4, 4, 2});
    const std::vector<double> t{0.3, 0.9};
    const std::vector<std::size_t> labels{0, 3};
    const Tensor v = m.denoise(x, t, labels);
    EXPECT_EQ(v.shape(), x.shape());
    EXPECT_EQ(max_abs(v), 0.0);
}

TEST(HthModel, OutputsDependOnLabelAndTime) {
    Rng rng(3);
    const HthModel m = HthModel::init(tiny(), rng, {.zero_init = false});
    const Tensor x = rng.normal_tensor({1, 1, 4, 4, 2});
    const std::vector<double> t1{0.3}, t2{0.7};
    const std::vector<std::size_t> l1{0}, l2{1};
    const Tensor a = m.denoise(x, t1, l1);
    EXPECT_TRUE(a.all_finite());
    EXPECT_GT(max_abs(a - m.denoise(x, t1, l2)), 0.0);
    EXPECT_GT(max_abs(a - m.denoise(x, t2, l1)), 0.0);
}

TEST(HthModel, InputErrors) {
    Rng rng(4);
    const HthModel m = HthModel::init(tiny(), rng);
    const Tensor x = rng.normal_tensor({1, 1, 4, 4, 2});
    const std::vector<double> t{0.5};
    const std::vector<std::size_t> bad{4}, two{0, 1};
    EXPECT_THROW(m.denoise(x, t, bad), std::invalid_argument);
    EXPECT_THROW(m.denoise(x, t, two), ShapeError);
    EXPECT_THROW(m.denoise(rng.normal_tensor({1, 1, 4, 4, 3}), t, std::vector<std::size_t>{0}), ShapeError);
}

TEST(HthModel, ParameterCountMatchesLeaves) {
    Rng rng(5);
    HthModel m = HthModel::init(tiny(), rng);
    std::size_t n = 0;
    for (auto& [name, t] : named_tensors(m.weights())) n += t->size();
    EXPECT_EQ(m.parameter_count(), n);
}

TEST(HthModel, NonHybridUsesOneMixer) {
    ModelConfig c = tiny();
    c.hybrid = false;
    c.mixer = MixerKind::kCausalSsm;
    const auto s = model_schedule(c);
    EXPECT_EQ(s.count(MixerKind::kCausalSsm), 11u);
    c.mixer = MixerKind::kAttention;
    EXPECT_EQ(model_schedule(c).count(MixerKind::kAttention), 11u);
}

TEST(HthModel, GridGeneralization) {
    Rng rng(6);
    const HthModel m = HthModel::init(tiny(), rng, {.zero_init = false});
    const Tensor x = rng.normal_tensor({1, 1, 8, 12, 2});
    const Tensor v = m.denoise(x, std::vector<double>{0.5}, std::vector<std::size_t>{2});
    EXPECT_EQ(v.shape(), x.shape());
    EXPECT_TRUE(v.all_finite());
}
