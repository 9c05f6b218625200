// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "hth/diffusion.hpp"
#include "hth/train.hpp"

using namespace hth;
using namespace hth::diffusion;

TEST(Noise, Interpolates) {
    const Tensor x0 = Tensor::column({1, 2});
    const Tensor eps = Tensor::column({-1, 4});
    EXPECT_EQ(noise(x0, eps, 0.0), x0);
    EXPECT_EQ(noise(x0, eps, 1.0), eps);
    const Tensor mid = noise(x0, eps, 0.25);
    EXPECT_DOUBLE_EQ(mid[0], 0.5);
    EXPECT_DOUBLE_EQ(mid[1], 2.5);
    EXPECT_EQ(velocity_target(x0, eps), Tensor::column({-2, 2}));
    EXPECT_THROW(noise(x0, eps, -0.1), std::invalid_argument);
    EXPECT_THROW(noise(x0, Tensor::column({1}), 0.5), ShapeError);
}

TEST(Noise, BatchUsesOneTimePerSample) {
    const Tensor x0({2, 2}, {1, 1, 1, 1});
    const Tensor eps({2, 2}, {0, 0, 0, 0});
    const std::vector<double> t{0.5, 1.0};
    EXPECT_EQ(noise_batch(x0, eps, t), Tensor({2, 2}, {0.5, 0.5, 0, 0}));
    EXPECT_THROW(noise_batch(x0, eps, std::vector<double>{0.5}), ShapeError);
}

TEST(Guidance, AffineCombination) {
    Rng rng(1);
    const Tensor c = rng.normal_tensor({3, 4}), u = rng.normal_tensor({3, 4});
    EXPECT_EQ(guided_velocity(c, u, 1.0), c);
    EXPECT_EQ(guided_velocity(c, u, 0.0), u);
    const Tensor g2 = guided_velocity(c, u, 2.0);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(g2[i], 2 * c[i] - u[i], 1e-14);
}

TEST(DropLabels, Extremes) {
    Rng rng(2);
    const std::vector<std::size_t> l{0, 1, 2, 1};
    EXPECT_EQ(drop_labels(l, 0.0, 9, rng), l);
    EXPECT_EQ(drop_labels(l, 1.0, 9, rng), std::vector<std::size_t>(4, 9));
    std::vector<std::size_t> many(4000, 0);
    const auto d = drop_labels(many, 0.1, 1, rng);
    const auto dropped = std::count(d.begin(), d.end(), 1u);
    EXPECT_NEAR(static_cast<double>(dropped) / 4000.0, 0.1, 0.02);
}

TEST(Sampler, ConstantVelocityRecoversStart) {
    Rng rng(3);
    const Tensor x0 = rng.normal_tensor({2, 5}), eps = rng.normal_tensor({2, 5});
    const Tensor v = velocity_target(x0, eps);
    for (std::size_t steps : {1u, 7u, 50u}) {
        const Tensor out = sample([&](const Tensor&, double, bool) { return v; }, eps, steps, 1.0);
        EXPECT_LE(max_abs(out - x0), 1e-12) << steps;
    }
    EXPECT_THROW(sample([&](const Tensor&, double, bool) { return v; }, eps, 0, 1.0), std::invalid_argument);
}

TEST(Sampler, GuidanceQueriesBothBranches) {
    const Tensor start = Tensor::column({1.0});
    int cond = 0, uncond = 0;
    const VelocityFn fn = [&](const Tensor& x, double, bool c) {
        (c ? cond : uncond)++;
        return x;
    };
    sample(fn, start, 4, 3.0);
    EXPECT_EQ(cond, 4);
    EXPECT_EQ(uncond, 4);
    cond = uncond = 0;
    sample(fn, start, 4, 1.0);
    EXPECT_EQ(uncond, 0);
}

TEST(Sampler, NonFiniteVelocityIsReported) {
    const VelocityFn fn = [](const Tensor& x, double, bool) { return Tensor(x.shape(), std::nan("")); };
    EXPECT_THROW(sample(fn, Tensor::column({1.0}), 2, 1.0), NonFiniteError);
}

TEST(DiffusionConfig, Validation) {
    DiffusionConfig c;
    c.sample_steps = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.cond_drop = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Training, SingleSampleLossDrops) {
    RunConfig cfg;
    cfg.seed = 3;
    cfg.model.model_dim = 8;
    cfg.model.head_dim = 8;
    cfg.model.state_dim = 2;
    cfg.model.conv_window = 3;
    cfg.model.latent_channels = 2;
    cfg.model.latent = {1, 4, 4};
    cfg.model.text_dim = 4;
    cfg.model.ctx_len = 2;
    cfg.train.batch = 1;
    cfg.train.n_samples = 1;
    cfg.train.n_heldout = 1;
    cfg.train.lr = 3e-3;
    cfg.diffusion.cond_drop = 0.0;
    Trainer tr(cfg);
    const double before = tr.evaluate_train().loss;
    for (int i = 0; i < 200; ++i) tr.step();
    const auto after = tr.evaluate_train();
    EXPECT_LT(after.loss, 0.5 * before);
    EXPECT_LT(after.loss, after.zero_loss);
}
