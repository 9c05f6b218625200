// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hth/checkpoint.hpp"
#include "hth/compare.hpp"
#include "hth/config.hpp"
#include "hth/optim.hpp"
#include "hth/train.hpp"

using namespace hth;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_run() {
    return parse_config(R"(
        seed = 11
        model_dim = 8
        head_dim = 8
        state_dim = 2
        conv_window = 3
        latent_channels = 2
        height = 4
        width = 4
        text_dim = 4
        ctx_len = 2
        batch = 2
        n_samples = 4
        n_heldout = 2
        eval_times = 2
    )");
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("hth_test_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Config, TextRoundTrip) {
    RunConfig a = tiny_run();
    a.model.mixer = MixerKind::kAdditiveSsm;
    a.model.hybrid = false;
    a.diffusion.guidance = 2.5;
    const RunConfig b = parse_config(to_text(a));
    EXPECT_EQ(to_text(b), to_text(a));
    EXPECT_EQ(b.model.mixer, MixerKind::kAdditiveSsm);
    EXPECT_EQ(b.model.latent, (scan::Grid{1, 4, 4}));
    EXPECT_EQ(b.diffusion.guidance, 2.5);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("nonsense = 1"), std::invalid_argument);
    EXPECT_THROW(parse_config("model_dim"), std::invalid_argument);
    EXPECT_THROW(parse_config("model_dim = abc"), std::invalid_argument);
    EXPECT_THROW(parse_config("stage = 3"), std::invalid_argument);
    EXPECT_THROW(parse_mixer("mamba"), std::invalid_argument);
    EXPECT_EQ(parse_mixer(mixer_name(MixerKind::kCausalSsm)), MixerKind::kCausalSsm);
}

TEST(Checkpoint, RoundTripPreservesFloat32Values) {
    Tensor a({2, 3}, {1, -2.5, 3.25, 0, 1e-3f, 7});
    Tensor b({1}, {42});
    std::stringstream buf;
    checkpoint::write(buf, {{"a", a}, {"b.c", b}});
    const auto back = checkpoint::read(buf);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(checkpoint::find(back, "a"), a);
    EXPECT_EQ(checkpoint::find(back, "b.c"), b);
    EXPECT_EQ(checkpoint::find_if_present(back, "z"), nullptr);
    EXPECT_THROW(checkpoint::find(back, "z"), std::exception);
}

TEST(Checkpoint, HeaderLayout) {
    std::stringstream buf;
    checkpoint::write(buf, {{"x", Tensor({1}, {1.0})}});
    const std::string s = buf.str();
    EXPECT_EQ(s.substr(0, 4), "HTH1");
    // magic, version, count, name_len, name, rank, one dim, one float
    EXPECT_EQ(s.size(), 4u + 4 + 4 + 4 + 1 + 4 + 8 + 4);
}

TEST(Checkpoint, CorruptInputs) {
    std::stringstream good;
    checkpoint::write(good, {{"x", Tensor({2, 2}, 1.0)}});
    const std::string s = good.str();

    std::stringstream bad_magic("HTH2" + s.substr(4));
    EXPECT_THROW(checkpoint::read(bad_magic), checkpoint::FormatError);
    std::stringstream truncated(s.substr(0, s.size() - 3));
    EXPECT_THROW(checkpoint::read(truncated), checkpoint::FormatError);
    std::string wrong_version = s;
    wrong_version[4] = 9;
    std::stringstream v(wrong_version);
    EXPECT_THROW(checkpoint::read(v), checkpoint::FormatError);
    EXPECT_THROW(checkpoint::load("/nonexistent/hth.ckpt"), std::exception);
}

TEST(Optim, RoundToFloat) {
    Tensor t({1, 2}, {0.1, 1.0});
    round_to_float(t);
    EXPECT_EQ(t[0], static_cast<double>(0.1f));
    EXPECT_EQ(t[1], 1.0);
}

TEST(Optim, AdamFirstStepMovesByLearningRate) {
    Adam adam({.lr = 0.01});
    Tensor p({1, 2}, {1.0, -1.0});
    Tensor* params[] = {&p};
    const Tensor grads[] = {Tensor({1, 2}, {3.0, -0.5})};
    adam.step(params, grads);
    EXPECT_NEAR(p[0], 0.99, 1e-6);
    EXPECT_NEAR(p[1], -0.99, 1e-6);
}

TEST(Trainer, ResumeIsBitExact) {
    const RunConfig cfg = tiny_run();
    const fs::path mid = temp_path("mid.ckpt"), a = temp_path("a.ckpt"), b = temp_path("b.ckpt");

    Trainer full(cfg);
    for (int i = 0; i < 6; ++i) full.step();
    full.save(a);

    Trainer first(cfg);
    for (int i = 0; i < 3; ++i) first.step();
    first.save(mid);
    Trainer second(cfg);
    second.load(mid);
    EXPECT_EQ(second.steps_done(), 3u);
    for (int i = 0; i < 3; ++i) second.step();
    second.save(b);

    EXPECT_EQ(slurp(a), slurp(b));
    fs::remove(mid);
    fs::remove(a);
    fs::remove(b);
}

TEST(Trainer, WeightsLoadAndMismatch) {
    const RunConfig cfg = tiny_run();
    const fs::path path = temp_path("w.ckpt");
    Trainer tr(cfg);
    tr.step();
    tr.save(path);

    Rng rng(0);
    HthModel m = HthModel::init(cfg.model, rng);
    load_weights(m, path);
    EXPECT_EQ(m.weights().head_w, tr.model().weights().head_w);

    RunConfig other = cfg;
    other.model.model_dim = 16;
    other.model.head_dim = 16;
    HthModel wrong = HthModel::init(other.model, rng);
    try {
        load_weights(wrong, path);
        FAIL() << "expected a mismatch";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("mismatch"), std::string::npos);
    }
    fs::remove(path);
}

TEST(Trainer, StageTwoMatchesStageOneOnImages) {
    RunConfig s1 = tiny_run();
    RunConfig s2 = s1;
    s2.model.stage = 2;
    Trainer a(s1), b(s2);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a.step(), b.step());
    EXPECT_EQ(a.model().weights().head_w, b.model().weights().head_w);
}

TEST(Evaluate, TokenErrorsAverageToLoss) {
    const RunConfig cfg = tiny_run();
    Trainer tr(cfg);
    const auto e = tr.evaluate_heldout();
    ASSERT_EQ(e.token_error.size(), cfg.model.token_grid().size());
    double mean = 0.0;
    for (double v : e.token_error) mean += v;
    mean /= static_cast<double>(e.token_error.size());
    EXPECT_NEAR(mean, e.loss, 1e-12 * std::max(1.0, e.loss));
    // zero-initialized head: the model is the zero predictor
    EXPECT_EQ(e.loss, e.zero_loss);
}

TEST(Compare, AsymmetryIsFirstOverLastToken) {
    const std::vector<double> err{4.0, 100.0, 0.5, 2.0};
    EXPECT_DOUBLE_EQ(asymmetry_ratio(err), 2.0);
    EXPECT_THROW(asymmetry_ratio(std::vector<double>{}), std::invalid_argument);
}
