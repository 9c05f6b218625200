// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "hth/gradcheck.hpp"
#include "hth/hydra.hpp"
#include "hth/ops.hpp"

using namespace hth;
using namespace hth::hydra;

namespace {

ssd::DiscretizedParams random_disc(Rng& rng, std::size_t T, std::size_t N) {
    Vector delta(static_cast<Eigen::Index>(T));
    for (auto& d : delta) d = rng.uniform(0.05, 1.5);
    return ssd::discretize(delta, -rng.uniform(0.1, 2.0), rng.normal_tensor({T, N}).matrix());
}

double rel(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

HydraConfig small_config() {
    HydraConfig cfg;
    cfg.model_dim = 4;
    cfg.heads = 2;
    cfg.head_dim = 4;
    cfg.state_dim = 3;
    cfg.conv_window = 3;
    cfg.chunk = 4;
    return cfg;
}

}  // namespace

TEST(Quasiseparable, DegenerateHandCase) {
    // a = 1, b = c = 1, d = 0 on [5,4,3]: each output is the sum of the others
    const ssd::DiscretizedParams d{Vector::Ones(3), Matrix::Ones(3, 1)};
    Matrix x(3, 1);
    x << 5, 4, 3;
    Matrix want(3, 1);
    want << 7, 8, 9;
    EXPECT_LE(rel(value_path(d, Matrix::Ones(3, 1), x, 0.0), want), 1e-15);
    EXPECT_LE(rel(materialize_qs(d, Matrix::Ones(3, 1), 0.0) * x, want), 1e-15);

    Matrix qs(3, 3);
    qs << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    EXPECT_EQ(materialize_qs(d, Matrix::Ones(3, 1), 2.0), qs);
}

TEST(Quasiseparable, SingleTokenIsDiagonal) {
    Rng rng(1);
    const auto d = random_disc(rng, 1, 3);
    const Matrix c = rng.normal_tensor({1, 3}).matrix();
    EXPECT_EQ(materialize_qs(d, c, 0.7)(0, 0), 0.7);
    EXPECT_EQ(value_path(d, c, Matrix::Constant(1, 1, 2.0), 0.7)(0, 0), 1.4);
}

TEST(Quasiseparable, ValuePathMatchesMaterialized) {
    Rng rng(2);
    for (int i = 0; i < 40; ++i) {
        const std::size_t T = 1 + rng.below(48), N = 1 + rng.below(5);
        const auto d = random_disc(rng, T, N);
        const Matrix c = rng.normal_tensor({T, N}).matrix();
        const Matrix x = rng.normal_tensor({T, 2}).matrix();
        const double dd = rng.normal();
        EXPECT_LE(rel(value_path(d, c, x, dd, Combine::kQuasiseparable, 5), materialize_qs(d, c, dd) * x), 1e-10);
    }
}

TEST(Quasiseparable, MaterializeBound) {
    Rng rng(3);
    const auto d = random_disc(rng, 65, 1);
    EXPECT_THROW(materialize_qs(d, Matrix::Ones(65, 1), 0.0), std::invalid_argument);
}

TEST(Quasiseparable, ZeroInputGivesZero) {
    Rng rng(4);
    const auto d = random_disc(rng, 9, 2);
    EXPECT_TRUE(value_path(d, Matrix::Ones(9, 2), Matrix::Zero(9, 3), 1.0).isZero(0.0));
}

TEST(Quasiseparable, EveryOutputSeesBothDirections) {
    Rng rng(5);
    const std::size_t T = 12;
    const auto d = random_disc(rng, T, 2);
    const Matrix c = rng.normal_tensor({T, 2}).matrix();
    const Matrix m = materialize_qs(d, c, 0.0);
    for (Eigen::Index i = 1; i + 1 < static_cast<Eigen::Index>(T); ++i) {
        EXPECT_NE(m(i, 0), 0.0);
        EXPECT_NE(m(i, T - 1), 0.0);
    }
    // causal combine leaves the strict upper triangle empty
    const Matrix x = Matrix::Identity(T, T);
    const Matrix causal = value_path(d, c, x, 0.0, Combine::kCausal);
    EXPECT_TRUE(Matrix(causal.triangularView<Eigen::StrictlyUpper>()).isZero(0.0));
}

TEST(Quasiseparable, DiagonalIsOnlyTheSkip) {
    Rng rng(6);
    const auto d = random_disc(rng, 10, 3);
    const Matrix c = rng.normal_tensor({10, 3}).matrix();
    EXPECT_TRUE((materialize_qs(d, c, 0.3).diagonal().array() == 0.3).all());
    // additive combine counts the diagonal twice
    const Matrix add = value_path(d, c, Matrix::Identity(10, 10), 0.0, Combine::kAdditive);
    const Matrix causal = value_path(d, c, Matrix::Identity(10, 10), 0.0, Combine::kCausal);
    EXPECT_LE((add.diagonal() - 2.0 * causal.diagonal()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MixHead, VarMatchesValuePath) {
    Rng rng(7);
    for (Combine comb : {Combine::kQuasiseparable, Combine::kCausal, Combine::kAdditive}) {
        const std::size_t T = 11, N = 2;
        Vector delta(static_cast<Eigen::Index>(T));
        for (auto& v : delta) v = rng.uniform(0.05, 1.0);
        const double a = -0.8, dd = 0.4;
        const Tensor b = rng.normal_tensor({T, N}), c = rng.normal_tensor({T, N}), x = rng.normal_tensor({T, 3});
        Tensor dt({T, 1});
        for (std::size_t t = 0; t < T; ++t) dt[t] = delta(static_cast<Eigen::Index>(t));
        const Var y = mix_head(Var::constant(x), Var::constant(dt), Var::constant(Tensor::scalar(a)),
                               Var::constant(b), Var::constant(c), Var::constant(Tensor::scalar(dd)), comb, 4);
        const Matrix want = value_path(ssd::discretize(delta, a, b.matrix()), c.matrix(), x.matrix(), dd, comb);
        EXPECT_LE(rel(y.value().matrix(), want), 1e-12);
    }
}

TEST(HydraApply, ShapesAndZeroOutputInit) {
    const HydraConfig cfg = small_config();
    Rng rng(8);
    const MixerParams p = init_params(cfg, rng);
    const Tensor x = rng.normal_tensor({7, 4});
    const Tensor y = hydra_apply(p, cfg, x);
    EXPECT_EQ(y.shape(), (Tensor::Shape{7, 4}));
    EXPECT_EQ(max_abs(y), 0.0);
    EXPECT_THROW(hydra_apply(p, cfg, rng.normal_tensor({7, 5})), ShapeError);
}

TEST(HydraApply, ConfigValidation) {
    HydraConfig cfg = small_config();
    cfg.head_dim = 3;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.conv_window = 4;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_NO_THROW(HydraConfig::published().validate());
}

TEST(HydraApply, GradientsMatchFiniteDifferences) {
    const HydraConfig cfg = small_config();
    Rng rng(9);
    MixerParams p = init_params(cfg, rng, {.zero_out_proj = false});
    std::vector<Tensor> inputs{rng.normal_tensor({6, 4})};
    for (auto& [name, t] : named_tensors(p)) inputs.push_back(*t);
    const auto f = [&](std::span<const Var> in) {
        HydraWeights<Var> w{in[1], in[2], in[3], in[4], in[5], in[6], in[7]};
        return hydra_apply(w, cfg, in[0]);
    };
    const auto r = gradcheck::check(f, inputs, rng);
    EXPECT_LE(r.rel_error, 1e-3);
    EXPECT_GT(r.checked, 0u);
}

TEST(HydraApply, CausalCombineIgnoresLaterTokens) {
    for (Combine comb : {Combine::kCausal, Combine::kQuasiseparable}) {
        HydraConfig cfg = small_config();
        cfg.combine = comb;
        Rng rng(10);
        const MixerParams p = init_params(cfg, rng, {.zero_out_proj = false});
        Tensor x = rng.normal_tensor({9, 4});
        const Tensor y0 = hydra_apply(p, cfg, x);
        x[5 * 4 + 1] += 1.0;
        const Tensor y1 = hydra_apply(p, cfg, x);
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < y0.size(); ++i) (i < 5 * 4 ? before : after) += std::abs(y1[i] - y0[i]);
        EXPECT_GT(after, 0.0);
        if (comb == Combine::kCausal) {
            EXPECT_EQ(before, 0.0);
        } else {
            EXPECT_GT(before, 0.0);
        }
    }
}
