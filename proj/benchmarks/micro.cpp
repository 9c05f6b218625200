// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "hth/attention.hpp"
#include "hth/hydra.hpp"
#include "hth/ssd.hpp"

namespace {

using namespace hth;

void BM_ChunkedScan(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Vector delta = Vector::Constant(static_cast<Eigen::Index>(T), 0.1);
    const auto d = ssd::discretize(delta, -1.0, rng.normal_tensor({T, 16}).matrix());
    const Matrix c = rng.normal_tensor({T, 16}).matrix();
    const Matrix x = rng.normal_tensor({T, 64}).matrix();
    for (auto _ : state) benchmark::DoNotOptimize(ssd::chunked_scan(d, c, x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChunkedScan)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Recurrence(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Vector delta = Vector::Constant(static_cast<Eigen::Index>(T), 0.1);
    const auto d = ssd::discretize(delta, -1.0, rng.normal_tensor({T, 16}).matrix());
    const Matrix c = rng.normal_tensor({T, 16}).matrix();
    const Matrix x = rng.normal_tensor({T, 64}).matrix();
    for (auto _ : state) benchmark::DoNotOptimize(ssd::ssm_recurrence(d, c, x));
}
BENCHMARK(BM_Recurrence)->RangeMultiplier(4)->Range(256, 16384);

void BM_HydraApply(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    hydra::HydraConfig cfg;
    Rng rng(2);
    const auto p = hydra::init_params(cfg, rng, {.zero_out_proj = false});
    const Tensor x = rng.normal_tensor({T, cfg.model_dim});
    for (auto _ : state) benchmark::DoNotOptimize(hydra::hydra_apply(p, cfg, x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HydraApply)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_SelfAttention(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    attention::AttentionConfig cfg;
    Rng rng(3);
    const auto p = constants(attention::init_params(cfg, rng, false));
    const Var x = Var::constant(rng.normal_tensor({T, cfg.model_dim}));
    for (auto _ : state) benchmark::DoNotOptimize(attention::self_attention(p, cfg, x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SelfAttention)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
