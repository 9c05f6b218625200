// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hth/data.hpp"
#include "hth/diffusion.hpp"
#include "hth/model.hpp"
#include "hth/optim.hpp"

namespace hth {

struct TrainConfig {
    std::size_t steps = 2000;
    std::size_t batch = 8;
    double lr = 1e-3;
    std::size_t log_every = 100;
    std::size_t n_samples = 8;    // training set size
    std::size_t n_heldout = 16;   // held-out set size
    /// One noise draw per training sample, reused every step. Turns the
    /// objective into a memorization task with an attainable zero.
    bool fixed_noise = true;
    std::size_t eval_times = 8;   // t values per sample in `evaluate`

    void validate() const;
};

struct RunConfig {
    std::uint64_t seed = 0;
    ModelConfig model;
    diffusion::DiffusionConfig diffusion;
    TrainConfig train;

    void validate() const;
    data::DataSpec data_spec() const;
};

struct EvalResult {
    double loss = 0.0;
    double zero_loss = 0.0;  // loss of the all-zero predictor on the same draws
    /// Mean squared error per token position (in the order of the H scan),
    /// averaged over samples and times.
    std::vector<double> token_error;
};

/// Deterministic loss over a sample set: every sample at `eval_times`
/// midpoint times in (0, 1) with conditional labels. Noise is `fixed_eps[i]`
/// for sample i when given, otherwise drawn from `noise_rng`.
EvalResult evaluate(const HthModel& model, std::span<const data::Sample> samples, std::size_t eval_times,
                    Rng noise_rng, std::span<const Tensor> fixed_eps = {});

class Trainer {
   public:
    explicit Trainer(RunConfig cfg);

    /// One optimizer step; returns the batch loss before the update.
    double step();
    std::size_t steps_done() const { return step_; }

    const RunConfig& config() const { return cfg_; }
    const HthModel& model() const { return model_; }
    HthModel& model() { return model_; }
    const std::vector<data::Sample>& train_set() const { return train_; }
    const std::vector<data::Sample>& heldout_set() const { return heldout_; }

    EvalResult evaluate_train() const;
    EvalResult evaluate_heldout() const;

    /// Weights, optimizer moments and the step counter as HTH1.
    void save(const std::filesystem::path& path) const;
    /// Restores a state written by `save` from a trainer with the same config.
    void load(const std::filesystem::path& path);

   private:
    Tensor batch_noise(std::span<const std::size_t> idx, Rng& rng) const;

    RunConfig cfg_;
    Rng root_;
    HthModel model_;
    Adam adam_;
    std::vector<data::Sample> train_, heldout_;
    std::vector<Tensor> fixed_eps_;
    std::size_t step_ = 0;
};

/// Copies weights out of a checkpoint into `model`; throws on any missing
/// tensor or shape mismatch.
void load_weights(HthModel& model, const std::filesystem::path& path);

}  // namespace hth
