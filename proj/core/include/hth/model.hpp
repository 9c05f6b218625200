// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// The hybrid denoiser: patchify, patch embedding with fixed sinusoidal
// positions, a timestep embedding added once, a stack of pre-norm residual
// blocks (cross-attention, token mixer, feed-forward) following a
// MixerSchedule, and a linear head back to latent patches.

#pragma once

#include <cstddef>
#include <span>

#include "hth/attention.hpp"
#include "hth/hydra.hpp"
#include "hth/random.hpp"
#include "hth/scan.hpp"
#include "hth/weights.hpp"

namespace hth {

struct ModelConfig {
    std::size_t n_blocks = 11;
    std::size_t model_dim = 64;
    std::size_t attn_heads = 2;
    std::size_t ssm_heads = 2;
    std::size_t head_dim = 64;
    std::size_t state_dim = 16;
    std::size_t conv_window = 7;
    std::size_t chunk = ssd::kDefaultChunk;
    std::size_t patch = 2;
    std::size_t latent_channels = 4;
    scan::Grid latent{1, 8, 8};  // (T, H, W) before patchify
    std::size_t text_dim = 32;
    std::size_t ctx_len = 4;
    std::size_t n_classes = 8;
    int stage = 1;
    /// Mixer used in the Hydra slots of the schedule. kAttention turns every
    /// block into self-attention.
    MixerKind mixer = MixerKind::kHydra;
    /// When false the per-set attention slot also uses `mixer`.
    bool hybrid = true;

    scan::Grid token_grid() const { return token_grid_for(latent); }
    scan::Grid token_grid_for(const scan::Grid& latent_grid) const;
    std::size_t patch_dim() const { return patch * patch * latent_channels; }
    hydra::HydraConfig hydra() const;
    attention::AttentionConfig attention() const;
    void validate() const;

    /// Published dimensions; used for shape checks only.
    static ModelConfig published();
};

struct ModelInitOptions {
    /// Zero residual out-projections and the output head (identity blocks,
    /// zero prediction at init).
    bool zero_init = true;
};

/// latents [B, T, H, W, C] -> tokens [B, T, H/p, W/p, p*p*C]; within a token
/// the layout is (dy, dx, c).
Tensor patchify(const Tensor& latents, std::size_t p);
Tensor unpatchify(const Tensor& tokens, std::size_t p);

/// [grid.size(), dim] fixed embedding. The channels are split into a
/// temporal, a vertical and a horizontal part; each part interleaves
/// sin/cos of its coordinate at geometrically spaced frequencies, so the
/// origin maps to [0, 1, 0, 1, ...].
Tensor sinusoidal_pe(const scan::Grid& grid, std::size_t dim);

/// Sinusoidal featurization of a diffusion time t in [0, 1] -> [1, dim].
Tensor timestep_features(double t, std::size_t dim);

/// Learnable timestep embedding, one row per time: [n, model_dim].
Var timestep_embed(const ModelWeights<Var>& w, const ModelConfig& cfg, std::span<const double> t);

/// One residual block over a batch: x [B * L, D], ctx [B * ctx_len, D]
/// where L = plan.grid.size(). There is deliberately no timestep input.
Var block_forward(const BlockWeights<Var>& w, const ModelConfig& cfg, const Var& x, const Var& ctx,
                  const scan::ScanPlan& plan);

class HthModel {
   public:
    HthModel(ModelConfig cfg, ModelWeights<Tensor> weights);

    static HthModel init(const ModelConfig& cfg, Rng& rng, ModelInitOptions opts = {});

    const ModelConfig& config() const { return cfg_; }
    const ModelWeights<Tensor>& weights() const { return weights_; }
    ModelWeights<Tensor>& weights() { return weights_; }
    const scan::MixerSchedule& schedule() const { return schedule_; }

    /// Switches scan schedule (e.g. image stage 1 -> video stage 2); weights
    /// are shared between stages.
    void set_stage(int stage);

    /// Velocity prediction in token layout [B * L, p*p*C] for latents
    /// [B, T, H, W, C], one time and one class label per sample. Labels equal
    /// to n_classes select the null (unconditional) context.
    Var forward(const ModelWeights<Var>& w, const Tensor& noisy, std::span<const double> t,
                std::span<const std::size_t> labels) const;

    /// Same, without recording, reshaped back to latent layout.
    Tensor denoise(const Tensor& noisy, std::span<const double> t, std::span<const std::size_t> labels) const;

    std::size_t null_label() const { return cfg_.n_classes; }
    std::size_t parameter_count() const;

   private:
    ModelConfig cfg_;
    ModelWeights<Tensor> weights_;
    scan::MixerSchedule schedule_;
};

/// Schedule for a config: build_schedule plus the mixer overrides.
scan::MixerSchedule model_schedule(const ModelConfig& cfg);

}  // namespace hth
