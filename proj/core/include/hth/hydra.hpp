// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hydra bidirectional token mixer.
//
// The value path of one head combines a forward causal scan and a scan over
// the reversed sequence into a quasiseparable operator:
//
//   QS(X) = shift(SS(X)) + flip(shift(SS(flip(X)))) + D X
//
// Both scans read the same per-position (delta, B, C); the reverse scan sees
// them reversed together with X. The full mixer wraps that value path with
// an input projection, a centered depthwise convolution, a SiLU output gate
// and an output projection.

#pragma once

#include <cstddef>

#include "hth/autodiff.hpp"
#include "hth/random.hpp"
#include "hth/ssd.hpp"
#include "hth/weights.hpp"

namespace hth::hydra {

/// How the two directional scans are combined. kHydra is the quasiseparable
/// form; the others are the baselines used by the mixer comparison.
enum class Combine { kQuasiseparable, kCausal, kAdditive };

struct HydraConfig {
    std::size_t model_dim = 64;
    std::size_t heads = 2;
    std::size_t head_dim = 64;
    std::size_t state_dim = 16;
    std::size_t conv_window = 7;
    std::size_t chunk = ssd::kDefaultChunk;
    Combine combine = Combine::kQuasiseparable;

    std::size_t inner_dim() const { return heads * head_dim; }
    std::size_t conv_channels() const { return inner_dim() + 2 * state_dim; }
    std::size_t in_proj_width() const { return 2 * inner_dim() + 2 * state_dim + heads; }
    /// Throws std::invalid_argument unless heads * head_dim == 2 * model_dim
    /// and the convolution window is odd.
    void validate() const;

    /// Shape-only configuration at published scale.
    static HydraConfig published();
};

using MixerParams = HydraWeights<Tensor>;

struct InitOptions {
    bool zero_out_proj = true;
};

MixerParams init_params(const HydraConfig& cfg, Rng& rng, InitOptions opts = {});

/// x is a single sequence [T, model_dim] in scan order.
Var hydra_apply(const HydraWeights<Var>& p, const HydraConfig& cfg, const Var& x);
Tensor hydra_apply(const MixerParams& p, const HydraConfig& cfg, const Tensor& x);

/// Differentiable selective scan of one head: x [T,P], delta [T,1],
/// a_cont [1,1], b [T,N], c [T,N].
Var selective_scan(const Var& x, const Var& delta, const Var& a_cont, const Var& b, const Var& c,
                   std::size_t chunk = ssd::kDefaultChunk);

/// Differentiable value path of one head; d_diag is [1,1].
Var mix_head(const Var& x, const Var& delta, const Var& a_cont, const Var& b, const Var& c, const Var& d_diag,
             Combine combine, std::size_t chunk = ssd::kDefaultChunk);

/// Value path on already-discretized parameters (given per position, in
/// forward order).
Matrix value_path(const ssd::DiscretizedParams& d, const Matrix& c, const Matrix& x, double d_diag,
                  Combine combine = Combine::kQuasiseparable, std::size_t chunk = ssd::kDefaultChunk);

inline constexpr std::size_t kMaterializeBound = 64;

/// Dense T x T quasiseparable matrix of the value path, built from two
/// materialized semiseparable matrices. Verification only.
Matrix materialize_qs(const ssd::DiscretizedParams& d, const Matrix& c, double d_diag,
                      std::size_t bound = kMaterializeBound);

/// Reverses every per-position parameter.
ssd::DiscretizedParams flipped(const ssd::DiscretizedParams& d);

}  // namespace hth::hydra
