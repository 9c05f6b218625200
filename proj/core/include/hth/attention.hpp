// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-head softmax attention with RMS-normalized queries and keys. Used
// as the global token mixer and, with keys/values from the text context, as
// cross-attention. No masking anywhere.

#pragma once

#include <cstddef>

#include "hth/autodiff.hpp"
#include "hth/random.hpp"
#include "hth/weights.hpp"

namespace hth::attention {

struct AttentionConfig {
    std::size_t model_dim = 64;
    std::size_t heads = 2;

    std::size_t head_dim() const { return model_dim / heads; }
    void validate() const;
    static AttentionConfig published();
};

using AttnParams = AttentionWeights<Tensor>;

AttnParams init_params(const AttentionConfig& cfg, Rng& rng, bool zero_out_proj = true);

/// softmax(q k^T / sqrt(d_head)) v per head. q [Lq, H d], k and v [Lk, H d].
/// The forward pass works in row blocks and never holds the full Lq x Lk
/// score matrix.
Var softmax_attention(const Var& q, const Var& k, const Var& v, std::size_t heads);

Var self_attention(const AttentionWeights<Var>& p, const AttentionConfig& cfg, const Var& x);
/// Queries from x [L, D], keys and values from ctx [Lc, D]; Lc >= 1.
Var cross_attention(const AttentionWeights<Var>& p, const AttentionConfig& cfg, const Var& x, const Var& ctx);

}  // namespace hth::attention
