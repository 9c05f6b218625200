// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration as `key = value` lines. `#` starts a comment, blank
// lines are ignored, unknown keys are an error. Keys:
//
//   seed                 u64 run seed
//   n_blocks             multiple of 11
//   model_dim            token width D
//   attn_heads           attention heads
//   ssm_heads, head_dim  Hydra heads (ssm_heads * head_dim == 2 * model_dim)
//   state_dim            SSM state size N
//   conv_window          odd depthwise conv width
//   chunk                scan chunk length
//   patch                patch size p
//   latent_channels      latent channels before patchify
//   frames height width  latent grid before patchify
//   text_dim ctx_len n_classes
//   stage                1 or 2
//   mixer                hydra | attention | causal-ssm | bidi-add-ssm
//   hybrid               true: one self-attention block per 11, false: none
//   sample_steps guidance cond_drop
//   steps batch lr log_every n_samples n_heldout fixed_noise eval_times

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hth/train.hpp"

namespace hth {

std::string_view mixer_name(MixerKind kind);
/// Throws std::invalid_argument on an unknown name.
MixerKind parse_mixer(std::string_view name);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Serializes every key; parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& cfg);

}  // namespace hth
