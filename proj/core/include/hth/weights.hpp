// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter structs shared by the mixers and the model. Each is templated on
// the leaf type: `Tensor` for stored weights, `Var` for weights bound to a
// tape for one forward pass. `visit_fields` enumerates leaves in a fixed
// order with stable names, which drives binding, checkpoints and the
// optimizer alike.

#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hth/autodiff.hpp"
#include "hth/tensor.hpp"

namespace hth {

template <class T>
struct AttentionWeights {
    T wq, wk, wv, wo;  // [D, D]
    T q_scale, k_scale;  // [1, head_dim], QK RMSNorm gains
};

template <class T>
struct HydraWeights {
    T in_proj;   // [D, 2E + 2N + H]: gate | value | B | C | dt
    T conv_w;    // [E + 2N, K]
    T conv_b;    // [1, E + 2N]
    T dt_bias;   // [1, H]
    T a_log;     // [1, H], A = -exp(a_log)
    T d_diag;    // [1, H]
    T out_proj;  // [E, D]
};

template <class T>
struct LayerNormWeights {
    T weight, bias;  // [1, D]
};

template <class T>
struct FfnWeights {
    T w1, b1, w2, b2;
};

enum class MixerKind { kHydra, kAttention, kCausalSsm, kAdditiveSsm };

inline bool is_ssm(MixerKind k) { return k != MixerKind::kAttention; }

template <class T>
struct BlockWeights {
    MixerKind kind = MixerKind::kHydra;
    LayerNormWeights<T> norm_cross;
    AttentionWeights<T> cross;
    LayerNormWeights<T> norm_mix;
    HydraWeights<T> ssm;         // used when is_ssm(kind)
    AttentionWeights<T> self_attn;  // used when kind == kAttention
    LayerNormWeights<T> norm_ffn;
    FfnWeights<T> ffn;
};

template <class T>
struct ModelWeights {
    T patch_w, patch_b;                        // [p^2 C, D], [1, D]
    T time_w1, time_b1, time_w2, time_b2;      // timestep MLP
    T text_table;                              // [(classes + 1) * ctx_len, text_dim]
    T text_w, text_b;                          // [text_dim, D], [1, D]
    std::vector<BlockWeights<T>> blocks;
    LayerNormWeights<T> final_norm;
    T head_w, head_b;                          // [D, p^2 C], [1, p^2 C]
};

namespace detail {

template <class T, class F>
void visit_attention(AttentionWeights<T>& w, const std::string& p, F& f) {
    f(p + "wq", w.wq);
    f(p + "wk", w.wk);
    f(p + "wv", w.wv);
    f(p + "wo", w.wo);
    f(p + "q_scale", w.q_scale);
    f(p + "k_scale", w.k_scale);
}

template <class T, class F>
void visit_hydra(HydraWeights<T>& w, const std::string& p, F& f) {
    f(p + "in_proj", w.in_proj);
    f(p + "conv_w", w.conv_w);
    f(p + "conv_b", w.conv_b);
    f(p + "dt_bias", w.dt_bias);
    f(p + "a_log", w.a_log);
    f(p + "d_diag", w.d_diag);
    f(p + "out_proj", w.out_proj);
}

template <class T, class F>
void visit_norm(LayerNormWeights<T>& w, const std::string& p, F& f) {
    f(p + "weight", w.weight);
    f(p + "bias", w.bias);
}

template <class T, class F>
void visit_block(BlockWeights<T>& b, const std::string& p, F& f) {
    visit_norm(b.norm_cross, p + "norm_cross.", f);
    visit_attention(b.cross, p + "cross.", f);
    visit_norm(b.norm_mix, p + "norm_mix.", f);
    if (is_ssm(b.kind)) {
        visit_hydra(b.ssm, p + "ssm.", f);
    } else {
        visit_attention(b.self_attn, p + "self_attn.", f);
    }
    visit_norm(b.norm_ffn, p + "norm_ffn.", f);
    f(p + "ffn.w1", b.ffn.w1);
    f(p + "ffn.b1", b.ffn.b1);
    f(p + "ffn.w2", b.ffn.w2);
    f(p + "ffn.b2", b.ffn.b2);
}

}  // namespace detail

template <class T, class F>
void visit_fields(AttentionWeights<T>& w, const std::string& prefix, F&& f) {
    detail::visit_attention(w, prefix, f);
}

template <class T, class F>
void visit_fields(HydraWeights<T>& w, const std::string& prefix, F&& f) {
    detail::visit_hydra(w, prefix, f);
}

template <class T, class F>
void visit_fields(BlockWeights<T>& w, const std::string& prefix, F&& f) {
    detail::visit_block(w, prefix, f);
}

template <class T, class F>
void visit_fields(ModelWeights<T>& w, const std::string& prefix, F&& f) {
    f(prefix + "patch_w", w.patch_w);
    f(prefix + "patch_b", w.patch_b);
    f(prefix + "time_w1", w.time_w1);
    f(prefix + "time_b1", w.time_b1);
    f(prefix + "time_w2", w.time_w2);
    f(prefix + "time_b2", w.time_b2);
    f(prefix + "text_table", w.text_table);
    f(prefix + "text_w", w.text_w);
    f(prefix + "text_b", w.text_b);
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        detail::visit_block(w.blocks[i], prefix + "blocks." + std::to_string(i) + ".", f);
    }
    detail::visit_norm(w.final_norm, prefix + "final_norm.", f);
    f(prefix + "head_w", w.head_w);
    f(prefix + "head_b", w.head_b);
}

/// Structure-preserving copy of `src` into a weights object of another leaf
/// type; `convert(name, const From&)` produces each leaf.
template <template <class> class W, class From, class Convert>
auto convert_weights(const W<From>& src, Convert&& convert) {
    using To = std::decay_t<decltype(convert(std::string(), std::declval<const From&>()))>;
    W<To> out;
    if constexpr (std::is_same_v<W<From>, BlockWeights<From>>) {
        out.kind = src.kind;
    }
    if constexpr (std::is_same_v<W<From>, ModelWeights<From>>) {
        out.blocks.resize(src.blocks.size());
        for (std::size_t i = 0; i < src.blocks.size(); ++i) out.blocks[i].kind = src.blocks[i].kind;
    }
    std::vector<const From*> leaves;
    visit_fields(const_cast<W<From>&>(src), "", [&](const std::string&, From& leaf) { leaves.push_back(&leaf); });
    std::size_t i = 0;
    visit_fields(out, "", [&](const std::string& name, To& leaf) { leaf = convert(name, *leaves[i++]); });
    return out;
}

/// Registers every stored tensor as a tape parameter.
template <template <class> class W>
W<Var> bind(Tape& tape, const W<Tensor>& w) {
    return convert_weights(w, [&](const std::string&, const Tensor& t) { return tape.param(t); });
}

/// Wraps every stored tensor as a constant (no gradient recording).
template <template <class> class W>
W<Var> constants(const W<Tensor>& w) {
    return convert_weights(w, [](const std::string&, const Tensor& t) { return Var::constant(t); });
}

/// Leaves of a bound weights object, in visiting order.
template <template <class> class W>
std::vector<Var> leaves(const W<Var>& w) {
    std::vector<Var> out;
    visit_fields(const_cast<W<Var>&>(w), "", [&](const std::string&, Var& v) { out.push_back(v); });
    return out;
}

template <template <class> class W>
std::vector<std::pair<std::string, Tensor*>> named_tensors(W<Tensor>& w) {
    std::vector<std::pair<std::string, Tensor*>> out;
    visit_fields(w, "", [&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
    return out;
}

}  // namespace hth
