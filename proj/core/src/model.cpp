// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/model.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hth/ops.hpp"

namespace hth {

scan::Grid ModelConfig::token_grid_for(const scan::Grid& g) const {
    if (patch == 0 || g.height % patch != 0 || g.width % patch != 0) {
        throw std::invalid_argument("latent grid " + scan::to_string(g) + " is not divisible by patch " +
                                    std::to_string(patch));
    }
    return {g.frames, g.height / patch, g.width / patch};
}

hydra::HydraConfig ModelConfig::hydra() const {
    hydra::HydraConfig h;
    h.model_dim = model_dim;
    h.heads = ssm_heads;
    h.head_dim = head_dim;
    h.state_dim = state_dim;
    h.conv_window = conv_window;
    h.chunk = chunk;
    return h;
}

attention::AttentionConfig ModelConfig::attention() const { return {model_dim, attn_heads}; }

void ModelConfig::validate() const {
    if (n_blocks == 0 || n_blocks % scan::kSetSize != 0) {
        throw std::invalid_argument("n_blocks must be a positive multiple of 11");
    }
    if (model_dim == 0 || model_dim % 2 != 0) throw std::invalid_argument("model_dim must be positive and even");
    if (stage != 1 && stage != 2) throw std::invalid_argument("stage must be 1 or 2");
    if (latent_channels == 0 || text_dim == 0 || ctx_len == 0 || n_classes == 0) {
        throw std::invalid_argument("latent_channels, text_dim, ctx_len and n_classes must be positive");
    }
    (void)token_grid();
    hydra().validate();
    attention().validate();
}

ModelConfig ModelConfig::published() {
    ModelConfig c;
    c.n_blocks = 33;
    c.model_dim = 3072;
    c.attn_heads = 32;
    c.ssm_heads = 96;
    c.head_dim = 64;
    c.state_dim = 256;
    c.conv_window = 7;
    c.patch = 2;
    c.latent_channels = 12;
    c.text_dim = 4096;
    return c;
}

Tensor patchify(const Tensor& latents, std::size_t p) {
    if (latents.rank() != 5) throw ShapeError("patchify: expected [B, T, H, W, C], got " + shape_string(latents.shape()));
    const std::size_t B = latents.dim(0), T = latents.dim(1), H = latents.dim(2), W = latents.dim(3),
                      C = latents.dim(4);
    if (p == 0 || H % p != 0 || W % p != 0) {
        throw ShapeError("patchify: spatial size " + std::to_string(H) + "x" + std::to_string(W) +
                         " not divisible by patch " + std::to_string(p));
    }
    const std::size_t h = H / p, w = W / p;
    Tensor out({B, T, h, w, p * p * C});
    std::size_t o = 0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    for (std::size_t dy = 0; dy < p; ++dy)
                        for (std::size_t dx = 0; dx < p; ++dx)
                            for (std::size_t c = 0; c < C; ++c) {
                                const std::size_t y = i * p + dy, x = j * p + dx;
                                out[o++] = latents[(((b * T + t) * H + y) * W + x) * C + c];
                            }
    return out;
}

Tensor unpatchify(const Tensor& tokens, std::size_t p) {
    if (tokens.rank() != 5) throw ShapeError("unpatchify: expected [B, T, h, w, p*p*C]");
    const std::size_t B = tokens.dim(0), T = tokens.dim(1), h = tokens.dim(2), w = tokens.dim(3);
    if (p == 0 || tokens.dim(4) % (p * p) != 0) throw ShapeError("unpatchify: token width not divisible by p*p");
    const std::size_t C = tokens.dim(4) / (p * p);
    const std::size_t H = h * p, W = w * p;
    Tensor out({B, T, H, W, C});
    std::size_t o = 0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    for (std::size_t dy = 0; dy < p; ++dy)
                        for (std::size_t dx = 0; dx < p; ++dx)
                            for (std::size_t c = 0; c < C; ++c) {
                                const std::size_t y = i * p + dy, x = j * p + dx;
                                out[(((b * T + t) * H + y) * W + x) * C + c] = tokens[o++];
                            }
    return out;
}

namespace {

void fill_sincos(std::span<double> row, double pos) {
    const std::size_t n = row.size() / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(row.size()));
        row[2 * i] = std::sin(pos * freq);
        row[2 * i + 1] = std::cos(pos * freq);
    }
}

}  // namespace

Tensor sinusoidal_pe(const scan::Grid& grid, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_pe: dimension must be even, got " +
                                                              std::to_string(dim));
    const std::size_t dt = 2 * (dim / 8);
    const std::size_t dh = 2 * ((dim - dt) / 4);
    const std::size_t dw = dim - dt - dh;
    Tensor pe({grid.size(), dim});
    for (std::size_t t = 0; t < grid.frames; ++t)
        for (std::size_t h = 0; h < grid.height; ++h)
            for (std::size_t w = 0; w < grid.width; ++w) {
                auto row = pe.data().subspan(grid.index(t, h, w) * dim, dim);
                fill_sincos(row.subspan(0, dt), static_cast<double>(t));
                fill_sincos(row.subspan(dt, dh), static_cast<double>(h));
                fill_sincos(row.subspan(dt + dh, dw), static_cast<double>(w));
            }
    return pe;
}

Tensor timestep_features(double t, std::size_t dim) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("timestep must lie in [0, 1], got " + std::to_string(t));
    Tensor f({1, dim});
    fill_sincos(f.data().subspan(0, dim - dim % 2), 1000.0 * t);
    return f;
}

Var timestep_embed(const ModelWeights<Var>& w, const ModelConfig& cfg, std::span<const double> t) {
    Tensor feats({t.size(), cfg.model_dim});
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Tensor f = timestep_features(t[i], cfg.model_dim);
        std::copy(f.data().begin(), f.data().end(), feats.data().begin() + static_cast<std::ptrdiff_t>(i * cfg.model_dim));
    }
    const Var h = ops::silu(ops::add_bias(ops::matmul(Var::constant(std::move(feats)), w.time_w1), w.time_b1));
    return ops::add_bias(ops::matmul(h, w.time_w2), w.time_b2);
}

namespace {

Var norm(const LayerNormWeights<Var>& w, const Var& x) {
    return ops::add_bias(ops::mul_cols(ops::layernorm(x), w.weight), w.bias);
}

hydra::Combine combine_for(MixerKind k) {
    switch (k) {
        case MixerKind::kCausalSsm: return hydra::Combine::kCausal;
        case MixerKind::kAdditiveSsm: return hydra::Combine::kAdditive;
        default: return hydra::Combine::kQuasiseparable;
    }
}

// Applies `fn(sample_rows, sample_index)` to each sample of a batch and
// concatenates the results.
template <class Fn>
Var per_sample(const Var& x, std::size_t rows_per_sample, Fn fn) {
    const std::size_t B = x.rows() / rows_per_sample;
    if (B == 1) return fn(x, 0);
    std::vector<Var> outs;
    outs.reserve(B);
    for (std::size_t b = 0; b < B; ++b) outs.push_back(fn(ops::slice_rows(x, b * rows_per_sample, rows_per_sample), b));
    return ops::concat_rows(outs);
}

}  // namespace

Var block_forward(const BlockWeights<Var>& w, const ModelConfig& cfg, const Var& x, const Var& ctx,
                  const scan::ScanPlan& plan) {
    const std::size_t L = plan.grid.size();
    if (x.cols() != cfg.model_dim || x.rows() % L != 0 || x.rows() == 0) {
        throw ShapeError("block_forward: tokens " + shape_string(x.shape()) + " do not match grid " +
                         scan::to_string(plan.grid));
    }
    const std::size_t B = x.rows() / L;
    if (ctx.rows() % B != 0 || ctx.rows() == 0) throw ShapeError("block_forward: context rows must split per sample");
    const std::size_t Lc = ctx.rows() / B;
    const auto attn_cfg = cfg.attention();

    const Var hc = norm(w.norm_cross, x);
    Var out = ops::add(x, per_sample(hc, L, [&](const Var& s, std::size_t b) {
                           return attention::cross_attention(w.cross, attn_cfg, s, ops::slice_rows(ctx, b * Lc, Lc));
                       }));

    const Var hm = norm(w.norm_mix, out);
    Var mixed;
    if (is_ssm(w.kind)) {
        auto hcfg = cfg.hydra();
        hcfg.combine = combine_for(w.kind);
        mixed = per_sample(hm, L, [&](const Var& s, std::size_t) {
            return scan::scatter(plan, hydra::hydra_apply(w.ssm, hcfg, scan::gather(plan, s)));
        });
    } else {
        mixed = per_sample(hm, L, [&](const Var& s, std::size_t) {
            return attention::self_attention(w.self_attn, attn_cfg, s);
        });
    }
    out = ops::add(out, mixed);

    const Var hf = norm(w.norm_ffn, out);
    const Var ff = ops::add_bias(ops::matmul(ops::silu(ops::add_bias(ops::matmul(hf, w.ffn.w1), w.ffn.b1)), w.ffn.w2),
                                 w.ffn.b2);
    return ops::add(out, ff);
}

scan::MixerSchedule model_schedule(const ModelConfig& cfg) {
    scan::MixerSchedule s = scan::build_schedule(cfg.n_blocks, cfg.stage);
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        auto& e = s.blocks[i];
        if (e.kind == MixerKind::kAttention) {
            if (cfg.hybrid || cfg.mixer == MixerKind::kAttention) continue;
            const bool even = (i % scan::kSetSize) % 2 == 0;
            e.stage1 = even ? scan::Pattern::kH : scan::Pattern::kV;
            e.stage2 = even ? scan::Pattern::kHT : scan::Pattern::kVT;
        }
        e.kind = cfg.mixer;
        if (e.kind == MixerKind::kAttention) {
            e.stage1.reset();
            e.stage2.reset();
        }
    }
    return s;
}

namespace {

LayerNormWeights<Tensor> init_norm(std::size_t D) { return {Tensor({1, D}, 1.0), Tensor({1, D})}; }

}  // namespace

HthModel::HthModel(ModelConfig cfg, ModelWeights<Tensor> weights)
    : cfg_(std::move(cfg)), weights_(std::move(weights)), schedule_(model_schedule(cfg_)) {
    cfg_.validate();
    if (weights_.blocks.size() != cfg_.n_blocks) throw std::invalid_argument("weights do not match n_blocks");
    for (std::size_t i = 0; i < cfg_.n_blocks; ++i) {
        if (weights_.blocks[i].kind != schedule_.blocks[i].kind) {
            throw std::invalid_argument("block " + std::to_string(i) + " mixer kind does not match the schedule");
        }
    }
}

HthModel HthModel::init(const ModelConfig& cfg, Rng& rng, ModelInitOptions opts) {
    cfg.validate();
    const std::size_t D = cfg.model_dim;
    const bool z = opts.zero_init;
    auto maybe_zero = [&](Tensor::Shape s) { return z ? Tensor(s) : rng.truncated_normal_tensor(s, 0.02); };
    const auto sched = model_schedule(cfg);

    ModelWeights<Tensor> w;
    w.patch_w = rng.truncated_normal_tensor({cfg.patch_dim(), D}, 0.02);
    w.patch_b = Tensor({1, D});
    w.time_w1 = rng.truncated_normal_tensor({D, D}, 0.02);
    w.time_b1 = Tensor({1, D});
    w.time_w2 = rng.truncated_normal_tensor({D, D}, 0.02);
    w.time_b2 = Tensor({1, D});
    w.text_table = rng.normal_tensor({(cfg.n_classes + 1) * cfg.ctx_len, cfg.text_dim}, 1.0);
    w.text_w = rng.truncated_normal_tensor({cfg.text_dim, D}, 0.02);
    w.text_b = Tensor({1, D});
    for (std::size_t i = 0; i < cfg.n_blocks; ++i) {
        BlockWeights<Tensor> b;
        b.kind = sched.blocks[i].kind;
        b.norm_cross = init_norm(D);
        b.cross = attention::init_params(cfg.attention(), rng, z);
        b.norm_mix = init_norm(D);
        if (is_ssm(b.kind)) {
            b.ssm = hydra::init_params(cfg.hydra(), rng, {z});
        } else {
            b.self_attn = attention::init_params(cfg.attention(), rng, z);
        }
        b.norm_ffn = init_norm(D);
        b.ffn.w1 = rng.truncated_normal_tensor({D, 2 * D}, 0.02);
        b.ffn.b1 = Tensor({1, 2 * D});
        b.ffn.w2 = maybe_zero({2 * D, D});
        b.ffn.b2 = Tensor({1, D});
        w.blocks.push_back(std::move(b));
    }
    w.final_norm = init_norm(D);
    w.head_w = maybe_zero({D, cfg.patch_dim()});
    w.head_b = Tensor({1, cfg.patch_dim()});
    return HthModel(cfg, std::move(w));
}

void HthModel::set_stage(int stage) {
    ModelConfig next = cfg_;
    next.stage = stage;
    next.validate();
    cfg_ = next;
    schedule_ = model_schedule(cfg_);
}

Var HthModel::forward(const ModelWeights<Var>& w, const Tensor& noisy, std::span<const double> t,
                      std::span<const std::size_t> labels) const {
    if (noisy.rank() != 5 || noisy.dim(4) != cfg_.latent_channels) {
        throw ShapeError("denoise: expected latents [B, T, H, W, " + std::to_string(cfg_.latent_channels) + "], got " +
                         shape_string(noisy.shape()));
    }
    const std::size_t B = noisy.dim(0);
    if (t.size() != B || labels.size() != B) throw ShapeError("denoise: need one time and one label per sample");
    for (std::size_t l : labels) {
        if (l > cfg_.n_classes) throw std::invalid_argument("denoise: label out of range");
    }
    const scan::Grid grid = cfg_.token_grid_for({noisy.dim(1), noisy.dim(2), noisy.dim(3)});
    const std::size_t L = grid.size();
    const std::size_t D = cfg_.model_dim;

    const Tensor tokens = patchify(noisy, cfg_.patch).reshaped({B * L, cfg_.patch_dim()});
    Var x = ops::add_bias(ops::matmul(Var::constant(tokens), w.patch_w), w.patch_b);

    const Tensor pe = sinusoidal_pe(grid, D);
    Tensor pe_batch({B * L, D});
    for (std::size_t b = 0; b < B; ++b) {
        std::copy(pe.data().begin(), pe.data().end(), pe_batch.data().begin() + static_cast<std::ptrdiff_t>(b * L * D));
    }
    x = ops::add(x, Var::constant(std::move(pe_batch)));

    std::vector<std::size_t> sample_of_row(B * L);
    for (std::size_t i = 0; i < B * L; ++i) sample_of_row[i] = i / L;
    x = ops::add(x, ops::gather_rows(timestep_embed(w, cfg_, t), sample_of_row));

    std::vector<std::size_t> ctx_rows;
    ctx_rows.reserve(B * cfg_.ctx_len);
    for (std::size_t l : labels)
        for (std::size_t j = 0; j < cfg_.ctx_len; ++j) ctx_rows.push_back(l * cfg_.ctx_len + j);
    const Var ctx = ops::add_bias(ops::matmul(ops::gather_rows(w.text_table, ctx_rows), w.text_w), w.text_b);

    std::map<scan::Pattern, scan::ScanPlan> plans;
    const scan::ScanPlan identity = scan::build_plan(scan::Pattern::kH, grid);
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        const auto pattern = schedule_.pattern(i);
        const scan::ScanPlan* plan = &identity;
        if (pattern) {
            auto it = plans.find(*pattern);
            if (it == plans.end()) it = plans.emplace(*pattern, scan::build_plan(*pattern, grid)).first;
            plan = &it->second;
        }
        x = block_forward(w.blocks[i], cfg_, x, ctx, *plan);
    }

    const Var h = norm(w.final_norm, x);
    return ops::add_bias(ops::matmul(h, w.head_w), w.head_b);
}

Tensor HthModel::denoise(const Tensor& noisy, std::span<const double> t, std::span<const std::size_t> labels) const {
    const Var out = forward(constants(weights_), noisy, t, labels);
    const scan::Grid grid = cfg_.token_grid_for({noisy.dim(1), noisy.dim(2), noisy.dim(3)});
    return unpatchify(out.value().reshaped({noisy.dim(0), grid.frames, grid.height, grid.width, cfg_.patch_dim()}),
                      cfg_.patch);
}

std::size_t HthModel::parameter_count() const {
    std::size_t n = 0;
    visit_fields(const_cast<ModelWeights<Tensor>&>(weights_), "",
                 [&](const std::string&, Tensor& t) { n += t.size(); });
    return n;
}

}  // namespace hth
