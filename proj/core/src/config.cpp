// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hth {

std::string_view mixer_name(MixerKind kind) {
    switch (kind) {
        case MixerKind::kHydra: return "hydra";
        case MixerKind::kAttention: return "attention";
        case MixerKind::kCausalSsm: return "causal-ssm";
        case MixerKind::kAdditiveSsm: return "bidi-add-ssm";
    }
    return "?";
}

MixerKind parse_mixer(std::string_view name) {
    for (MixerKind k : {MixerKind::kHydra, MixerKind::kAttention, MixerKind::kCausalSsm, MixerKind::kAdditiveSsm})
        if (mixer_name(k) == name) return k;
    throw std::invalid_argument("unknown mixer '" + std::string(name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw std::invalid_argument("config: bad value '" + std::string(v) + "' for " + std::string(key));
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean '" + std::string(v) + "' for " + std::string(key));
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
    Setter set;
    Getter get;
};

template <class T>
std::string fmt(T v) {
    if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    } else {
        return std::to_string(v);
    }
}

template <class M>
Field field(M accessor) {
    using T = std::remove_reference_t<decltype(accessor(std::declval<RunConfig&>()))>;
    return {[accessor](RunConfig& c, std::string_view k, std::string_view v) {
                if constexpr (std::is_same_v<T, bool>) {
                    accessor(c) = parse_bool(k, v);
                } else {
                    accessor(c) = parse_number<T>(k, v);
                }
            },
            [accessor](const RunConfig& c) { return fmt(accessor(const_cast<RunConfig&>(c))); }};
}

#define HTH_FIELD(expr) field([](RunConfig& c) -> auto& { return c.expr; })

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> f = {
        {"seed", HTH_FIELD(seed)},
        {"n_blocks", HTH_FIELD(model.n_blocks)},
        {"model_dim", HTH_FIELD(model.model_dim)},
        {"attn_heads", HTH_FIELD(model.attn_heads)},
        {"ssm_heads", HTH_FIELD(model.ssm_heads)},
        {"head_dim", HTH_FIELD(model.head_dim)},
        {"state_dim", HTH_FIELD(model.state_dim)},
        {"conv_window", HTH_FIELD(model.conv_window)},
        {"chunk", HTH_FIELD(model.chunk)},
        {"patch", HTH_FIELD(model.patch)},
        {"latent_channels", HTH_FIELD(model.latent_channels)},
        {"frames", HTH_FIELD(model.latent.frames)},
        {"height", HTH_FIELD(model.latent.height)},
        {"width", HTH_FIELD(model.latent.width)},
        {"text_dim", HTH_FIELD(model.text_dim)},
        {"ctx_len", HTH_FIELD(model.ctx_len)},
        {"n_classes", HTH_FIELD(model.n_classes)},
        {"stage", HTH_FIELD(model.stage)},
        {"mixer", {[](RunConfig& c, std::string_view, std::string_view v) { c.model.mixer = parse_mixer(v); },
                   [](const RunConfig& c) { return std::string(mixer_name(c.model.mixer)); }}},
        {"hybrid", HTH_FIELD(model.hybrid)},
        {"sample_steps", HTH_FIELD(diffusion.sample_steps)},
        {"guidance", HTH_FIELD(diffusion.guidance)},
        {"cond_drop", HTH_FIELD(diffusion.cond_drop)},
        {"steps", HTH_FIELD(train.steps)},
        {"batch", HTH_FIELD(train.batch)},
        {"lr", HTH_FIELD(train.lr)},
        {"log_every", HTH_FIELD(train.log_every)},
        {"n_samples", HTH_FIELD(train.n_samples)},
        {"n_heldout", HTH_FIELD(train.n_heldout)},
        {"fixed_noise", HTH_FIELD(train.fixed_noise)},
        {"eval_times", HTH_FIELD(train.eval_times)},
    };
    return f;
}

#undef HTH_FIELD

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                        std::string(key) + "'");
        it->second.set(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, f] : fields()) out += key + " = " + f.get(cfg) + "\n";
    return out;
}

}  // namespace hth
