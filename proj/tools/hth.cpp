// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hth/bench.hpp"
#include "hth/checkpoint.hpp"
#include "hth/compare.hpp"
#include "hth/config.hpp"
#include "hth/fault.hpp"
#include "hth/verify.hpp"

namespace {

using namespace hth;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split(s, ',')) out.push_back(std::stoull(item));
    return out;
}

RunConfig config_from(const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> stage) {
    RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
    if (seed) cfg.seed = *seed;
    if (stage) cfg.model.stage = *stage;
    cfg.validate();
    return cfg;
}

// Frames side by side, channel 0, min-max scaled to 8 bits.
void write_pgm(const std::string& path, const Tensor& latents) {
    const std::size_t T = latents.dim(1), H = latents.dim(2), W = latents.dim(3), C = latents.dim(4);
    double lo = latents[0], hi = latents[0];
    for (double v : latents.data()) lo = std::min(lo, v), hi = std::max(hi, v);
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "P5\n" << T * W << ' ' << H << "\n255\n";
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t w = 0; w < W; ++w) {
                const double v = latents[((t * H + h) * W + w) * C];
                out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (v - lo) / span))));
            }
}

int cmd_verify(const std::vector<std::string>& only) {
    std::vector<verify::Suite> list;
    if (only.empty()) {
        list = verify::suites();
    } else {
        for (const auto& n : only) list.push_back(verify::suite(n));
    }
    const auto results = verify::run_all(list, verify::thread_budget());
    int failed = 0;
    for (const auto& r : results) {
        std::printf("%-18s %s  %6zu checks  %7.2fs%s%s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.checks,
                    r.seconds, r.passed ? "" : "  ", r.message.c_str());
        failed += r.passed ? 0 : 1;
    }
    if (failed) std::printf("%d suite(s) failed\n", failed);
    return failed ? 1 : 0;
}

int cmd_train(const RunConfig& cfg, const std::string& out, const std::string& resume, std::optional<std::size_t> steps) {
    Trainer tr(cfg);
    if (!resume.empty()) tr.load(resume);
    const std::size_t total = steps.value_or(cfg.train.steps);
    std::printf("seed %llu  params %zu  schedule %s\n", static_cast<unsigned long long>(cfg.seed),
                tr.model().parameter_count(), tr.model().schedule().describe().c_str());
    while (tr.steps_done() < total) {
        const double loss = tr.step();
        if (cfg.train.log_every && tr.steps_done() % cfg.train.log_every == 0)
            std::printf("step %zu loss %.6f\n", tr.steps_done(), loss);
    }
    const auto e = tr.evaluate_train();
    std::printf("train eval loss %.6f  zero-predictor %.6f  ratio %.4f\n", e.loss, e.zero_loss, e.loss / e.zero_loss);
    tr.save(out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_sample(const RunConfig& cfg, const std::string& ckpt, const std::string& out, const std::string& grid,
               std::size_t label, std::optional<double> guidance, std::size_t count, const std::string& pgm) {
    Rng init_rng(0);
    HthModel model = HthModel::init(cfg.model, init_rng);
    load_weights(model, ckpt);
    scan::Grid g = cfg.model.latent;
    if (!grid.empty()) {
        const auto dims = parse_sizes(grid);
        if (dims.size() != 3) throw std::invalid_argument("--grid expects T,H,W");
        g = {dims[0], dims[1], dims[2]};
    }
    if (label > model.null_label()) throw std::invalid_argument("--class out of range");
    diffusion::DiffusionConfig dc = cfg.diffusion;
    if (guidance) dc.guidance = *guidance;
    Rng rng(cfg.seed);
    const Tensor init = rng.normal_tensor({count, g.frames, g.height, g.width, cfg.model.latent_channels});
    const std::vector<std::size_t> labels(count, label);
    const Tensor x = diffusion::sample(model, init, labels, dc);
    checkpoint::save(out, {{"latents", x}});
    std::printf("wrote %s  shape %s  finite %s\n", out.c_str(), shape_string(x.shape()).c_str(),
                x.all_finite() ? "yes" : "no");
    if (!pgm.empty()) {
        write_pgm(pgm, x);
        std::printf("wrote %s\n", pgm.c_str());
    }
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& tokens, const std::vector<std::string>& mixers, std::size_t reps,
              std::uint64_t seed, std::size_t attention_cap, const std::string& out) {
    if (!std::is_sorted(tokens.begin(), tokens.end())) throw std::invalid_argument("--tokens must be ascending");
    std::vector<bench::BenchRecord> records;
    for (const auto& name : mixers) {
        const MixerKind kind = parse_mixer(name);
        for (std::size_t t : tokens) {
            if (kind == MixerKind::kAttention && t > attention_cap) continue;
            records.push_back(bench::bench_mixer(kind, t, {.reps = reps, .seed = seed}));
            const auto& r = records.back();
            std::fprintf(stderr, "%s %zu %.3f ms\n", r.mixer.c_str(), r.tokens, r.ms_mean);
        }
    }
    if (out.empty()) {
        bench::write_csv(std::cout, records);
    } else {
        std::ofstream f(out);
        bench::write_csv(f, records);
        std::printf("wrote %s\n", out.c_str());
    }
    for (const auto& name : mixers) {
        try {
            std::printf("slope %s %.3f\n", name.c_str(), bench::loglog_slope(records, name, 0, SIZE_MAX));
        } catch (const std::invalid_argument&) {
        }
    }
    if (const auto x = bench::crossover(records, "hydra", "attention")) {
        std::printf("crossover: hydra first faster at %zu tokens\n", *x);
    }
    try {
        if (const auto x = bench::fitted_crossover(records, "hydra", "attention"))
            std::printf("crossover: fitted power laws meet at %.0f tokens\n", *x);
    } catch (const std::invalid_argument&) {
    }
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& out) {
    const MixerKind all[] = {MixerKind::kCausalSsm, MixerKind::kAdditiveSsm, MixerKind::kHydra, MixerKind::kAttention};
    const auto report = compare_mixers(cfg, all, verify::thread_budget(), [](MixerKind k, std::size_t step, double loss) {
        std::printf("%s step %zu loss %.6f\n", std::string(mixer_name(k)).c_str(), step, loss);
        std::fflush(stdout);
    });
    const std::string text = report.to_text();
    std::printf("%s", text.c_str());
    if (!out.empty()) {
        std::ofstream(out) << text;
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* f = std::getenv("HTH_INJECT_FAULT")) {
        const auto fault = hth::fault::parse(f);
        if (!fault) {
            std::fprintf(stderr, "unknown HTH_INJECT_FAULT value '%s'\n", f);
            return 2;
        }
        hth::fault::inject(*fault);
    }

    CLI::App app{"Hybrid Hydra/attention diffusion denoiser toolkit"};
    app.require_subcommand(1);

    std::string config, train_out, sample_out, bench_out, compare_out, resume, ckpt, grid, pgm, tokens_arg = "1024,2048,4096,8192,16384,32768,65536";
    std::string mixers_arg = "hydra,attention";
    std::optional<std::uint64_t> seed;
    std::optional<int> stage;
    std::optional<double> guidance;
    std::optional<std::size_t> steps;
    std::size_t reps = hth::bench::kMinReps, label = 0, count = 1, attention_cap = 16384;
    std::vector<std::string> only;

    auto* verify = app.add_subcommand("verify", "run the oracle and invariant suites");
    verify->add_option("--suite", only, "run only these suites");

    auto* train = app.add_subcommand("train", "train the toy model and write an HTH1 checkpoint");
    train->add_option("--config", config, "key=value run configuration");
    train->add_option("--seed", seed);
    train->add_option("--stage", stage)->check(CLI::IsMember({1, 2}));
    train->add_option("--out", train_out, "checkpoint path")->default_val("hth.ckpt");
    train->add_option("--resume", resume, "continue from a checkpoint written by train");
    train->add_option("--steps", steps, "stop after this many total steps");

    auto* sample = app.add_subcommand("sample", "sample latents from a checkpoint");
    sample->add_option("--config", config)->required();
    sample->add_option("--checkpoint", ckpt)->required();
    sample->add_option("--seed", seed);
    sample->add_option("--stage", stage)->check(CLI::IsMember({1, 2}));
    sample->add_option("--guidance", guidance);
    sample->add_option("--grid", grid, "latent grid T,H,W (default: training grid)");
    sample->add_option("--class", label, "class label; n_classes selects the null prompt");
    sample->add_option("--count", count, "samples to draw");
    sample->add_option("--out", sample_out)->default_val("samples.hth");
    sample->add_option("--pgm", pgm, "also write channel 0 as a PGM image");

    auto* bench = app.add_subcommand("bench", "time mixer forwards against sequence length");
    bench->add_option("--tokens", tokens_arg, "ascending comma-separated token counts");
    bench->add_option("--mixers", mixers_arg, "comma-separated mixers");
    bench->add_option("--reps", reps)->check(CLI::Range(std::size_t{5}, std::size_t{1000}));
    bench->add_option("--seed", seed);
    bench->add_option("--max-attention-tokens", attention_cap, "skip attention above this length");
    bench->add_option("--out", bench_out, "CSV path (default stdout)");

    auto* compare = app.add_subcommand("compare-mixers", "train one toy model per token mixer");
    compare->add_option("--config", config);
    compare->add_option("--seed", seed);
    compare->add_option("--stage", stage)->check(CLI::IsMember({1, 2}));
    compare->add_option("--out", compare_out, "report path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) return cmd_verify(only);
        if (*train) return cmd_train(config_from(config, seed, stage), train_out, resume, steps);
        if (*sample) return cmd_sample(config_from(config, seed, stage), ckpt, sample_out, grid, label, guidance, count, pgm);
        if (*bench) return cmd_bench(parse_sizes(tokens_arg), split(mixers_arg, ','), reps, seed.value_or(0), attention_cap, bench_out);
        if (*compare) return cmd_compare(config_from(config, seed, stage), compare_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
