// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hth/config.hpp"

namespace hth {

const MixerResult& CompareReport::find(MixerKind kind) const {
    for (const auto& r : rows)
        if (r.kind == kind) return r;
    throw std::out_of_range("compare report has no row for " + std::string(mixer_name(kind)));
}

double asymmetry_ratio(std::span<const double> token_error) {
    if (token_error.empty()) throw std::invalid_argument("asymmetry_ratio: no tokens");
    return token_error.front() / token_error.back();
}

std::string CompareReport::to_text() const {
    std::string out = "mixer,train_loss,heldout_loss,heldout_zero_loss,asymmetry\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%.6g,%.4f\n", std::string(mixer_name(r.kind)).c_str(),
                      r.final_train_loss, r.heldout_loss, r.heldout_zero_loss, r.asymmetry);
        out += buf;
    }
    auto has = [&](MixerKind k) {
        return std::any_of(rows.begin(), rows.end(), [&](const MixerResult& r) { return r.kind == k; });
    };
    if (has(MixerKind::kHydra) && has(MixerKind::kAdditiveSsm)) {
        const double h = find(MixerKind::kHydra).heldout_loss;
        const double a = find(MixerKind::kAdditiveSsm).heldout_loss;
        std::snprintf(buf, sizeof buf, "hydra vs bidi-add-ssm heldout: %.6g %s %.6g\n", h, h <= a ? "<=" : ">", a);
        out += buf;
    }
    return out;
}

CompareReport compare_mixers(const RunConfig& base, std::span<const MixerKind> mixers, std::size_t threads,
                             const ProgressFn& progress) {
    CompareReport report;
    report.rows.resize(mixers.size());
    std::mutex progress_mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (std::size_t i = next++; i < mixers.size(); i = next++) {
            try {
                RunConfig cfg = base;
                cfg.model.mixer = mixers[i];
                cfg.model.hybrid = false;
                Trainer tr(cfg);
                for (std::size_t s = 0; s < cfg.train.steps; ++s) {
                    const double loss = tr.step();
                    if (progress && cfg.train.log_every && (s + 1) % cfg.train.log_every == 0) {
                        std::lock_guard lock(progress_mu);
                        progress(mixers[i], s + 1, loss);
                    }
                }
                MixerResult& r = report.rows[i];
                r.kind = mixers[i];
                r.final_train_loss = tr.evaluate_train().loss;
                const EvalResult held = tr.evaluate_heldout();
                r.heldout_loss = held.loss;
                r.heldout_zero_loss = held.zero_loss;
                r.token_error = held.token_error;
                r.asymmetry = asymmetry_ratio(held.token_error);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(mixers.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return report;
}

}  // namespace hth
