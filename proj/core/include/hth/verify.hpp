// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Oracle-equivalence and invariant suites run by `hth verify`.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hth::verify {

class Checker {
   public:
    /// Records a check; the first failure message is kept.
    void expect(bool ok, std::string_view what);
    /// Passes when err <= tol; tracks the worst err / tol seen.
    void within(double err, double tol, std::string_view what);

    bool passed() const { return failures_ == 0; }
    std::size_t checks() const { return checks_; }
    std::size_t failures() const { return failures_; }
    const std::string& first_failure() const { return first_failure_; }
    double worst_ratio() const { return worst_ratio_; }

   private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::string first_failure_;
    double worst_ratio_ = 0.0;
};

struct Suite {
    std::string name;
    std::string description;
    std::function<void(Checker&)> run;
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::size_t checks = 0;
    std::string message;  // first failure, or the exception text
    double seconds = 0.0;
};

/// Each suite is deterministic: it seeds its own generator.
const std::vector<Suite>& suites();
const Suite& suite(std::string_view name);

SuiteResult run_suite(const Suite& s);
/// Runs suites on up to `threads` workers; results keep the input order.
std::vector<SuiteResult> run_all(std::span<const Suite> list, std::size_t threads);

/// HTH_THREADS if set to a positive integer, else hardware concurrency.
std::size_t thread_budget();

// Individual suites, exposed for the acceptance runner.
void ssd_equivalence(Checker& c);
void ssd_structure(Checker& c);
void quasiseparable(Checker& c);
void op_gradients(Checker& c);
void model_gradient(Checker& c);
void scan_plans(Checker& c);
void stage_equivalence(Checker& c);
void diffusion_identities(Checker& c);
void model_contract(Checker& c);

}  // namespace hth::verify
