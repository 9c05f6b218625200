// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/fault.hpp"

#include <atomic>

namespace hth::fault {

namespace {
std::atomic<Fault> g_fault{Fault::kNone};
}

void inject(Fault f) { g_fault.store(f, std::memory_order_relaxed); }

Fault active() { return g_fault.load(std::memory_order_relaxed); }

std::optional<Fault> parse(std::string_view name) {
    if (name.empty() || name == "none") return Fault::kNone;
    if (name == "shift-sign") return Fault::kShiftSign;
    return std::nullopt;
}

}  // namespace hth::fault
