// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deliberate fault injection so the verification suites can be shown to
// catch a broken kernel. Never enabled outside mutation probes.

#pragma once

#include <optional>
#include <string_view>

namespace hth::fault {

enum class Fault {
    kNone,
    kShiftSign,  // shift() negates the shifted values
};

void inject(Fault f);
Fault active();
inline bool enabled(Fault f) { return active() == f; }

/// Parses the HTH_INJECT_FAULT environment value ("shift-sign").
std::optional<Fault> parse(std::string_view name);

}  // namespace hth::fault
