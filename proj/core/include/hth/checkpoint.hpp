// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// HTH1 tensor files. Layout, all little-endian:
//   "HTH1" | u32 version | u32 count |
//   count x ( u32 name_len | name bytes | u32 rank | rank x u64 dim | f32 data )

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hth/tensor.hpp"

namespace hth::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

using NamedTensor = std::pair<std::string, Tensor>;

void write(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read(std::istream& in);

void save(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load(const std::filesystem::path& path);

/// Entry by name; throws FormatError if absent.
const Tensor& find(const std::vector<NamedTensor>& tensors, const std::string& name);
const Tensor* find_if_present(const std::vector<NamedTensor>& tensors, const std::string& name);

}  // namespace hth::checkpoint
