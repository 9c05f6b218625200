// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

static_assert(std::endian::native == std::endian::little, "HTH1 I/O assumes a little-endian host");

namespace hth::checkpoint {

namespace {

constexpr char kMagic[4] = {'H', 'T', 'H', '1'};
// Guards against allocating garbage sizes from a corrupt header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("HTH1: truncated file");
    return v;
}

}  // namespace

void write(std::ostream& out, const std::vector<NamedTensor>& tensors) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
        std::vector<float> buf(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<float>(t[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("HTH1: write failed");
}

std::vector<NamedTensor> read(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("HTH1: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw FormatError("HTH1: unsupported version " + std::to_string(version));
    const auto count = get<std::uint32_t>(in);
    std::vector<NamedTensor> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = get<std::uint32_t>(in);
        if (len > 4096) throw FormatError("HTH1: implausible name length");
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) throw FormatError("HTH1: truncated name");
        const auto rank = get<std::uint32_t>(in);
        if (rank > 8) throw FormatError("HTH1: implausible rank for " + name);
        Tensor::Shape shape(rank);
        std::uint64_t n = 1;
        for (auto& d : shape) {
            d = get<std::uint64_t>(in);
            n *= d;
            if (n > kMaxElements) throw FormatError("HTH1: tensor too large: " + name);
        }
        std::vector<float> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw FormatError("HTH1: truncated data for " + name);
        Tensor t(shape);
        for (std::size_t k = 0; k < n; ++k) t[k] = buf[k];
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

void save(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write(out, tensors);
}

std::vector<NamedTensor> load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read(in);
}

const Tensor* find_if_present(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& find(const std::vector<NamedTensor>& tensors, const std::string& name) {
    const Tensor* t = find_if_present(tensors, name);
    if (!t) throw FormatError("HTH1: missing tensor " + name);
    return *t;
}

}  // namespace hth::checkpoint
