// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/data.hpp"

#include <cmath>
#include <stdexcept>

namespace hth::data {

Sample make_sample(const DataSpec& spec, std::size_t label, Rng& rng) {
    if (spec.n_classes == 0 || spec.n_classes > kClasses) throw std::invalid_argument("data: n_classes must be in [1, 8]");
    if (label >= spec.n_classes) throw std::invalid_argument("data: label out of range");
    const auto [T, H, W] = spec.latent;
    const std::size_t C = spec.channels;
    const double amp = rng.uniform(0.5, 1.5);
    const double phase = rng.uniform(-1.0, 1.0);
    const double cy = rng.uniform(0.0, static_cast<double>(H));
    const double cx = rng.uniform(0.0, static_cast<double>(W));

    Tensor out({T, H, W, C});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t w = 0; w < W; ++w) {
                const double y = (static_cast<double>(h) + 0.5) / static_cast<double>(H) * 2.0 - 1.0;
                const double x = (static_cast<double>(w) + 0.5) / static_cast<double>(W) * 2.0 - 1.0;
                double v = 0.0;
                switch (label) {
                    case 0: v = x + 0.5 * phase; break;
                    case 1: v = y + 0.5 * phase; break;
                    case 2: v = 0.5 * (x + y) + 0.5 * phase; break;
                    case 3: v = 0.5 * (x - y) + 0.5 * phase; break;
                    case 4: v = ((h + w) % 2 == 0 ? 1.0 : -1.0) * (0.75 + 0.25 * phase); break;
                    case 5: v = (((h / 2) + (w / 2)) % 2 == 0 ? 1.0 : -1.0) * (0.75 + 0.25 * phase); break;
                    case 6:
                    case 7: {
                        const double step = static_cast<double>(t) * 1.5;
                        const double by = label == 7 ? std::fmod(cy + step, static_cast<double>(H)) : cy;
                        const double bx = label == 6 ? std::fmod(cx + step, static_cast<double>(W)) : cx;
                        const double dy = static_cast<double>(h) + 0.5 - by;
                        const double dx = static_cast<double>(w) + 0.5 - bx;
                        const double r = 0.25 * static_cast<double>(std::min(H, W));
                        v = 2.0 * std::exp(-(dx * dx + dy * dy) / (2.0 * r * r)) - 1.0;
                        break;
                    }
                }
                for (std::size_t c = 0; c < C; ++c) {
                    const double gain = 1.0 - 0.5 * static_cast<double>(c) / static_cast<double>(std::max<std::size_t>(C, 1));
                    const double sign = c % 2 == 0 ? 1.0 : -1.0;
                    out[((t * H + h) * W + w) * C + c] = amp * gain * sign * v;
                }
            }
    return {std::move(out), label};
}

std::vector<Sample> make_dataset(const DataSpec& spec, std::size_t count, Rng& rng) {
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(make_sample(spec, i % spec.n_classes, rng));
    return out;
}

Tensor stack(std::span<const Sample> samples, std::span<const std::size_t> indices) {
    if (indices.empty()) throw std::invalid_argument("stack: no samples selected");
    const auto& first = samples[indices[0]].latents;
    Tensor::Shape shape{indices.size()};
    shape.insert(shape.end(), first.shape().begin(), first.shape().end());
    Tensor out(shape);
    const std::size_t per = first.size();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& s = samples[indices[i]].latents;
        if (s.shape() != first.shape()) throw ShapeError("stack: samples differ in shape");
        std::copy(s.data().begin(), s.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return out;
}

std::vector<std::size_t> labels_of(std::span<const Sample> samples, std::span<const std::size_t> indices) {
    std::vector<std::size_t> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(samples[i].label);
    return out;
}

}  // namespace hth::data
