// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable whole-tensor operations. Matrix-shaped operations treat a
// rank-1 tensor of length n as a 1 x n row.

#pragma once

#include <cstddef>
#include <span>

#include "hth/autodiff.hpp"

namespace hth::ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// a * s where s holds exactly one value.
Var mul_scalar(const Var& a, const Var& s);

/// x [R,C] + b broadcast over rows; b has C values.
Var add_bias(const Var& x, const Var& b);
/// x [R,C] * s broadcast over rows; s has C values.
Var mul_cols(const Var& x, const Var& s);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, Tensor::Shape shape);

Var sum(const Var& a);
Var mean(const Var& a);
Var square(const Var& a);
Var exp(const Var& a);
Var silu(const Var& a);
Var softplus(const Var& a);
Var mse(const Var& a, const Var& b);

/// Normalizes each contiguous group of `group` columns in every row to unit
/// root-mean-square. `group == 0` means the whole row.
Var rmsnorm(const Var& x, std::size_t group = 0, double eps = 1e-6);
/// Zero mean, unit variance per row; no affine part.
Var layernorm(const Var& x, double eps = 1e-6);
Var softmax_rows(const Var& x);

Var slice_cols(const Var& x, std::size_t begin, std::size_t count);
Var slice_rows(const Var& x, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
/// out[i] = x[index[i]]; repeated indices accumulate in the backward pass.
Var gather_rows(const Var& x, std::span<const std::size_t> index);

/// Reverses the row (time) order.
Var flip_rows(const Var& x);
/// Shifts rows down by one, zero-filling row 0 and dropping the last row.
Var shift_rows(const Var& x);

/// Centered depthwise 1D convolution along rows with zero padding.
/// x [L,C], w [C,K] with K odd, b [C].
enum class Padding { kCentered, kCausal };
// Odd window K. Centered: output t sees t-K/2 .. t+K/2; causal: t-K+1 .. t.
Var depthwise_conv1d(const Var& x, const Var& w, const Var& b, Padding padding = Padding::kCentered);

// Plain value versions used by inference-only code paths.
Tensor softmax_rows(const Tensor& x);
Tensor rmsnorm(const Tensor& x, std::size_t group = 0, double eps = 1e-6);
Tensor silu(const Tensor& x);

}  // namespace hth::ops
