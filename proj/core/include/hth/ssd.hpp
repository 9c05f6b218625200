// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-head selective state space model with a scalar decay per head.
//
//   h_t = a_bar_t * h_{t-1} + b_bar_t x_t^T        (h_t is N x P)
//   y_t = h_t^T c_t
//
// Three equivalent evaluations are provided: the sequential recurrence
// (ground truth), the materialized lower-triangular semiseparable matrix,
// and a chunked scan that applies dense blocks inside chunks and carries
// the N x P state between them.

#pragma once

#include <cstddef>

#include "hth/tensor.hpp"

namespace hth::ssd {

inline constexpr std::size_t kDefaultChunk = 64;
/// Below this |delta * a| the zero-order-hold input scale uses its limit.
inline constexpr double kSmallStep = 1e-8;

struct SsmStepParams {
    Vector delta;   // T, strictly positive
    double a_cont;  // continuous-time decay, strictly negative
    Matrix b_in;    // T x N
    Matrix c_out;   // T x N
};

struct DiscretizedParams {
    Vector a_bar;  // T, in (0, 1]
    Matrix b_bar;  // T x N

    std::size_t length() const { return static_cast<std::size_t>(a_bar.size()); }
    std::size_t state_dim() const { return static_cast<std::size_t>(b_bar.cols()); }
};

/// Zero-order hold: a_bar = exp(delta a), b_bar = (exp(delta a) - 1) / (delta a) * delta b.
DiscretizedParams discretize(const SsmStepParams& p);
DiscretizedParams discretize(const Vector& delta, double a_cont, const Matrix& b_in);

/// Scale applied to b_in by discretization, and its partials.
struct InputScale {
    double value;
    double d_delta;
    double d_a;
};
InputScale input_scale(double delta, double a_cont);

/// Sequential recurrence from a zero initial state. x is T x P.
Matrix ssm_recurrence(const DiscretizedParams& d, const Matrix& c, const Matrix& x);

/// Dense T x T lower-triangular matrix M with Y = M X. O(T^2 N).
Matrix materialize_matrix(const DiscretizedParams& d, const Matrix& c);

/// Chunked evaluation with chunk length `chunk` (1 <= chunk). O(T chunk (N + P) + T N P).
Matrix chunked_scan(const DiscretizedParams& d, const Matrix& c, const Matrix& x,
                    std::size_t chunk = kDefaultChunk);

struct ScanGradients {
    Matrix dx;      // T x P
    Vector ddelta;  // T
    double da = 0;  // scalar
    Matrix db;      // T x N
    Matrix dc;      // T x N
};

/// Reverse-mode adjoint of y = scan(discretize(p), p.c_out, x) given dL/dy.
ScanGradients scan_backward(const SsmStepParams& p, const Matrix& x, const Matrix& gy);

}  // namespace hth::ssd
