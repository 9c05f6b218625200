// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/ssd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hth::ssd {

namespace {

void check_lengths(const DiscretizedParams& d, const Matrix& c, const Matrix* x) {
    const auto T = d.a_bar.size();
    if (d.b_bar.rows() != T || c.rows() != T || (x && x->rows() != T)) {
        throw ShapeError("ssd: sequence lengths of a_bar, b_bar, c and x must agree");
    }
    if (c.cols() != d.b_bar.cols()) throw ShapeError("ssd: b_bar and c must share the state dimension");
}

// L(i, j) = prod_{k=j+1..i} a_bar[begin + k] for j <= i, zero above the diagonal.
Matrix segment_decay(const Vector& a_bar, Eigen::Index begin, Eigen::Index len) {
    Matrix L = Matrix::Zero(len, len);
    for (Eigen::Index i = 0; i < len; ++i) {
        double decay = 1.0;
        for (Eigen::Index j = i; j >= 0; --j) {
            L(i, j) = decay;
            decay *= a_bar[begin + j];
        }
    }
    return L;
}

}  // namespace

InputScale input_scale(double delta, double a_cont) {
    const double z = delta * a_cont;
    if (std::abs(z) < kSmallStep) return {delta, 1.0, 0.0};
    const double em1 = std::expm1(z);
    // value = expm1(delta a) / a
    return {em1 / a_cont, std::exp(z), (z * std::exp(z) - em1) / (a_cont * a_cont)};
}

DiscretizedParams discretize(const Vector& delta, double a_cont, const Matrix& b_in) {
    if (b_in.rows() != delta.size()) throw ShapeError("discretize: delta and b_in lengths differ");
    if (!(a_cont < 0.0)) throw std::invalid_argument("discretize: continuous decay must be negative");
    DiscretizedParams out{Vector(delta.size()), Matrix(b_in.rows(), b_in.cols())};
    for (Eigen::Index t = 0; t < delta.size(); ++t) {
        if (!(delta[t] > 0.0)) {
            throw std::invalid_argument("discretize: step size must be positive, got " + std::to_string(delta[t]));
        }
        out.a_bar[t] = std::exp(delta[t] * a_cont);
        out.b_bar.row(t) = input_scale(delta[t], a_cont).value * b_in.row(t);
    }
    return out;
}

DiscretizedParams discretize(const SsmStepParams& p) { return discretize(p.delta, p.a_cont, p.b_in); }

Matrix ssm_recurrence(const DiscretizedParams& d, const Matrix& c, const Matrix& x) {
    check_lengths(d, c, &x);
    const auto T = x.rows();
    Matrix h = Matrix::Zero(d.b_bar.cols(), x.cols());
    Matrix y(T, x.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
        h *= d.a_bar[t];
        h.noalias() += d.b_bar.row(t).transpose() * x.row(t);
        y.row(t).noalias() = c.row(t) * h;
    }
    return y;
}

Matrix materialize_matrix(const DiscretizedParams& d, const Matrix& c) {
    check_lengths(d, c, nullptr);
    const auto T = d.a_bar.size();
    if (T < 1) throw ShapeError("materialize_matrix: empty sequence");
    Matrix M = segment_decay(d.a_bar, 0, T);
    M.array() *= (c * d.b_bar.transpose()).array();
    return M;
}

Matrix chunked_scan(const DiscretizedParams& d, const Matrix& c, const Matrix& x, std::size_t chunk) {
    if (chunk < 1) throw std::invalid_argument("chunked_scan: chunk must be at least 1");
    check_lengths(d, c, &x);
    const auto T = x.rows();
    const auto Q = static_cast<Eigen::Index>(chunk);
    Matrix y(T, x.cols());
    Matrix h = Matrix::Zero(d.b_bar.cols(), x.cols());
    for (Eigen::Index s = 0; s < T; s += Q) {
        const Eigen::Index len = std::min(Q, T - s);
        const Matrix L = segment_decay(d.a_bar, s, len);
        const auto cb = c.middleRows(s, len);
        const auto bb = d.b_bar.middleRows(s, len);
        const auto xb = x.middleRows(s, len);

        // intra-chunk: dense semiseparable block
        Matrix G = (cb * bb.transpose()).cwiseProduct(L);
        auto yb = y.middleRows(s, len);
        yb.noalias() = G * xb;

        // contribution of the carried state: cum[i] = prod_{k=s..i} a_bar[k]
        const Vector cum = L.col(0) * d.a_bar[s];
        yb.noalias() += cum.asDiagonal() * (cb * h);

        // carry: h <- cum[last] h + sum_j L(last, j) b_bar_j x_j^T
        const Vector w = L.row(len - 1).transpose();
        h *= cum[len - 1];
        h.noalias() += (w.asDiagonal() * bb).transpose() * xb;
    }
    return y;
}

ScanGradients scan_backward(const SsmStepParams& p, const Matrix& x, const Matrix& gy) {
    const DiscretizedParams d = discretize(p);
    check_lengths(d, p.c_out, &x);
    const auto T = x.rows();
    const auto N = d.b_bar.cols();
    const auto P = x.cols();

    std::vector<Matrix> h(static_cast<std::size_t>(T));
    Matrix state = Matrix::Zero(N, P);
    for (Eigen::Index t = 0; t < T; ++t) {
        state *= d.a_bar[t];
        state.noalias() += d.b_bar.row(t).transpose() * x.row(t);
        h[static_cast<std::size_t>(t)] = state;
    }

    ScanGradients g{Matrix(T, P), Vector(T), 0.0, Matrix(T, N), Matrix(T, N)};
    Matrix gh = Matrix::Zero(N, P);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        if (t + 1 < T) gh *= d.a_bar[t + 1];
        gh.noalias() += p.c_out.row(t).transpose() * gy.row(t);

        const Matrix& ht = h[static_cast<std::size_t>(t)];
        g.dc.row(t).noalias() = (ht * gy.row(t).transpose()).transpose();
        g.dx.row(t).noalias() = d.b_bar.row(t) * gh;
        const Eigen::RowVectorXd gbbar = (gh * x.row(t).transpose()).transpose();

        const double ga_bar = t > 0 ? gh.cwiseProduct(h[static_cast<std::size_t>(t - 1)]).sum() : 0.0;
        const InputScale sc = input_scale(p.delta[t], p.a_cont);
        const double gscale = gbbar.dot(p.b_in.row(t));
        g.db.row(t) = sc.value * gbbar;

        const double a_bar = d.a_bar[t];
        g.ddelta[t] = ga_bar * p.a_cont * a_bar + gscale * sc.d_delta;
        g.da += ga_bar * p.delta[t] * a_bar + gscale * sc.d_a;
    }
    return g;
}

}  // namespace hth::ssd
