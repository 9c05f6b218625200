// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hth/sequence.hpp"

namespace hth::ops {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

template <class F>
Tensor map(const Tensor& x, F f) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return out;
}

// Elementwise unary op with derivative f'(x) expressed from x.
template <class F, class DF>
Var unary(const Var& a, F f, DF df, const char* name) {
    Tensor out = map(a.value(), f);
    return Tape::record(std::move(out), {&a},
                        [a, df](const Tensor& g) {
                            const Tensor& x = a.value();
                            Tensor ga(x.shape());
                            for (std::size_t i = 0; i < x.size(); ++i) ga[i] = g[i] * df(x[i]);
                            accumulate_grad(a, ga);
                        },
                        name);
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    return Tape::record(a.value() + b.value(), {&a, &b},
                        [a, b](const Tensor& g) {
                            accumulate_grad(a, g);
                            accumulate_grad(b, g);
                        },
                        "add");
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    return Tape::record(a.value() - b.value(), {&a, &b},
                        [a, b](const Tensor& g) {
                            accumulate_grad(a, g);
                            accumulate_grad(b, -1.0 * g);
                        },
                        "sub");
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return Tape::record(std::move(out), {&a, &b},
                        [a, b](const Tensor& g) {
                            if (a.requires_grad()) {
                                Tensor ga = g;
                                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
                                accumulate_grad(a, ga);
                            }
                            if (b.requires_grad()) {
                                Tensor gb = g;
                                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
                                accumulate_grad(b, gb);
                            }
                        },
                        "mul");
}

Var scale(const Var& a, double s) {
    return Tape::record(s * a.value(), {&a}, [a, s](const Tensor& g) { accumulate_grad(a, s * g); }, "scale");
}

Var mul_scalar(const Var& a, const Var& s) {
    if (s.value().size() != 1) throw ShapeError("mul_scalar: scale must hold one value");
    const double sv = s.value()[0];
    return Tape::record(sv * a.value(), {&a, &s},
                        [a, s, sv](const Tensor& g) {
                            accumulate_grad(a, sv * g);
                            if (s.requires_grad()) {
                                double d = 0.0;
                                for (std::size_t i = 0; i < g.size(); ++i) d += g[i] * a.value()[i];
                                accumulate_grad(s, Tensor(s.shape(), d));
                            }
                        },
                        "mul_scalar");
}

Var add_bias(const Var& x, const Var& b) {
    if (b.value().size() != x.cols()) throw ShapeError("add_bias: bias length must equal column count");
    Tensor out = x.value();
    const Eigen::Map<const Eigen::RowVectorXd> bv(b.value().data().data(), static_cast<Eigen::Index>(x.cols()));
    out.matrix().rowwise() += bv;
    return Tape::record(std::move(out), {&x, &b},
                        [x, b](const Tensor& g) {
                            accumulate_grad(x, g);
                            if (b.requires_grad()) {
                                Eigen::RowVectorXd s = g.matrix().colwise().sum();
                                Tensor gb(b.shape());
                                std::copy(s.data(), s.data() + s.size(), gb.data().begin());
                                accumulate_grad(b, gb);
                            }
                        },
                        "add_bias");
}

Var mul_cols(const Var& x, const Var& s) {
    if (s.value().size() != x.cols()) throw ShapeError("mul_cols: scale length must equal column count");
    const Eigen::Map<const Eigen::RowVectorXd> sv(s.value().data().data(), static_cast<Eigen::Index>(x.cols()));
    Tensor out = x.value();
    out.matrix().array().rowwise() *= sv.array();
    return Tape::record(std::move(out), {&x, &s},
                        [x, s](const Tensor& g) {
                            const Eigen::Map<const Eigen::RowVectorXd> sv(s.value().data().data(),
                                                                          static_cast<Eigen::Index>(x.cols()));
                            if (x.requires_grad()) {
                                Tensor gx = g;
                                gx.matrix().array().rowwise() *= sv.array();
                                accumulate_grad(x, gx);
                            }
                            if (s.requires_grad()) {
                                Eigen::RowVectorXd d = (g.matrix().array() * x.value().matrix().array()).colwise().sum();
                                Tensor gs(s.shape());
                                std::copy(d.data(), d.data() + d.size(), gs.data().begin());
                                accumulate_grad(s, gs);
                            }
                        },
                        "mul_cols");
}

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    }
    Tensor out({a.rows(), b.cols()});
    out.matrix().noalias() = a.value().matrix() * b.value().matrix();
    return Tape::record(std::move(out), {&a, &b},
                        [a, b](const Tensor& g) {
                            if (a.requires_grad()) {
                                Tensor ga({a.rows(), a.cols()});
                                ga.matrix().noalias() = g.matrix() * b.value().matrix().transpose();
                                accumulate_grad(a, ga);
                            }
                            if (b.requires_grad()) {
                                Tensor gb({b.rows(), b.cols()});
                                gb.matrix().noalias() = a.value().matrix().transpose() * g.matrix();
                                accumulate_grad(b, gb);
                            }
                        },
                        "matmul");
}

Var transpose(const Var& a) {
    Tensor out({a.cols(), a.rows()});
    out.matrix() = a.value().matrix().transpose();
    return Tape::record(std::move(out), {&a},
                        [a](const Tensor& g) {
                            Tensor ga({a.rows(), a.cols()});
                            ga.matrix() = g.matrix().transpose();
                            accumulate_grad(a, ga);
                        },
                        "transpose");
}

Var reshape(const Var& a, Tensor::Shape shape) {
    return Tape::record(a.value().reshaped(std::move(shape)), {&a},
                        [a](const Tensor& g) { accumulate_grad(a, g.reshaped(a.shape())); }, "reshape");
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return Tape::record(Tensor::scalar(s), {&a},
                        [a](const Tensor& g) { accumulate_grad(a, Tensor(a.shape(), g[0])); }, "sum");
}

Var mean(const Var& a) {
    const double n = static_cast<double>(a.value().size());
    return scale(sum(a), 1.0 / n);
}

Var square(const Var& a) {
    return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, "square");
}

Var exp(const Var& a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }, "exp");
}

Var silu(const Var& a) {
    return unary(
        a, [](double x) { return x * sigmoid(x); },
        [](double x) {
            const double s = sigmoid(x);
            return s + x * s * (1.0 - s);
        },
        "silu");
}

Var softplus(const Var& a) {
    return unary(
        a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
        [](double x) { return sigmoid(x); }, "softplus");
}

Var mse(const Var& a, const Var& b) { return mean(square(sub(a, b))); }

Tensor silu(const Tensor& x) {
    return map(x, [](double v) { return v * sigmoid(v); });
}

Tensor rmsnorm(const Tensor& x, std::size_t group, double eps) {
    const std::size_t cols = x.cols();
    if (cols == 0) throw ShapeError("rmsnorm: empty last dimension");
    if (group == 0) group = cols;
    if (cols % group != 0) throw ShapeError("rmsnorm: group must divide column count");
    Tensor out = x;
    auto m = out.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (std::size_t c0 = 0; c0 < cols; c0 += group) {
            auto seg = m.row(r).segment(static_cast<Eigen::Index>(c0), static_cast<Eigen::Index>(group));
            const double rms = std::sqrt(seg.squaredNorm() / static_cast<double>(group) + eps);
            seg /= rms;
        }
    }
    return out;
}

Var rmsnorm(const Var& x, std::size_t group, double eps) {
    Tensor out = rmsnorm(x.value(), group, eps);
    if (group == 0) group = x.cols();
    return Tape::record(out, {&x},
                        [x, out, group, eps](const Tensor& g) {
                            const auto xm = x.value().matrix();
                            const auto ym = out.matrix();
                            Tensor gx(x.shape());
                            auto gm = gx.matrix();
                            const auto gin = g.matrix();
                            const auto n = static_cast<Eigen::Index>(group);
                            for (Eigen::Index r = 0; r < xm.rows(); ++r) {
                                for (Eigen::Index c0 = 0; c0 < xm.cols(); c0 += n) {
                                    const double rms = std::sqrt(xm.row(r).segment(c0, n).squaredNorm() /
                                                                     static_cast<double>(n) + eps);
                                    const auto y = ym.row(r).segment(c0, n);
                                    const auto gy = gin.row(r).segment(c0, n);
                                    const double dot = gy.dot(y) / static_cast<double>(n);
                                    gm.row(r).segment(c0, n) = (gy - y * dot) / rms;
                                }
                            }
                            accumulate_grad(x, gx);
                        },
                        "rmsnorm");
}

Var layernorm(const Var& x, double eps) {
    if (x.cols() == 0) throw ShapeError("layernorm: empty last dimension");
    Tensor out = x.value();
    auto m = out.matrix();
    Vector inv_std(m.rows());
    const double n = static_cast<double>(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mu = m.row(r).mean();
        m.row(r).array() -= mu;
        inv_std[r] = 1.0 / std::sqrt(m.row(r).squaredNorm() / n + eps);
        m.row(r) *= inv_std[r];
    }
    return Tape::record(out, {&x},
                        [x, out, inv_std, n](const Tensor& g) {
                            Tensor gx(x.shape());
                            auto gm = gx.matrix();
                            const auto ym = out.matrix();
                            const auto gin = g.matrix();
                            for (Eigen::Index r = 0; r < ym.rows(); ++r) {
                                const double gmean = gin.row(r).sum() / n;
                                const double gydot = gin.row(r).dot(ym.row(r)) / n;
                                gm.row(r) = (gin.row(r).array() - gmean - ym.row(r).array() * gydot) * inv_std[r];
                            }
                            accumulate_grad(x, gx);
                        },
                        "layernorm");
}

Tensor softmax_rows(const Tensor& x) {
    if (x.cols() == 0) throw ShapeError("softmax_rows: empty last dimension");
    Tensor out = x;
    auto m = out.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp();
        m.row(r) /= m.row(r).sum();
    }
    return out;
}

Var softmax_rows(const Var& x) {
    Tensor out = softmax_rows(x.value());
    return Tape::record(out, {&x},
                        [x, out](const Tensor& g) {
                            Tensor gx(x.shape());
                            const auto p = out.matrix();
                            const auto gin = g.matrix();
                            auto gm = gx.matrix();
                            for (Eigen::Index r = 0; r < p.rows(); ++r) {
                                const double dot = gin.row(r).dot(p.row(r));
                                gm.row(r) = p.row(r).array() * (gin.row(r).array() - dot);
                            }
                            accumulate_grad(x, gx);
                        },
                        "softmax_rows");
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t count) {
    if (begin + count > x.cols()) throw ShapeError("slice_cols out of range");
    const auto b = static_cast<Eigen::Index>(begin);
    const auto c = static_cast<Eigen::Index>(count);
    Tensor out({x.rows(), count});
    out.matrix() = x.value().matrix().middleCols(b, c);
    return Tape::record(std::move(out), {&x},
                        [x, b, c](const Tensor& g) {
                            Tensor gx(x.shape());
                            gx.matrix().middleCols(b, c) = g.matrix();
                            accumulate_grad(x, gx);
                        },
                        "slice_cols");
}

Var slice_rows(const Var& x, std::size_t begin, std::size_t count) {
    if (begin + count > x.rows()) throw ShapeError("slice_rows out of range");
    const auto b = static_cast<Eigen::Index>(begin);
    const auto c = static_cast<Eigen::Index>(count);
    Tensor out({count, x.cols()});
    out.matrix() = x.value().matrix().middleRows(b, c);
    return Tape::record(std::move(out), {&x},
                        [x, b, c](const Tensor& g) {
                            Tensor gx(x.shape());
                            gx.matrix().middleRows(b, c) = g.matrix();
                            accumulate_grad(x, gx);
                        },
                        "slice_rows");
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols of nothing");
    const std::size_t rows = parts[0].rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
        cols += p.cols();
    }
    Tensor out({rows, cols});
    std::vector<std::size_t> offsets;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        offsets.push_back(static_cast<std::size_t>(off));
        out.matrix().middleCols(off, static_cast<Eigen::Index>(p.cols())) = p.value().matrix();
        off += static_cast<Eigen::Index>(p.cols());
    }
    std::vector<Var> saved(parts.begin(), parts.end());
    return Tape::record(std::move(out), parts,
                        [saved, offsets](const Tensor& g) {
                            for (std::size_t i = 0; i < saved.size(); ++i) {
                                if (!saved[i].requires_grad()) continue;
                                Tensor gp({saved[i].rows(), saved[i].cols()});
                                gp.matrix() = g.matrix().middleCols(static_cast<Eigen::Index>(offsets[i]),
                                                                    static_cast<Eigen::Index>(saved[i].cols()));
                                accumulate_grad(saved[i], gp);
                            }
                        },
                        "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_rows of nothing");
    const std::size_t cols = parts[0].cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw ShapeError("concat_rows: column counts differ");
        rows += p.rows();
    }
    Tensor out({rows, cols});
    std::vector<std::size_t> offsets;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        offsets.push_back(static_cast<std::size_t>(off));
        out.matrix().middleRows(off, static_cast<Eigen::Index>(p.rows())) = p.value().matrix();
        off += static_cast<Eigen::Index>(p.rows());
    }
    std::vector<Var> saved(parts.begin(), parts.end());
    return Tape::record(std::move(out), parts,
                        [saved, offsets](const Tensor& g) {
                            for (std::size_t i = 0; i < saved.size(); ++i) {
                                if (!saved[i].requires_grad()) continue;
                                Tensor gp({saved[i].rows(), saved[i].cols()});
                                gp.matrix() = g.matrix().middleRows(static_cast<Eigen::Index>(offsets[i]),
                                                                    static_cast<Eigen::Index>(saved[i].rows()));
                                accumulate_grad(saved[i], gp);
                            }
                        },
                        "concat_rows");
}

Var gather_rows(const Var& x, std::span<const std::size_t> index) {
    const std::size_t cols = x.cols();
    const std::size_t rows = x.rows();
    Tensor out({index.size(), cols});
    const auto& src = x.value().data();
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= rows) throw ShapeError("gather_rows: index out of range");
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(index[i] * cols), cols,
                    out.data().begin() + static_cast<std::ptrdiff_t>(i * cols));
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return Tape::record(std::move(out), {&x},
                        [x, idx, cols](const Tensor& g) {
                            Tensor gx(x.shape());
                            for (std::size_t i = 0; i < idx.size(); ++i) {
                                for (std::size_t c = 0; c < cols; ++c) gx[idx[i] * cols + c] += g[i * cols + c];
                            }
                            accumulate_grad(x, gx);
                        },
                        "gather_rows");
}

Var flip_rows(const Var& x) {
    Tensor out = Tensor::from_matrix(seq::flip(x.value().matrix()));
    return Tape::record(std::move(out), {&x},
                        [x](const Tensor& g) { accumulate_grad(x, Tensor::from_matrix(seq::flip(g.matrix()))); },
                        "flip_rows");
}

Var shift_rows(const Var& x) {
    Tensor out = Tensor::from_matrix(seq::shift(x.value().matrix()));
    return Tape::record(std::move(out), {&x},
                        [x](const Tensor& g) {
                            // adjoint of a down-shift is an up-shift
                            Tensor gx(x.shape());
                            const auto n = static_cast<Eigen::Index>(x.rows());
                            if (n > 1) gx.matrix().topRows(n - 1) = g.matrix().bottomRows(n - 1);
                            accumulate_grad(x, gx);
                        },
                        "shift_rows");
}

Var depthwise_conv1d(const Var& x, const Var& w, const Var& b, Padding padding) {
    const std::size_t L = x.rows();
    const std::size_t C = x.cols();
    if (w.rows() != C) throw ShapeError("depthwise_conv1d: weight rows must equal channels");
    const std::size_t K = w.cols();
    if (K % 2 == 0) throw ShapeError("depthwise_conv1d: window must be odd");
    if (b.value().size() != C) throw ShapeError("depthwise_conv1d: bias length must equal channels");
    const auto half = static_cast<std::ptrdiff_t>(padding == Padding::kCausal ? K - 1 : K / 2);
    const auto& xv = x.value();
    const auto& wv = w.value();
    Tensor out({L, C});
    for (std::size_t t = 0; t < L; ++t) {
        for (std::size_t c = 0; c < C; ++c) out[t * C + c] = b.value()[c];
        for (std::size_t k = 0; k < K; ++k) {
            const auto src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
            const auto s = static_cast<std::size_t>(src);
            for (std::size_t c = 0; c < C; ++c) out[t * C + c] += wv[c * K + k] * xv[s * C + c];
        }
    }
    return Tape::record(std::move(out), {&x, &w, &b},
                        [x, w, b, L, C, K, half](const Tensor& g) {
                            const auto& xv = x.value();
                            const auto& wv = w.value();
                            Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
                            for (std::size_t t = 0; t < L; ++t) {
                                for (std::size_t c = 0; c < C; ++c) gb[c] += g[t * C + c];
                                for (std::size_t k = 0; k < K; ++k) {
                                    const auto src =
                                        static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
                                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
                                    const auto s = static_cast<std::size_t>(src);
                                    for (std::size_t c = 0; c < C; ++c) {
                                        gx[s * C + c] += wv[c * K + k] * g[t * C + c];
                                        gw[c * K + k] += xv[s * C + c] * g[t * C + c];
                                    }
                                }
                            }
                            accumulate_grad(x, gx);
                            accumulate_grad(w, gw);
                            accumulate_grad(b, gb);
                        },
                        "depthwise_conv1d");
}

}  // namespace hth::ops
