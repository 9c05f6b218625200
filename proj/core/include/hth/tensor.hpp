// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensor of doubles. Everything else in the library passes
// these around by value.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hth {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Raised whenever a public operation would produce NaN or Inf.
class NonFiniteError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

class Tensor {
   public:
    using Shape = std::vector<std::size_t>;

    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }
    static Tensor from_matrix(const Eigen::Ref<const Matrix>& m);
    /// Row-major nested initializer, e.g. `Tensor::rows({{1, 2}, {3, 4}})`.
    static Tensor rows(std::initializer_list<std::initializer_list<double>> values);
    /// Column vector (n x 1).
    static Tensor column(std::initializer_list<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // Rank-2 views. A rank-1 tensor of length n is viewed as 1 x n.
    std::size_t rows() const;
    std::size_t cols() const;
    ConstMatrixMap matrix() const;
    MatrixMap matrix();

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

    Tensor reshaped(Shape shape) const;
    bool all_finite() const;
    /// Throws NonFiniteError naming `where` if any element is NaN/Inf.
    void require_finite(const char* where) const;

    Tensor& operator+=(const Tensor& other);
    bool operator==(const Tensor& other) const = default;

   private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_size(const Tensor::Shape& shape);
std::string shape_string(const Tensor::Shape& shape);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

/// max_i |a_i - b_i| / max(|b|_inf, tiny)
double max_relative_error(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);
double l2_norm(const Tensor& a);

}  // namespace hth
