// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode autodiff over whole-tensor operations.
//
// A Var is a handle to an immutable value plus, when it depends on a
// parameter registered on a Tape, the closure that pushes its gradient back
// to its inputs. Operations whose inputs are all constants produce constants
// and record nothing, so inference with constant weights never grows a tape.

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "hth/tensor.hpp"

namespace hth {

class Tape;

namespace detail {
struct Node {
    Tensor value;
    Tensor grad;
    Tape* tape = nullptr;
    std::function<void(const Tensor&)> backward;
};
}  // namespace detail

class Var {
   public:
    Var() = default;

    static Var constant(Tensor value);

    const Tensor& value() const { return node_->value; }
    const Tensor::Shape& shape() const { return node_->value.shape(); }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    bool requires_grad() const { return node_ && node_->tape != nullptr; }
    Tape* tape() const { return node_ ? node_->tape : nullptr; }
    bool valid() const { return static_cast<bool>(node_); }

    const detail::Node* node() const { return node_.get(); }

   private:
    friend class Tape;
    friend void accumulate_grad(const Var& target, const Tensor& grad);
    explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;
};

class ParameterNotOnTapeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Gradients returned by Tape::grad, aligned with the requested parameters.
class Gradients {
   public:
    Gradients(std::vector<const detail::Node*> keys, std::vector<Tensor> grads)
        : keys_(std::move(keys)), grads_(std::move(grads)) {}

    const Tensor& operator[](const Var& param) const;
    const Tensor& operator[](std::size_t i) const { return grads_.at(i); }
    std::size_t size() const { return grads_.size(); }

   private:
    std::vector<const detail::Node*> keys_;
    std::vector<Tensor> grads_;
};

/// Records operations on parameters so the gradient of a scalar loss can be
/// evaluated. Single-threaded; create one per training step.
class Tape {
   public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers a differentiable leaf.
    Var param(Tensor value);

    /// d(loss)/d(param) for every param. `loss` must hold a single value.
    /// Parameters the loss does not depend on get exact zeros.
    Gradients grad(const Var& loss, std::span<const Var> params);

    std::size_t size() const { return nodes_.size(); }

    /// Builds the result of an operation. If none of `inputs` requires a
    /// gradient the result is a constant and `backward` is dropped.
    static Var record(Tensor value, std::initializer_list<const Var*> inputs,
                      std::function<void(const Tensor&)> backward, const char* op_name);
    static Var record(Tensor value, std::span<const Var> inputs,
                      std::function<void(const Tensor&)> backward, const char* op_name);

   private:
    static Tape* common_tape(std::span<const Var* const> inputs);
    static Var record_impl(Tensor value, std::span<const Var* const> inputs,
                           std::function<void(const Tensor&)> backward, const char* op_name);

    std::vector<std::shared_ptr<detail::Node>> nodes_;
};

/// Adds `grad` into the gradient buffer of `target`; no-op for constants.
void accumulate_grad(const Var& target, const Tensor& grad);

}  // namespace hth
