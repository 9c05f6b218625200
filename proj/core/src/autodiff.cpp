// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/autodiff.hpp"

#include <algorithm>

namespace hth {

Var Var::constant(Tensor value) {
    value.require_finite("constant");
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    return Var(std::move(node));
}

const Tensor& Gradients::operator[](const Var& param) const {
    auto it = std::find(keys_.begin(), keys_.end(), param.node());
    if (it == keys_.end()) throw ParameterNotOnTapeError("gradient requested for a parameter not passed to grad()");
    return grads_[static_cast<std::size_t>(it - keys_.begin())];
}

Var Tape::param(Tensor value) {
    value.require_finite("param");
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->tape = this;
    nodes_.push_back(node);
    return Var(std::move(node));
}

Tape* Tape::common_tape(std::span<const Var* const> inputs) {
    Tape* tape = nullptr;
    for (const Var* v : inputs) {
        if (!v->valid()) throw std::invalid_argument("operation on an empty Var");
        Tape* t = v->tape();
        if (!t) continue;
        if (tape && tape != t) throw std::invalid_argument("operation mixes Vars from different tapes");
        tape = t;
    }
    return tape;
}

Var Tape::record_impl(Tensor value, std::span<const Var* const> inputs,
                      std::function<void(const Tensor&)> backward, const char* op_name) {
    value.require_finite(op_name);
    Tape* tape = common_tape(inputs);
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    if (tape) {
        node->tape = tape;
        node->backward = std::move(backward);
        tape->nodes_.push_back(node);
    }
    return Var(std::move(node));
}

Var Tape::record(Tensor value, std::initializer_list<const Var*> inputs,
                 std::function<void(const Tensor&)> backward, const char* op_name) {
    return record_impl(std::move(value), std::span<const Var* const>(inputs.begin(), inputs.size()),
                       std::move(backward), op_name);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, std::function<void(const Tensor&)> backward,
                 const char* op_name) {
    std::vector<const Var*> ptrs;
    ptrs.reserve(inputs.size());
    for (const auto& v : inputs) ptrs.push_back(&v);
    return record_impl(std::move(value), ptrs, std::move(backward), op_name);
}

void accumulate_grad(const Var& target, const Tensor& grad) {
    if (!target.requires_grad()) return;
    auto& node = *target.node_;
    if (node.grad.empty()) {
        if (grad.size() != node.value.size()) throw ShapeError("gradient shape mismatch");
        node.grad = grad.reshaped(node.value.shape());
    } else {
        node.grad += grad;
    }
}

Gradients Tape::grad(const Var& loss, std::span<const Var> params) {
    std::vector<const detail::Node*> keys;
    for (const auto& p : params) {
        if (p.tape() != this) throw ParameterNotOnTapeError("parameter is not registered on this tape");
        keys.push_back(p.node());
    }
    if (loss.value().size() != 1) throw ShapeError("grad() needs a scalar loss, got " + shape_string(loss.shape()));

    for (auto& n : nodes_) n->grad = Tensor();
    if (loss.tape() == this) {
        // The loss node is the most recent node that depends on it; everything
        // recorded after it cannot contribute.
        auto* loss_node = const_cast<detail::Node*>(loss.node());
        loss_node->grad = Tensor(loss.shape(), 1.0);
        auto it = std::find_if(nodes_.rbegin(), nodes_.rend(),
                               [&](const auto& n) { return n.get() == loss_node; });
        for (; it != nodes_.rend(); ++it) {
            auto& n = **it;
            if (n.grad.empty() || !n.backward) continue;
            n.backward(n.grad);
        }
    } else if (loss.tape() != nullptr) {
        throw ParameterNotOnTapeError("loss was recorded on a different tape");
    }

    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (const auto& p : params) {
        const auto& g = p.node()->grad;
        grads.push_back(g.empty() ? Tensor(p.shape(), 0.0) : g);
    }
    return Gradients(std::move(keys), std::move(grads));
}

}  // namespace hth
