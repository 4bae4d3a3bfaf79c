// Copyright 2026 The dmatrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dmatrack/tensor.hpp"

#include <numeric>
#include <unordered_set>

#include "dmatrack/errors.hpp"

namespace dmatrack {

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      s += ",";
    }
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace detail {

std::vector<double>& Node::ensure_grad() {
  if (grad.empty()) {
    grad.assign(value.size(), 0.0);
  }
  return grad;
}

}  // namespace detail

namespace {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// Post-order DFS over nodes that require grad.
std::vector<detail::Node*> topological_order(detail::Node* root) {
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("Tensor: shape " + to_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data(Shape{}, std::vector<double>{value}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  }
  return node_->value[0];
}

void Tensor::backward() {
  if (numel() != 1) {
    throw DimensionError("backward: output of shape " + to_string(shape()) + " is not a scalar");
  }
  if (!node_->requires_grad) {
    throw StateError("backward: output does not depend on any tensor requiring grad");
  }
  if (node_->consumed) {
    throw StateError("backward: graph already differentiated; call reset_graph() first");
  }
  const auto order = topological_order(node_.get());
  node_->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->is_leaf()) {
      if (!n->grad.empty()) {
        n->backward(*n);
      }
      n->consumed = true;
    }
  }
  node_->consumed = true;
}

void Tensor::reset_graph() {
  for (detail::Node* n : topological_order(node_.get())) {
    if (!n->is_leaf()) {
      n->grad.clear();
      n->consumed = false;
    }
  }
  node_->consumed = false;
}

Tensor Tensor::detach(bool requires_grad) const {
  return from_data(shape(), node_->value, requires_grad);
}

void sgd_step(std::span<Tensor> params, double learning_rate) {
  for (const auto& p : params) {
    if (!p.has_grad()) {
      throw StateError("sgd_step: parameter of shape " + to_string(p.shape()) +
                       " has no gradient");
    }
  }
  for (auto& p : params) {
    auto values = p.mutable_data();
    const auto grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] -= learning_rate * grad[i];
    }
    p.clear_grad();
  }
}

}  // namespace dmatrack
