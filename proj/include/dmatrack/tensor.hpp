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

#ifndef DMATRACK_TENSOR_HPP
#define DMATRACK_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief Dense row-major double tensors with reverse-mode differentiation.
 *
 * Every op returns a new Tensor whose node remembers its inputs and a
 * backward rule. Calling backward() on a scalar walks the recorded graph in
 * reverse topological order and accumulates into the grads of every tensor
 * that requires one. Broadcasting is limited to scalar-with-tensor and the
 * explicit add_row bias op.
 */

namespace dmatrack {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  [[nodiscard]] bool is_leaf() const noexcept { return !backward; }
  std::vector<double>& ensure_grad();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  [[nodiscard]] bool defined() const noexcept { return node_ != nullptr; }
  [[nodiscard]] const Shape& shape() const { return node_->shape; }
  [[nodiscard]] std::size_t rank() const { return node_->shape.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  [[nodiscard]] std::size_t numel() const { return node_->value.size(); }

  [[nodiscard]] std::span<const double> data() const { return node_->value; }
  /// Writable values. Only meaningful on leaves (parameters, inputs).
  [[nodiscard]] std::span<double> mutable_data() { return node_->value; }
  [[nodiscard]] double item() const;

  [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }
  [[nodiscard]] bool has_grad() const { return !node_->grad.empty(); }
  [[nodiscard]] std::span<const double> grad() const { return node_->grad; }
  /// Writable gradient buffer, allocated (zero) on first access.
  [[nodiscard]] std::span<double> mutable_grad() { return node_->ensure_grad(); }
  /// Drops the gradient buffer; has_grad() becomes false.
  void clear_grad() { node_->grad.clear(); }

  /// Populates d(this)/d(t) for every reachable t requiring grad. `this`
  /// must be a scalar; a graph can be walked once unless reset_graph() is called.
  void backward();
  /// Clears consumed flags and intermediate grads so backward() may run again.
  void reset_graph();

  /// A new leaf holding a copy of the values, detached from any graph.
  [[nodiscard]] Tensor detach(bool requires_grad = false) const;

  [[nodiscard]] const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Elementwise. Shapes must match, or one operand must hold a single value.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// x[r, c] + bias[c] for every row.
Tensor add_row(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
/// Half-open range [begin, end) along `axis` of a rank-1 or rank-2 tensor.
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

// Last-axis normalizations.
Tensor softmax(const Tensor& a);
inline constexpr double kLayerNormEpsilon = 1e-5;
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift);

Tensor gelu(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);

// Full reductions to a scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// param <- param - lr * grad, then clears the grads. Throws StateError on a
/// parameter without a gradient.
void sgd_step(std::span<Tensor> params, double learning_rate);

}  // namespace dmatrack

#endif  // DMATRACK_TENSOR_HPP
