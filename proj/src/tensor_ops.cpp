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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmatrack/errors.hpp"
#include "dmatrack/kernels.hpp"
#include "dmatrack/tensor.hpp"

namespace dmatrack {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

Tensor make_result(Shape shape, std::vector<double> value, std::vector<NodePtr> inputs,
                   BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                    [](const NodePtr& n) { return n->requires_grad; });
  if (node->requires_grad) {
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                       to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + to_string(a.shape()));
  }
}

std::size_t last_dim(const char* op, const Tensor& a) {
  if (a.rank() == 0 || a.shape().back() == 0) {
    throw DimensionError(std::string(op) + ": last axis must have at least one entry, got " +
                         to_string(a.shape()));
  }
  return a.shape().back();
}

enum class Broadcast { none, left_scalar, right_scalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    return Broadcast::none;
  }
  if (b.numel() == 1) {
    return Broadcast::right_scalar;
  }
  if (a.numel() == 1) {
    return Broadcast::left_scalar;
  }
  shape_mismatch(op, a, b);
}

// Elementwise binary op: f(x, y) with partials dfdx(x, y), dfdy(x, y).
template <typename F, typename Dx, typename Dy>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, Dx dfdx, Dy dfdy) {
  const auto kind = broadcast_kind(op, a, b);
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  const Shape shape = kind == Broadcast::left_scalar ? b.shape() : a.shape();
  const std::size_t n = kind == Broadcast::left_scalar ? bv.size() : av.size();
  const bool a_scalar = kind == Broadcast::left_scalar;
  const bool b_scalar = kind == Broadcast::right_scalar;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
  }
  return make_result(shape, std::move(out), {a.node(), b.node()},
                     [=](Node& self) {
                       Node& na = *self.inputs[0];
                       Node& nb = *self.inputs[1];
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const double x = na.value[a_scalar ? 0 : i];
                         const double y = nb.value[b_scalar ? 0 : i];
                         if (na.requires_grad) {
                           na.ensure_grad()[a_scalar ? 0 : i] += g[i] * dfdx(x, y);
                         }
                         if (nb.requires_grad) {
                           nb.ensure_grad()[b_scalar ? 0 : i] += g[i] * dfdy(x, y);
                         }
                       }
                     });
}

// Elementwise unary op; derivative expressed through input x and output y.
template <typename F, typename D>
Tensor unary(const Tensor& a, F f, D dfdx) {
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    out[i] = f(av[i]);
  }
  return make_result(a.shape(), std::move(out), {a.node()}, [=](Node& self) {
    Node& na = *self.inputs[0];
    auto& ga = na.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += self.grad[i] * dfdx(na.value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  require_rank("add_row", x, 2);
  const auto rows = x.dim(0);
  const auto cols = x.dim(1);
  if (bias.numel() != cols || bias.rank() > 2 || (bias.rank() == 2 && bias.dim(0) != 1)) {
    shape_mismatch("add_row", x, bias);
  }
  const auto& xv = x.node()->value;
  const auto& bv = bias.node()->value;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[i * cols + j] = xv[i * cols + j] + bv[j];
    }
  }
  return make_result(x.shape(), std::move(out), {x.node(), bias.node()},
                     [rows, cols](Node& self) {
                       Node& nx = *self.inputs[0];
                       Node& nb = *self.inputs[1];
                       if (nx.requires_grad) {
                         auto& gx = nx.ensure_grad();
                         for (std::size_t k = 0; k < self.grad.size(); ++k) {
                           gx[k] += self.grad[k];
                         }
                       }
                       if (nb.requires_grad) {
                         auto& gb = nb.ensure_grad();
                         for (std::size_t i = 0; i < rows; ++i) {
                           for (std::size_t j = 0; j < cols; ++j) {
                             gb[j] += self.grad[i * cols + j];
                           }
                         }
                       }
                     });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(
      a, [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const auto m = a.dim(0);
  const auto k = a.dim(1);
  const auto n = b.dim(1);
  if (b.dim(0) != k) {
    shape_mismatch("matmul", a, b);
  }
  std::vector<double> out(m * n);
  kernels::matmul(a.data(), b.data(), out, m, k, n, false);
  return make_result({m, n}, std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    if (na.requires_grad) {
      // dA[m,k] += G[m,n] B[k,n]^T
      kernels::matmul_nt(self.grad, nb.value, na.ensure_grad(), m, n, k, true);
    }
    if (nb.requires_grad) {
      // dB[k,n] += A[m,k]^T G[m,n]
      kernels::matmul_tn(na.value, self.grad, nb.ensure_grad(), k, m, n, true);
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const auto r = a.dim(0);
  const auto c = a.dim(1);
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out[j * r + i] = av[i * c + j];
    }
  }
  return make_result({c, r}, std::move(out), {a.node()}, [r, c](Node& self) {
    auto& ga = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        ga[i * c + j] += self.grad[j * r + i];
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    n *= d;
  }
  if (n != a.numel()) {
    throw DimensionError("reshape: cannot view " + to_string(a.shape()) + " as " +
                         to_string(shape));
  }
  return make_result(std::move(shape), a.node()->value, {a.node()}, [](Node& self) {
    auto& ga = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += self.grad[i];
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  if (a.rank() < 1 || a.rank() > 2 || axis >= a.rank()) {
    throw DimensionError("slice: axis " + std::to_string(axis) + " invalid for shape " +
                         to_string(a.shape()));
  }
  if (begin >= end || end > a.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for shape " + to_string(a.shape()));
  }
  const std::size_t rows = a.rank() == 2 ? a.dim(0) : 1;
  const std::size_t cols = a.rank() == 2 ? a.dim(1) : a.dim(0);
  const bool by_row = a.rank() == 2 && axis == 0;
  const std::size_t r0 = by_row ? begin : 0;
  const std::size_t r1 = by_row ? end : rows;
  const std::size_t c0 = by_row ? 0 : begin;
  const std::size_t c1 = by_row ? cols : end;
  const auto& av = a.node()->value;
  std::vector<double> out;
  out.reserve((r1 - r0) * (c1 - c0));
  for (std::size_t i = r0; i < r1; ++i) {
    out.insert(out.end(), av.begin() + i * cols + c0, av.begin() + i * cols + c1);
  }
  Shape shape = a.rank() == 2 ? Shape{r1 - r0, c1 - c0} : Shape{c1 - c0};
  return make_result(std::move(shape), std::move(out), {a.node()},
                     [r0, r1, c0, c1, cols](Node& self) {
                       auto& ga = self.inputs[0]->ensure_grad();
                       const auto w = c1 - c0;
                       for (std::size_t i = r0; i < r1; ++i) {
                         for (std::size_t j = c0; j < c1; ++j) {
                           ga[i * cols + j] += self.grad[(i - r0) * w + (j - c0)];
                         }
                       }
                     });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) {
    throw DimensionError("concat: no inputs");
  }
  const auto rank = parts.front().rank();
  if (rank < 1 || rank > 2 || axis >= rank) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " invalid for shape " +
                         to_string(parts.front().shape()));
  }
  // View every part as rows x cols; concatenation is along rows or cols.
  const bool by_row = rank == 1 || axis == 0;
  std::vector<NodePtr> inputs;
  std::vector<std::size_t> widths;
  std::size_t rows = rank == 2 ? parts.front().dim(0) : 1;
  std::size_t cols = rank == 2 ? parts.front().dim(1) : 0;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != rank) {
      shape_mismatch("concat", parts.front(), p);
    }
    if (rank == 1) {
      widths.push_back(p.dim(0));
    } else if (by_row) {
      if (p.dim(1) != cols) {
        shape_mismatch("concat", parts.front(), p);
      }
      widths.push_back(p.dim(0));
    } else {
      if (p.dim(0) != rows) {
        shape_mismatch("concat", parts.front(), p);
      }
      widths.push_back(p.dim(1));
    }
    total += widths.back();
    inputs.push_back(p.node());
  }
  std::vector<double> out;
  Shape shape;
  if (by_row) {
    for (const auto& p : parts) {
      out.insert(out.end(), p.data().begin(), p.data().end());
    }
    shape = rank == 1 ? Shape{total} : Shape{total, cols};
  } else {
    out.resize(rows * total);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto pv = parts[k].data();
      for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(pv.begin() + i * widths[k], widths[k], out.begin() + i * total + offset);
      }
      offset += widths[k];
    }
    shape = Shape{rows, total};
  }
  return make_result(std::move(shape), std::move(out), std::move(inputs),
                     [by_row, rows, total, widths](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         Node& in = *self.inputs[k];
                         if (in.requires_grad) {
                           auto& g = in.ensure_grad();
                           if (by_row) {
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               g[i] += self.grad[offset + i];
                             }
                           } else {
                             for (std::size_t i = 0; i < rows; ++i) {
                               for (std::size_t j = 0; j < widths[k]; ++j) {
                                 g[i * widths[k] + j] += self.grad[i * total + offset + j];
                               }
                             }
                           }
                         }
                         offset += by_row ? in.value.size() : widths[k];
                       }
                     });
}

Tensor softmax(const Tensor& a) {
  const auto c = last_dim("softmax", a);
  const auto rows = a.numel() / c;
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * c;
    double* y = out.data() + r * c;
    const double mx = *std::max_element(x, x + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      y[j] = std::exp(x[j] - mx);
      s += y[j];
    }
    for (std::size_t j = 0; j < c; ++j) {
      y[j] /= s;
    }
  }
  return make_result(a.shape(), std::move(out), {a.node()}, [rows, c](Node& self) {
    auto& ga = self.inputs[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * c;
      const double* g = self.grad.data() + r * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        dot += g[j] * y[j];
      }
      for (std::size_t j = 0; j < c; ++j) {
        ga[r * c + j] += y[j] * (g[j] - dot);
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift) {
  const auto c = last_dim("layer_norm", x);
  if (gain.numel() != c || shift.numel() != c) {
    shape_mismatch("layer_norm", x, gain.numel() != c ? gain : shift);
  }
  const auto rows = x.numel() / c;
  const auto& xv = x.node()->value;
  const auto& gv = gain.node()->value;
  const auto& sv = shift.node()->value;
  std::vector<double> normalized(xv.size());
  std::vector<double> rstd(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      mu += xr[j];
    }
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      var += (xr[j] - mu) * (xr[j] - mu);
    }
    var /= static_cast<double>(c);
    rstd[r] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t j = 0; j < c; ++j) {
      const double nhat = (xr[j] - mu) * rstd[r];
      normalized[r * c + j] = nhat;
      out[r * c + j] = nhat * gv[j] + sv[j];
    }
  }
  return make_result(
      x.shape(), std::move(out), {x.node(), gain.node(), shift.node()},
      [rows, c, normalized = std::move(normalized), rstd = std::move(rstd)](Node& self) {
        Node& nx = *self.inputs[0];
        Node& ng = *self.inputs[1];
        Node& ns = *self.inputs[2];
        const auto& g = self.grad;
        if (ng.requires_grad || ns.requires_grad) {
          auto& gg = ng.ensure_grad();
          auto& gs = ns.ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
              gg[j] += g[r * c + j] * normalized[r * c + j];
              gs[j] += g[r * c + j];
            }
          }
        }
        if (nx.requires_grad) {
          auto& gx = nx.ensure_grad();
          const auto& gain_v = ng.value;
          const double inv_c = 1.0 / static_cast<double>(c);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_d = 0.0;
            double mean_dn = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
              const double d = g[r * c + j] * gain_v[j];
              mean_d += d;
              mean_dn += d * normalized[r * c + j];
            }
            mean_d *= inv_c;
            mean_dn *= inv_c;
            for (std::size_t j = 0; j < c; ++j) {
              const double d = g[r * c + j] * gain_v[j];
              gx[r * c + j] += rstd[r] * (d - mean_d - normalized[r * c + j] * mean_dn);
            }
          }
        }
      });
}

Tensor gelu(const Tensor& a) {
  return unary(
      a, [](double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); },
      [](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
        const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
        return cdf + x * pdf;
      });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0.0) {
          return 1.0 / (1.0 + std::exp(-x));
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor sqrt(const Tensor& a) {
  for (double v : a.data()) {
    if (v < 0.0) {
      throw DomainError("sqrt: negative input");
    }
  }
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor pow(const Tensor& a, double exponent) {
  return unary(
      a, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) {
    s += v;
  }
  return make_result(Shape{}, {s}, {a.node()}, [](Node& self) {
    auto& ga = self.inputs[0]->ensure_grad();
    for (auto& g : ga) {
      g += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) {
    throw DimensionError("mean: empty tensor");
  }
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

}  // namespace dmatrack
