// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace advsum::ad {

namespace {

using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ContractError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                      " and " + shape_str(b.shape()));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const std::string& why) {
  throw ContractError(std::string(op) + ": shape " + shape_str(a.shape()) + " " + why);
}

void check_finite(const char* op, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + ": non-finite output");
  }
}

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Builds the output node. `make_backward` is only invoked when the output is
// recorded, so ops can skip capturing intermediates in no-grad mode.
template <typename MakeBackward>
Tensor finish(const char* op, Shape shape, std::vector<double> value, bool grad,
              MakeBackward&& make_backward) {
  if (debug_checks()) check_finite(op, value);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (grad) {
    node->requires_grad = true;
    node->backward = make_backward();
    Tape::active()->record(node);
  }
  return Tensor(std::move(node));
}

// Grad sink for an input, or nullptr when it does not need one.
inline double* sink(const NodePtr& n) {
  return n->requires_grad ? n->grad_buffer() : nullptr;
}

std::size_t last_dim(const Tensor& a) { return a.shape().back(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() == 2 && b.rank() == 2) {
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a, b);
    std::vector<double> out(m * n, 0.0);
    const double* A = a.data().data();
    const double* B = b.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      double* row = out.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        const double* brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
      }
    }
    return finish("matmul", {m, n}, std::move(out), wants_grad({&a, &b}), [&] {
      return [an = a.node_ptr(), bn = b.node_ptr(), m, k, n](Node& self) {
        const double* G = self.grad.data();
        if (double* ga = sink(an)) {
          const double* B = bn->value.data();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
              ga[i * k + p] += s;
            }
        }
        if (double* gb = sink(bn)) {
          const double* A = an->value.data();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = A[i * k + p];
              for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * G[i * n + j];
            }
        }
      };
    });
  }
  if (a.rank() == 2 && b.rank() == 1) {
    const std::size_t m = a.dim(0), k = a.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a, b);
    std::vector<double> out(m, 0.0);
    const double* A = a.data().data();
    const double* x = b.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      const double* row = A + i * k;
      for (std::size_t p = 0; p < k; ++p) s += row[p] * x[p];
      out[i] = s;
    }
    return finish("matmul", {m}, std::move(out), wants_grad({&a, &b}), [&] {
      return [an = a.node_ptr(), bn = b.node_ptr(), m, k](Node& self) {
        const double* G = self.grad.data();
        if (double* ga = sink(an)) {
          const double* x = bn->value.data();
          for (std::size_t i = 0; i < m; ++i) {
            double* row = ga + i * k;
            for (std::size_t p = 0; p < k; ++p) row[p] += G[i] * x[p];
          }
        }
        if (double* gb = sink(bn)) {
          const double* A = an->value.data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* row = A + i * k;
            for (std::size_t p = 0; p < k; ++p) gb[p] += G[i] * row[p];
          }
        }
      };
    });
  }
  if (a.rank() == 1 && b.rank() == 2) {
    const std::size_t k = a.dim(0), n = b.dim(1);
    if (b.dim(0) != k) shape_error("matmul", a, b);
    std::vector<double> out(n, 0.0);
    const double* x = a.data().data();
    const double* B = b.data().data();
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += x[p] * brow[j];
    }
    return finish("matmul", {n}, std::move(out), wants_grad({&a, &b}), [&] {
      return [an = a.node_ptr(), bn = b.node_ptr(), k, n](Node& self) {
        const double* G = self.grad.data();
        if (double* ga = sink(an)) {
          const double* B = bn->value.data();
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += G[j] * B[p * n + j];
            ga[p] += s;
          }
        }
        if (double* gb = sink(bn)) {
          const double* x = an->value.data();
          for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x[p] * G[j];
        }
      };
    });
  }
  shape_error("matmul", a, b);
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) shape_error("transpose", a, "is not a matrix");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return finish("transpose", {n, m}, std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr(), m, n](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
    };
  });
}

namespace {

// Shared body of add/sub: out = a + sign * b with b possibly broadcast.
Tensor add_signed(const char* op, const Tensor& a, const Tensor& b, double sign) {
  const std::size_t na = a.size(), nb = b.size();
  bool broadcast = false;
  if (a.shape() != b.shape()) {
    const Shape tail(a.shape().begin() + (a.rank() > 0 ? 1 : 0), a.shape().end());
    if (a.rank() < 2 || b.shape() != tail) shape_error(op, a, b);
    broadcast = true;
  }
  std::vector<double> out(na);
  for (std::size_t i = 0; i < na; ++i) out[i] = a[i] + sign * b[i % nb];
  return finish(op, a.shape(), std::move(out), wants_grad({&a, &b}), [&] {
    return [an = a.node_ptr(), bn = b.node_ptr(), na, nb, sign, broadcast](Node& self) {
      const double* G = self.grad.data();
      if (double* ga = sink(an)) {
        for (std::size_t i = 0; i < na; ++i) ga[i] += G[i];
      }
      if (double* gb = sink(bn)) {
        if (broadcast) {
          for (std::size_t i = 0; i < na; ++i) gb[i % nb] += sign * G[i];
        } else {
          for (std::size_t i = 0; i < na; ++i) gb[i] += sign * G[i];
        }
      }
    };
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_signed("add", a, b, 1.0); }

Tensor sub(const Tensor& a, const Tensor& b) { return add_signed("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.size();
  const bool scalar_b = b.size() == 1 && a.size() != 1;
  if (!scalar_b && a.shape() != b.shape()) shape_error("mul", a, b);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[scalar_b ? 0 : i];
  return finish("mul", a.shape(), std::move(out), wants_grad({&a, &b}), [&] {
    return [an = a.node_ptr(), bn = b.node_ptr(), n, scalar_b](Node& self) {
      const double* G = self.grad.data();
      const double* A = an->value.data();
      const double* B = bn->value.data();
      if (double* ga = sink(an)) {
        for (std::size_t i = 0; i < n; ++i) ga[i] += G[i] * B[scalar_b ? 0 : i];
      }
      if (double* gb = sink(bn)) {
        if (scalar_b) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += G[i] * A[i];
          gb[0] += s;
        } else {
          for (std::size_t i = 0; i < n; ++i) gb[i] += G[i] * A[i];
        }
      }
    };
  });
}

Tensor scalar_mul(const Tensor& a, double c) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= c;
  return finish("scalar_mul", a.shape(), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr(), c](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += c * self.grad[i];
    };
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v += c;
  return finish("add_scalar", a.shape(), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr()](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    };
  });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp: empty interval");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(a[i], lo, hi);
  return finish("clamp", a.shape(), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr(), lo, hi](Node& self) {
      double* ga = an->grad_buffer();
      const double* x = an->value.data();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi) ga[i] += self.grad[i];
      }
    };
  });
}

Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a[i]);
  const bool grad = wants_grad({&a});
  return finish("tanh", a.shape(), std::vector<double>(out), grad, [&] {
    return [an = a.node_ptr(), y = std::move(out)](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < y.size(); ++i) ga[i] += self.grad[i] * (1.0 - y[i] * y[i]);
    };
  });
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a[i];
    // Branch keeps exp() from overflowing for large |x|.
    if (x >= 0) {
      out[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out[i] = e / (1.0 + e);
    }
  }
  const bool grad = wants_grad({&a});
  return finish("sigmoid", a.shape(), std::vector<double>(out), grad, [&] {
    return [an = a.node_ptr(), y = std::move(out)](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < y.size(); ++i) ga[i] += self.grad[i] * y[i] * (1.0 - y[i]);
    };
  });
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(std::max(a[i], kLogFloor));
  return finish("log", a.shape(), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr()](Node& self) {
      double* ga = an->grad_buffer();
      const double* x = an->value.data();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (x[i] > kLogFloor) ga[i] += self.grad[i] / x[i];
      }
    };
  });
}

Tensor softmax(const Tensor& a) {
  if (a.rank() < 1) shape_error("softmax", a, "has no axis");
  const std::size_t k = last_dim(a), rows = a.size() / k;
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = a.data().data() + r * k;
    double* y = out.data() + r * k;
    const double mx = *std::max_element(x, x + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < k; ++j) y[j] /= z;
  }
  const bool grad = wants_grad({&a});
  return finish("softmax", a.shape(), std::vector<double>(out), grad, [&] {
    return [an = a.node_ptr(), y = std::move(out), k, rows](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* yr = y.data() + r * k;
        const double* g = self.grad.data() + r * k;
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += g[j] * yr[j];
        for (std::size_t j = 0; j < k; ++j) ga[r * k + j] += yr[j] * (g[j] - dot);
      }
    };
  });
}

Tensor log_softmax(const Tensor& a) {
  if (a.rank() < 1) shape_error("log_softmax", a, "has no axis");
  const std::size_t k = last_dim(a), rows = a.size() / k;
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = a.data().data() + r * k;
    double* y = out.data() + r * k;
    const double mx = *std::max_element(x, x + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(x[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < k; ++j) y[j] = x[j] - lse;
  }
  const bool grad = wants_grad({&a});
  return finish("log_softmax", a.shape(), std::vector<double>(out), grad, [&] {
    return [an = a.node_ptr(), y = std::move(out), k, rows](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* g = self.grad.data() + r * k;
        double gsum = 0.0;
        for (std::size_t j = 0; j < k; ++j) gsum += g[j];
        for (std::size_t j = 0; j < k; ++j) ga[r * k + j] += g[j] - std::exp(y[r * k + j]) * gsum;
      }
    };
  });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const Tensor& first = parts.front();
  const std::size_t rows = first.size() / last_dim(first);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != first.rank() ||
        !std::equal(p.shape().begin(), p.shape().end() - 1, first.shape().begin())) {
      shape_error("concat", first, p);
    }
    widths.push_back(last_dim(p));
    total += last_dim(p);
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = widths[i];
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(parts[i].data().data() + r * w, w, out.data() + r * total + offset);
    offset += w;
  }
  Shape shape = first.shape();
  shape.back() = total;
  bool grad = false;
  for (const Tensor& p : parts) grad = grad || wants_grad({&p});
  return finish("concat", std::move(shape), std::move(out), grad, [&] {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.node_ptr());
    return [nodes = std::move(nodes), widths = std::move(widths), rows, total](Node& self) {
      std::size_t offset = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::size_t w = widths[i];
        if (double* g = sink(nodes[i])) {
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < w; ++j) g[r * w + j] += self.grad[r * total + offset + j];
        }
        offset += w;
      }
    };
  });
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice(const Tensor& a, std::size_t begin, std::size_t end) {
  if (a.rank() < 1 || a.rank() > 2) shape_error("slice", a, "must be a vector or matrix");
  if (begin >= end || end > a.dim(0)) {
    shape_error("slice", a, "cannot take [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  }
  const std::size_t stride = a.rank() == 2 ? a.dim(1) : 1;
  std::vector<double> out(a.data().begin() + begin * stride, a.data().begin() + end * stride);
  Shape shape = a.shape();
  shape[0] = end - begin;
  return finish("slice", std::move(shape), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr(), offset = begin * stride](Node& self) {
      double* ga = an->grad_buffer() + offset;
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    };
  });
}

Tensor stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw ContractError("stack: no inputs");
  const std::size_t k = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * k);
  bool grad = false;
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.size() != k) shape_error("stack", rows.front(), r);
    out.insert(out.end(), r.data().begin(), r.data().end());
    grad = grad || wants_grad({&r});
  }
  return finish("stack", {rows.size(), k}, std::move(out), grad, [&] {
    std::vector<NodePtr> nodes;
    for (const Tensor& r : rows) nodes.push_back(r.node_ptr());
    return [nodes = std::move(nodes), k](Node& self) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (double* g = sink(nodes[i])) {
          for (std::size_t j = 0; j < k; ++j) g[j] += self.grad[i * k + j];
        }
      }
    };
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) shape_error("reshape", a, "cannot become " + shape_str(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  return finish("reshape", std::move(shape), std::move(out), wants_grad({&a}), [&] {
    return [an = a.node_ptr()](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    };
  });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  if (table.rank() != 2) shape_error("embedding", table, "is not a table");
  if (ids.empty()) throw ContractError("embedding: empty id list");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      shape_error("embedding", table, "has no row " + std::to_string(ids[i]));
    }
    std::copy_n(table.data().data() + ids[i] * d, d, out.data() + i * d);
  }
  return finish("embedding", {ids.size(), d}, std::move(out), wants_grad({&table}), [&] {
    return [tn = table.node_ptr(), ids = std::vector<int>(ids.begin(), ids.end()), d](Node& self) {
      double* gt = tn->grad_buffer();
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) gt[ids[i] * d + j] += self.grad[i * d + j];
    };
  });
}

Tensor embedding(const Tensor& table, int id) {
  if (table.rank() != 2) shape_error("embedding", table, "is not a table");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
    shape_error("embedding", table, "has no row " + std::to_string(id));
  }
  std::vector<double> out(table.data().begin() + id * d, table.data().begin() + (id + 1) * d);
  return finish("embedding", {d}, std::move(out), wants_grad({&table}), [&] {
    return [tn = table.node_ptr(), id, d](Node& self) {
      double* gt = tn->grad_buffer() + id * d;
      for (std::size_t j = 0; j < d; ++j) gt[j] += self.grad[j];
    };
  });
}

Tensor conv_over_time(const Tensor& x, const Tensor& filters, const Tensor& bias,
                      std::size_t width) {
  if (x.rank() != 2) shape_error("conv_over_time", x, "is not [time, features]");
  const std::size_t len = x.dim(0), d = x.dim(1);
  if (width == 0 || width > len) {
    shape_error("conv_over_time", x, "is shorter than window " + std::to_string(width));
  }
  if (filters.rank() != 2 || filters.dim(1) != width * d) shape_error("conv_over_time", x, filters);
  const std::size_t f = filters.dim(0);
  if (bias.rank() != 1 || bias.dim(0) != f) shape_error("conv_over_time", filters, bias);
  const std::size_t windows = len - width + 1, span = width * d;
  std::vector<double> out(windows * f);
  const double* X = x.data().data();
  const double* W = filters.data().data();
  for (std::size_t t = 0; t < windows; ++t) {
    const double* win = X + t * d;  // rows t..t+width-1 are contiguous
    for (std::size_t o = 0; o < f; ++o) {
      double s = bias[o];
      const double* w = W + o * span;
      for (std::size_t p = 0; p < span; ++p) s += w[p] * win[p];
      out[t * f + o] = s;
    }
  }
  return finish("conv_over_time", {windows, f}, std::move(out), wants_grad({&x, &filters, &bias}), [&] {
    return [xn = x.node_ptr(), wn = filters.node_ptr(), bn = bias.node_ptr(), windows, f, d,
            span](Node& self) {
      const double* G = self.grad.data();
      double* gx = sink(xn);
      double* gw = sink(wn);
      double* gb = sink(bn);
      const double* X = xn->value.data();
      const double* W = wn->value.data();
      for (std::size_t t = 0; t < windows; ++t) {
        for (std::size_t o = 0; o < f; ++o) {
          const double g = G[t * f + o];
          if (gb) gb[o] += g;
          if (gw) {
            for (std::size_t p = 0; p < span; ++p) gw[o * span + p] += g * X[t * d + p];
          }
          if (gx) {
            for (std::size_t p = 0; p < span; ++p) gx[t * d + p] += g * W[o * span + p];
          }
        }
      }
    };
  });
}

Tensor max_over_time(const Tensor& x, std::size_t rows) {
  if (x.rank() != 2) shape_error("max_over_time", x, "is not [time, features]");
  if (rows == 0 || rows > x.dim(0)) {
    shape_error("max_over_time", x, "cannot pool over " + std::to_string(rows) + " rows");
  }
  const std::size_t f = x.dim(1);
  std::vector<double> out(f);
  std::vector<std::size_t> argmax(f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    double best = x[j];
    for (std::size_t t = 1; t < rows; ++t) {
      if (x[t * f + j] > best) {
        best = x[t * f + j];
        argmax[j] = t;
      }
    }
    out[j] = best;
  }
  return finish("max_over_time", {f}, std::move(out), wants_grad({&x}), [&] {
    return [xn = x.node_ptr(), argmax = std::move(argmax), f](Node& self) {
      double* gx = xn->grad_buffer();
      for (std::size_t j = 0; j < f; ++j) gx[argmax[j] * f + j] += self.grad[j];
    };
  });
}

Tensor scatter_add(const Tensor& values, std::span<const int> indices, std::size_t size) {
  if (values.rank() != 1 || values.size() != indices.size()) {
    shape_error("scatter_add", values, "does not match " + std::to_string(indices.size()) + " indices");
  }
  std::vector<double> out(size, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= size) {
      shape_error("scatter_add", values, "index " + std::to_string(indices[i]) + " out of range");
    }
    out[indices[i]] += values[i];
  }
  return finish("scatter_add", {size}, std::move(out), wants_grad({&values}), [&] {
    return [vn = values.node_ptr(), idx = std::vector<int>(indices.begin(), indices.end())](Node& self) {
      double* gv = vn->grad_buffer();
      for (std::size_t i = 0; i < idx.size(); ++i) gv[i] += self.grad[idx[i]];
    };
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return finish("sum", {1}, {s}, wants_grad({&a}), [&] {
    return [an = a.node_ptr()](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < an->value.size(); ++i) ga[i] += self.grad[0];
    };
  });
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  const double n = static_cast<double>(a.size());
  return finish("mean", {1}, {s / n}, wants_grad({&a}), [&] {
    return [an = a.node_ptr(), n](Node& self) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < an->value.size(); ++i) ga[i] += self.grad[0] / n;
    };
  });
}

}  // namespace advsum::ad
