// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_TENSOR_HPP_
#define ADVSUM_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advsum {

/// Violated precondition or malformed input to a public operation.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A non-finite value was produced where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  // Pushes this node's grad into its inputs' grads. Empty for leaves.
  std::function<void(Node&)> backward;

  double* grad_buffer();
};

/// Handle to a tape node. Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient buffer; zero-filled view when nothing has accumulated yet.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Deep copy detached from any tape.
  Tensor clone() const;
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Ordered record of executed operations. Constructing a Tape makes it the
/// active tape of the calling thread until it is destroyed; operations run
/// with no active tape record nothing and produce constants.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();
  void record(std::shared_ptr<Node> node);
  std::size_t size() const { return nodes_.size(); }

  /// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
  /// reachable requires_grad tensor, including leaves.
  void backward(const Tensor& loss);

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
  Tape* previous_;
};

/// Suspends recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape* saved_;
};

/// Runs backward on the active tape. Throws ContractError without one.
void backward(const Tensor& loss);

/// NaN/Inf checking after every primitive. Defaults to on in builds without
/// NDEBUG.
void set_debug_checks(bool enabled);
bool debug_checks();

}  // namespace ad
}  // namespace advsum

#endif  // ADVSUM_TENSOR_HPP_
