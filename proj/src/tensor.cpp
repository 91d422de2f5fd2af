// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace advsum::ad {

namespace {

thread_local Tape* g_active_tape = nullptr;

#ifdef NDEBUG
bool g_debug_checks = false;
#else
bool g_debug_checks = true;
#endif

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

double* Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad.data();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = numel(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw ContractError("tensor: zero-sized dimension in " + shape_str(shape));
  }
  if (numel(shape) != values.size()) {
    throw ContractError("tensor: shape " + shape_str(shape) + " needs " +
                        std::to_string(numel(shape)) + " values, got " +
                        std::to_string(values.size()));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape s{values.size()};
  return from(std::move(s), std::move(values), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
  }
  return node_->value[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  node_->grad_buffer();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  node->requires_grad = node_->requires_grad;
  return Tensor(std::move(node));
}

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<Node> node) { nodes_.push_back(std::move(node)); }

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n);
  }
}

NoGradGuard::NoGradGuard() : saved_(g_active_tape) { g_active_tape = nullptr; }

NoGradGuard::~NoGradGuard() { g_active_tape = saved_; }

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw ContractError("backward: no active tape");
  tape->backward(loss);
}

void set_debug_checks(bool enabled) { g_debug_checks = enabled; }

bool debug_checks() { return g_debug_checks; }

}  // namespace advsum::ad
