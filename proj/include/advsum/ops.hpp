// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_OPS_HPP_
#define ADVSUM_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "advsum/tensor.hpp"

// Differentiable primitives. Every op validates shapes and throws
// ContractError naming the op and the offending shapes. Rank-1 tensors are
// vectors, rank-2 tensors are row-major matrices, and "scalar" means a
// single element of any rank.
namespace advsum::ad {

// [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]; [k]x[k,n] -> [n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Same shape, or b matches the trailing shape of a and is broadcast over
// a's leading axis.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise; b may also be a single element broadcast over a.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

// Values clipped to [lo, hi]; clipped entries get zero gradient.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Natural log with inputs floored at kLogFloor. Floored entries get zero
// gradient, so a zero probability yields a large finite value.
inline constexpr double kLogFloor = 1e-300;
Tensor log(const Tensor& a);

// Along the last axis; max-subtracted.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);

// Along the last axis. All inputs must agree on every other axis.
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
// Rows [begin, end) of a matrix, or elements [begin, end) of a vector.
Tensor slice(const Tensor& a, std::size_t begin, std::size_t end);
// Equal-shape vectors -> [n, k].
Tensor stack(std::span<const Tensor> rows);
Tensor reshape(const Tensor& a, Shape shape);

// table [V,d] with ids -> [n,d]; single id -> [d].
Tensor embedding(const Tensor& table, std::span<const int> ids);
Tensor embedding(const Tensor& table, int id);

// Valid convolution over time. x [L,d], filters [f, width*d], bias [f]
// -> [L-width+1, f]; window t is the flattened rows t..t+width-1.
Tensor conv_over_time(const Tensor& x, const Tensor& filters,
                      const Tensor& bias, std::size_t width);
// Column-wise max over the first `rows` rows of x [L,f] -> [f]. Ties go to
// the earliest row.
Tensor max_over_time(const Tensor& x, std::size_t rows);

// values [n] scattered into a zero vector of `size` with out[idx[i]] += v[i].
Tensor scatter_add(const Tensor& values, std::span<const int> indices,
                   std::size_t size);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

}  // namespace advsum::ad

#endif  // ADVSUM_OPS_HPP_
