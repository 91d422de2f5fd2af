// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_GRADCHECK_HPP_
#define ADVSUM_GRADCHECK_HPP_

#include <functional>
#include <vector>

#include "advsum/params.hpp"
#include "advsum/tensor.hpp"

namespace advsum::ad {

struct GradCheckReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  // |g_ad - g_fd| / max(1, |g_ad|, |g_fd|) per coordinate.
  std::vector<double> rel_error;
  std::vector<std::size_t> flagged;  // coordinates with rel_error > tol
  double max_rel_error = 0.0;

  bool passed() const { return flagged.empty(); }
};

/// Compares reverse-mode gradients of scalar f at `point` against central
/// differences with step h. `point` is perturbed in place and restored.
GradCheckReport gradient_check(const std::function<Tensor(const Tensor&)>& f, Tensor point,
                               double h, double tol);

/// Same check over every value of a parameter set; f reads the parameters
/// through its own captures.
GradCheckReport gradient_check(const std::function<Tensor()>& f, ParamSet& params, double h,
                               double tol);

}  // namespace advsum::ad

#endif  // ADVSUM_GRADCHECK_HPP_
