// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace advsum::ad {

namespace {

double eval_no_grad(const std::function<Tensor()>& f) {
  NoGradGuard guard;
  const double v = f().item();
  if (!std::isfinite(v)) throw NumericError("gradient_check: f is non-finite at a perturbed point");
  return v;
}

GradCheckReport check(const std::function<Tensor()>& f, std::vector<Tensor> wrt, double h,
                      double tol) {
  if (!(h > 0)) throw ContractError("gradient_check: h must be positive");
  GradCheckReport report;
  {
    for (auto& t : wrt) {
      t.node()->requires_grad = true;
      t.zero_grad();
    }
    Tape tape;
    Tensor loss = f();
    tape.backward(loss);
    for (auto& t : wrt) {
      auto g = t.grad();
      report.analytic.insert(report.analytic.end(), g.begin(), g.end());
      t.zero_grad();
    }
  }
  for (auto& t : wrt) {
    auto values = t.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = eval_no_grad(f);
      values[i] = saved - h;
      const double down = eval_no_grad(f);
      values[i] = saved;
      report.numeric.push_back((up - down) / (2.0 * h));
    }
  }
  for (std::size_t i = 0; i < report.analytic.size(); ++i) {
    const double a = report.analytic[i], n = report.numeric[i];
    const double err = std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
    report.rel_error.push_back(err);
    report.max_rel_error = std::max(report.max_rel_error, err);
    if (!(err <= tol)) report.flagged.push_back(i);
  }
  return report;
}

}  // namespace

GradCheckReport gradient_check(const std::function<Tensor(const Tensor&)>& f, Tensor point,
                               double h, double tol) {
  return check([&] { return f(point); }, {point}, h, tol);
}

GradCheckReport gradient_check(const std::function<Tensor()>& f, ParamSet& params, double h,
                               double tol) {
  std::vector<Tensor> wrt;
  for (auto& [_, t] : params) wrt.push_back(t);
  return check(f, std::move(wrt), h, tol);
}

}  // namespace advsum::ad
