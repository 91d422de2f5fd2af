// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace advsum::ad {

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  if (tensors_.count(name)) throw ContractError("ParamSet: duplicate parameter '" + name + "'");
  t.node()->requires_grad = true;
  return tensors_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("ParamSet: no parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("ParamSet: no parameter '" + name + "'");
  return it->second;
}

std::size_t ParamSet::num_values() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.size();
  return n;
}

ParamSet ParamSet::clone() const {
  ParamSet out;
  for (const auto& [name, t] : tensors_) out.add(name, t.clone());
  return out;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : tensors_) t.zero_grad();
}

void ParamSet::assign(const ParamSet& other) {
  if (other.size() != size()) throw ContractError("ParamSet::assign: parameter count differs");
  for (auto& [name, t] : tensors_) {
    const Tensor& src = other.at(name);
    if (src.shape() != t.shape()) {
      throw ContractError("ParamSet::assign: parameter '" + name + "' has shape " +
                          shape_str(src.shape()) + ", expected " + shape_str(t.shape()));
    }
    std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
  }
}

bool ParamSet::values_equal(const ParamSet& other) const {
  if (other.size() != size()) return false;
  for (const auto& [name, t] : tensors_) {
    if (!other.contains(name)) return false;
    const Tensor& o = other.at(name);
    if (o.shape() != t.shape()) return false;
    if (!std::equal(t.data().begin(), t.data().end(), o.data().begin())) return false;
  }
  return true;
}

double grad_norm(const ParamSet& params) {
  double sq = 0.0;
  for (const auto& [_, t] : params) {
    if (!t.has_grad()) continue;
    for (double g : t.node()->grad) sq += g * g;
  }
  return std::sqrt(sq);
}

void sgd_step(ParamSet& params, double lr, std::optional<double> clip_norm) {
  if (!(lr > 0)) throw ContractError("sgd_step: learning rate must be positive");
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) throw ContractError("sgd_step: parameter '" + name + "' has no gradient");
  }
  double scale = 1.0;
  if (clip_norm) {
    const double g = grad_norm(params);
    if (g > *clip_norm) scale = *clip_norm / g;
  }
  for (auto& [_, t] : params) {
    auto value = t.mutable_data();
    auto grad = t.mutable_grad();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * (scale * grad[i]);
    std::fill(grad.begin(), grad.end(), 0.0);
  }
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << kCheckpointTag << '\n';
  char buf[40];
  for (const auto& [name, t] : params) {
    out << name << ' ' << t.rank();
    for (auto d : t.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", t[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointTag) {
    throw std::runtime_error(path.string() + ": not an advsum checkpoint");
  }
  ParamSet params;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream header(line);
    std::string name;
    std::size_t rank = 0;
    if (!(header >> name >> rank)) throw std::runtime_error(path.string() + ": bad header '" + line + "'");
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(header >> d)) throw std::runtime_error(path.string() + ": bad shape for '" + name + "'");
    }
    std::string values_line;
    if (!std::getline(in, values_line)) {
      throw std::runtime_error(path.string() + ": missing values for '" + name + "'");
    }
    std::vector<double> values;
    values.reserve(numel(shape));
    const char* p = values_line.c_str();
    char* end = nullptr;
    for (double v = std::strtod(p, &end); end != p; v = std::strtod(p, &end)) {
      values.push_back(v);
      p = end;
    }
    if (values.size() != numel(shape)) {
      throw std::runtime_error(path.string() + ": parameter '" + name + "' expects " +
                               std::to_string(numel(shape)) + " values, found " +
                               std::to_string(values.size()));
    }
    params.add(name, Tensor::from(std::move(shape), std::move(values)));
  }
  return params;
}

void load_checkpoint_into(ParamSet& params, const std::filesystem::path& path) {
  ParamSet loaded = load_checkpoint(path);
  for (const auto& [name, t] : params) {
    if (!loaded.contains(name)) {
      throw std::runtime_error(path.string() + ": missing parameter '" + name + "'");
    }
    const Tensor& src = loaded.at(name);
    if (src.shape() != t.shape()) {
      throw std::runtime_error(path.string() + ": parameter '" + name + "' has shape " +
                               shape_str(src.shape()) + ", model expects " + shape_str(t.shape()));
    }
  }
  for (const auto& [name, _] : loaded) {
    if (!params.contains(name)) {
      throw std::runtime_error(path.string() + ": unexpected parameter '" + name + "'");
    }
  }
  params.assign(loaded);
}

}  // namespace advsum::ad
