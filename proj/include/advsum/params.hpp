// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_PARAMS_HPP_
#define ADVSUM_PARAMS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "advsum/tensor.hpp"

namespace advsum::ad {

/// Named trainable tensors, iterated in name order.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor>;

  /// Registers a new requires_grad tensor. Duplicate names are an error.
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t num_values() const;

  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  /// Deep copy; the clone shares no storage with this set.
  ParamSet clone() const;
  void zero_grad();
  /// Overwrites values from `other`, which must have identical names and shapes.
  void assign(const ParamSet& other);
  bool values_equal(const ParamSet& other) const;

 private:
  Map tensors_;
};

/// Global L2 norm of all gradients.
double grad_norm(const ParamSet& params);

/// p <- p - lr * grad, after rescaling all grads by clip_norm / norm when the
/// global norm exceeds clip_norm. Zeroes grads afterwards. Every parameter
/// must carry a grad buffer.
void sgd_step(ParamSet& params, double lr, std::optional<double> clip_norm = std::nullopt);

inline constexpr const char* kCheckpointTag = "advsum-checkpoint v1";

/// Text checkpoint: tag line, then per parameter a "name rank d0 d1 ..." line
/// followed by one line of values printed with 17 significant digits.
void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);
/// Loads into an existing set, requiring the same names and shapes. Errors name
/// the offending parameter.
void load_checkpoint_into(ParamSet& params, const std::filesystem::path& path);

}  // namespace advsum::ad

#endif  // ADVSUM_PARAMS_HPP_
