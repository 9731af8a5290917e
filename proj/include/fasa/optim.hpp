// Copyright 2026 The fasa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FASA_OPTIM_HPP_
#define FASA_OPTIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "fasa/archive.hpp"
#include "fasa/nn.hpp"

namespace fasa {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// Cosine annealing from base_lr to zero over total_steps, no warmup.
inline double cosine_lr(double base_lr, std::int64_t step, std::int64_t total_steps) {
  if (total_steps <= 0) return base_lr;
  const double t = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * t));
}

/// AdamW with decoupled weight decay applied to every parameter in the
/// store. Moments are kept in double for every scalar type.
template <typename S>
class AdamW {
 public:
  AdamW(ParameterStore<S>& store, const AdamWConfig& config);

  /// One update with learning rate `lr`, using the gradients currently held
  /// by the parameters. Parameters without a gradient are only decayed.
  void step(double lr);

  std::int64_t steps() const { return t_; }

  void save(TensorArchive& archive) const;
  void load(const TensorArchive& archive);

 private:
  ParameterStore<S>& store_;
  AdamWConfig config_;
  std::int64_t t_ = 0;
  std::vector<Eigen::ArrayXd> m_, v_;
};

}  // namespace fasa

#endif  // FASA_OPTIM_HPP_
