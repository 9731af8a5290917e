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

// Central-difference verification of reverse-mode gradients (double only).

#ifndef FASA_GRADCHECK_HPP_
#define FASA_GRADCHECK_HPP_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fasa/model.hpp"

namespace fasa {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-5;
  /// Entries probed per tensor; larger tensors are sampled with `seed`.
  Index max_entries = 6;
  std::uint64_t seed = 17;
};

struct GradcheckResult {
  std::string name;
  Index checked = 0;
  double max_rel_error = 0;
  double max_abs_gradient = 0;
  bool passed = true;
};

/// Compares backward() of `loss` against central differences for each
/// named parameter. `loss` must rebuild the graph from the current
/// parameter values on every call.
std::vector<GradcheckResult> gradcheck(const std::function<Var<double>()>& loss,
                                       const std::vector<std::pair<std::string, Var<double>>>& params,
                                       const GradcheckOptions& options = {});

struct GradientGroup {
  std::string name;
  std::vector<GradcheckResult> results;
  bool passed() const;
  double max_rel_error() const;
};

/// Tiny all-modules configuration used by the gradient suite.
ModelConfig tiny_model_config();
EncoderSpec tiny_encoder_spec();

/// Overwrites every parameter with a seeded random draw (zero-initialized
/// convolutions included) so that every gradient path is exercised.
void randomize_parameters(ParameterStore<double>& store, std::uint64_t seed);

/// Runs the full gradient suite: band cutoffs, the contrastive objective,
/// side adapters, the decoder query / gate / fusion path, and the total
/// objective over every trainable parameter of a tiny model.
std::vector<GradientGroup> run_gradient_suite(const GradcheckOptions& options = {});

}  // namespace fasa

#endif  // FASA_GRADCHECK_HPP_
