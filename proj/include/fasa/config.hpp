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

// Run configuration: every knob of datagen, model, training, evaluation,
// ablation and sweeps, read from and written to a "key = value" text file.

#ifndef FASA_CONFIG_HPP_
#define FASA_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fasa/datagen.hpp"
#include "fasa/encoder.hpp"
#include "fasa/metrics.hpp"
#include "fasa/model.hpp"
#include "fasa/objectives.hpp"
#include "fasa/optim.hpp"

namespace fasa {

enum class Schedule { kCosine, kConstant };

struct TrainConfig {
  int epochs = 20;
  Index batch = 32;
  std::uint64_t seed = 1;  // data order and augmentation draws
  Schedule schedule = Schedule::kCosine;
  AugmentConfig augment;
};

struct EvalConfig {
  double threshold = kBinarizeThreshold;
  Averaging averaging = Averaging::kMacro;
  Index batch = 16;
};

struct RunConfig {
  DatasetConfig datagen;
  std::string train_dir = "data/train";
  std::string val_dir = "data/val";
  std::string encoder = "standin";  // "standin" or "file:<path>"
  EncoderSpec encoder_spec;
  bool encoder_text = true;
  ModelConfig model;
  LossWeights loss;
  AdamWConfig optim;
  TrainConfig train;
  EvalConfig eval;
  std::vector<std::uint64_t> ablate_seeds = {1, 2, 3};
  std::vector<int> sweep_jpeg = {100, 80, 60, 40};
  std::vector<double> sweep_blur = {0, 1, 2, 3};

  /// Range and consistency checks; throws ConfigError.
  void validate() const;
};

/// Applies "key = value" lines on top of `base`. Blank lines and lines
/// starting with '#' are skipped. Unknown keys and malformed values throw
/// ConfigError naming the line.
RunConfig parse_config(const std::string& text, const RunConfig& base = RunConfig());
RunConfig load_config(const std::string& path);

/// Applies one "key=value" override.
void set_config_value(RunConfig& config, const std::string& assignment);

/// Every key in canonical order, one "key = value" line each.
std::string serialize_config(const RunConfig& config);

/// serialize_config with each key preceded by its description; the default
/// config file is this listing for RunConfig().
std::string documented_config(const RunConfig& config);

/// FNV-1a of serialize_config.
std::uint64_t config_hash(const RunConfig& config);

/// True when FASA_DETERMINISTIC is set to a value other than "" or "0".
bool deterministic_mode();

}  // namespace fasa

#endif  // FASA_CONFIG_HPP_
