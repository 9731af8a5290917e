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

// Orchestration: training with checkpoints and resume, evaluation, the
// ablation ladder, robustness sweeps and plot emission.

#ifndef FASA_HARNESS_HPP_
#define FASA_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fasa/config.hpp"
#include "fasa/datagen.hpp"
#include "fasa/metrics.hpp"
#include "fasa/model.hpp"

namespace fasa {

using Model = FasaModel<float>;

/// The frozen encoder a config names. Stand-in text support follows
/// encoder.text.
std::shared_ptr<EncoderAdapter<float>> make_encoder(const RunConfig& config);

struct Predictions {
  std::vector<Image> probs;  // [1, H, W] per image
  std::vector<double> scores;
};

/// Runs the model over `images` ([3, S, S] each) in batches.
Predictions predict(const Model& model, const std::vector<Image>& images, Index batch);

/// Degrades every image (masks untouched), predicts, and scores the corpus.
EvalReport evaluate_model(const Model& model, const Corpus& corpus, const DegradationSpec& degradation,
                          const RunConfig& config);

struct TrainState {
  int epoch = 0;  // completed epochs
  std::int64_t steps = 0;
  double best_f1 = -1.0;
  int best_epoch = 0;
};

/// Parameters, optimizer moments, training state, the serialized config,
/// the encoder manifest and hash, and the corpus manifest hashes.
struct CheckpointInfo {
  TrainState state;
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::string encoder_manifest;
  std::uint64_t encoder_hash = 0;
  std::uint64_t weights_hash = 0;
  std::uint64_t train_manifest_hash = 0;
  std::uint64_t val_manifest_hash = 0;
};

struct LoadedModel {
  RunConfig config;
  CheckpointInfo info;
  std::shared_ptr<EncoderAdapter<float>> encoder;
  std::unique_ptr<Model> model;
};

/// Rebuilds the model from a checkpoint, applying "key=value" overrides to
/// the stored config first. Throws ConfigError when the encoder the config
/// names has a different manifest or hash than the one the checkpoint was
/// trained against.
LoadedModel load_checkpoint(const std::string& path, const std::vector<std::string>& overrides = {});

/// Reads only the metadata of a checkpoint.
CheckpointInfo read_checkpoint_info(const std::string& path);

struct EpochRecord {
  int epoch = 0;
  std::int64_t steps = 0;
  double lr = 0.0;
  double l_mask = 0, l_edge = 0, l_pc = 0, total = 0;  // epoch averages
  EvalReport val;
  std::uint64_t encoder_hash = 0;
  double seconds = 0.0;
};

struct TrainOptions {
  std::string out_dir;            // checkpoints and train_log.tsv; empty keeps everything in memory
  std::string resume;             // checkpoint to continue from
  std::optional<int> stop_after;  // stop after this many epochs in this call
  bool deterministic = false;     // drop timing from logs
  std::ostream* progress = nullptr;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;  // epochs run by this call
  std::string log;                  // full TSV log including resumed history
  TrainState state;
  std::uint64_t initial_encoder_hash = 0;
  std::string best_checkpoint, last_checkpoint;
  std::unique_ptr<Model> model;  // final weights
};

/// Header of the per-epoch TSV log.
std::string train_log_header(bool deterministic);
std::string format_epoch(const EpochRecord& record, bool deterministic);

/// Trains on `train` and validates on `val` after every epoch. Throws
/// RuntimeFailure on a non-finite loss (naming epoch and batch) or when the
/// encoder hash changes, and ValidationError when the corpora do not match
/// the config or the resumed checkpoint.
TrainResult train(const RunConfig& config, const Corpus& train, const Corpus& val, const TrainOptions& options);

/// Loads data.train / data.val and trains.
TrainResult train(const RunConfig& config, const TrainOptions& options);

struct AblationRow {
  std::string variant;
  AblationFlags flags;
  std::vector<std::uint64_t> seeds;
  std::vector<double> pixel_f1, pixel_iou;
  double mean_f1 = 0.0, mean_iou = 0.0;
  std::string error;  // non-empty when the variant failed
};

/// Trains and evaluates every ladder variant for every seed in
/// ablate.seeds on the same corpora. A failing variant is recorded and the
/// ladder continues.
std::vector<AblationRow> ablate(const RunConfig& config, const Corpus& train, const Corpus& val,
                                const TrainOptions& options);
std::string format_ablation_tsv(const std::vector<AblationRow>& rows);

struct SweepResult {
  EvalReport clean;
  std::vector<RobustnessRow> jpeg, blur;
  /// Mean and minimum PSNR against the clean image for every JPEG quality.
  std::string psnr_tsv;
  std::vector<std::string> plots;  // plot files written
};

/// JPEG and blur grids from the config. Tables are written before plots; a
/// plot failure is reported on `warnings` and never discards a table.
SweepResult sweep(const Model& model, const RunConfig& config, const Corpus& corpus, const std::string& out_dir,
                  std::ostream* warnings = nullptr);

/// Per-image PSNR of every JPEG quality in `qualities` against the clean image.
std::vector<std::vector<double>> jpeg_psnr_table(const Corpus& corpus, const std::vector<int>& qualities);

struct PlotSeries {
  std::string name;
  std::vector<double> y;
};

/// Minimal SVG line chart over categorical x positions.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::vector<std::string>& x,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace fasa

#endif  // FASA_HARNESS_HPP_
