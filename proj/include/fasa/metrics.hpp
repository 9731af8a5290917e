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

// Pixel-level (F1, IoU, AUC) and image-level (F1, accuracy) evaluation,
// the EvalReport text format, and robustness curves.

#ifndef FASA_METRICS_HPP_
#define FASA_METRICS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fasa/datagen.hpp"
#include "fasa/image_io.hpp"

namespace fasa {

inline constexpr double kBinarizeThreshold = 0.5;

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// 1 where value > threshold (strict), else 0.
Image binarize(const Image& prob, double threshold = kBinarizeThreshold);

/// Counts over two binary maps of the same shape.
ConfusionCounts confusion(const Image& pred, const Image& gt);

/// 2TP / (2TP + FP + FN), and 1.0 when prediction and ground truth are both
/// empty (TP + FP + FN = 0).
double f1_score(const ConfusionCounts& c);
/// TP / (TP + FP + FN), and 1.0 when both are empty.
double iou_score(const ConfusionCounts& c);

double pixel_f1(const Image& pred, const Image& gt);
double pixel_iou(const Image& pred, const Image& gt);

/// Mann-Whitney AUC with tied scores counted 0.5. nullopt when the labels
/// hold a single class.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ImageMetrics {
  ConfusionCounts counts;
  std::optional<double> f1;  // nullopt when the corpus has no positives
  double accuracy = 0.0;
};

/// Predicted manipulated iff score > threshold.
ImageMetrics image_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           double threshold = kBinarizeThreshold);

enum class Averaging { kMacro, kMicro };
std::string to_string(Averaging averaging);
Averaging parse_averaging(const std::string& name);

struct PixelMetrics {
  double f1 = 0.0;
  double iou = 0.0;
  std::optional<double> auc;  // pooled over every pixel of the corpus
  ConfusionCounts counts;     // pooled
};

/// Macro: per-image F1 / IoU averaged in corpus order. Micro: F1 / IoU of the
/// pooled counts. probs and gts are [1, H, W] per image.
PixelMetrics pixel_metrics(const std::vector<Image>& probs, const std::vector<Image>& gts,
                           double threshold = kBinarizeThreshold, Averaging averaging = Averaging::kMacro);

struct EvalReport {
  std::string dataset;
  std::int64_t images = 0;
  std::int64_t positives = 0;
  double pixel_threshold = kBinarizeThreshold;
  double image_threshold = kBinarizeThreshold;
  Averaging averaging = Averaging::kMacro;
  DegradationSpec degradation;
  PixelMetrics pixel;
  ImageMetrics image;
  std::uint64_t manifest_hash = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t weights_hash = 0;
  std::uint64_t encoder_hash = 0;
};

/// Builds a report from per-image probability maps and scores.
EvalReport make_report(const std::string& dataset, const std::vector<Image>& probs, const std::vector<Image>& gts,
                       std::span<const double> scores, double threshold, Averaging averaging);

/// Line-oriented "key<TAB>value" text; numbers use %.6f, hashes 16 hex digits,
/// undefined values "n/a".
std::string format_report(const EvalReport& report);

struct RobustnessRow {
  DegradationSpec degradation;
  EvalReport report;
};

/// Evaluates every grid point in order. Failures are rethrown with the
/// severity that caused them.
std::vector<RobustnessRow> robustness_curve(const std::function<EvalReport(const DegradationSpec&)>& evaluate,
                                            const std::vector<DegradationSpec>& grid);

/// TSV with header "degradation blur_sigma jpeg_quality pixel_f1 pixel_iou
/// pixel_auc image_f1 image_acc".
std::string format_robustness_tsv(const std::vector<RobustnessRow>& rows);

}  // namespace fasa

#endif  // FASA_METRICS_HPP_
