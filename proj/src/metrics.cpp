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

#include "fasa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fasa/hash.hpp"

namespace fasa {
namespace {

void require_binary(const Image& m, const char* what) {
  for (Index i = 0; i < m.size(); ++i)
    if (m[i] != 0.0f && m[i] != 1.0f) throw ValidationError(std::string(what) + " is not binary");
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

std::string counts_str(const ConfusionCounts& c) {
  return std::to_string(c.tp) + " " + std::to_string(c.fp) + " " + std::to_string(c.fn) + " " + std::to_string(c.tn);
}

}  // namespace

Image binarize(const Image& prob, double threshold) {
  Image out(prob.shape());
  for (Index i = 0; i < prob.size(); ++i) out[i] = prob[i] > threshold ? 1.0f : 0.0f;
  return out;
}

ConfusionCounts confusion(const Image& pred, const Image& gt) {
  if (pred.shape() != gt.shape())
    throw ValidationError("confusion: prediction " + pred.shape().str() + " vs ground truth " + gt.shape().str());
  require_binary(pred, "prediction");
  require_binary(gt, "ground truth");
  ConfusionCounts c;
  for (Index i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0.0f, g = gt[i] != 0.0f;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  const std::int64_t den = 2 * c.tp + c.fp + c.fn;
  return den == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

double iou_score(const ConfusionCounts& c) {
  const std::int64_t den = c.tp + c.fp + c.fn;
  return den == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double pixel_f1(const Image& pred, const Image& gt) { return f1_score(confusion(pred, gt)); }
double pixel_iou(const Image& pred, const Image& gt) { return iou_score(confusion(pred, gt)); }

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::int64_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share their average.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum += rank;
        ++positives;
      }
    i = j;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double np = static_cast<double>(positives);
  return (rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(negatives));
}

ImageMetrics image_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold) {
  if (scores.empty()) throw ValidationError("image_metrics: empty corpus");
  if (scores.size() != labels.size()) throw ValidationError("image_metrics: scores and labels differ in length");
  ImageMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool p = scores[i] > threshold, g = labels[i] != 0;
    if (p && g) {
      ++m.counts.tp;
    } else if (p) {
      ++m.counts.fp;
    } else if (g) {
      ++m.counts.fn;
    } else {
      ++m.counts.tn;
    }
  }
  m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / static_cast<double>(m.counts.total());
  if (m.counts.tp + m.counts.fn > 0) m.f1 = f1_score(m.counts);
  return m;
}

std::string to_string(Averaging averaging) { return averaging == Averaging::kMacro ? "macro" : "micro"; }

Averaging parse_averaging(const std::string& name) {
  if (name == "macro") return Averaging::kMacro;
  if (name == "micro") return Averaging::kMicro;
  throw ValidationError("unknown averaging '" + name + "' (expected macro or micro)");
}

PixelMetrics pixel_metrics(const std::vector<Image>& probs, const std::vector<Image>& gts, double threshold,
                           Averaging averaging) {
  if (probs.empty()) throw ValidationError("pixel_metrics: empty corpus");
  if (probs.size() != gts.size()) throw ValidationError("pixel_metrics: prediction and mask counts differ");
  PixelMetrics m;
  double f1_sum = 0.0, iou_sum = 0.0;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const ConfusionCounts c = confusion(binarize(probs[i], threshold), gts[i]);
    m.counts += c;
    f1_sum += f1_score(c);
    iou_sum += iou_score(c);
    for (Index p = 0; p < probs[i].size(); ++p) {
      scores.push_back(probs[i][p]);
      labels.push_back(gts[i][p] != 0.0f ? 1 : 0);
    }
  }
  if (averaging == Averaging::kMacro) {
    m.f1 = f1_sum / static_cast<double>(probs.size());
    m.iou = iou_sum / static_cast<double>(probs.size());
  } else {
    m.f1 = f1_score(m.counts);
    m.iou = iou_score(m.counts);
  }
  m.auc = auc(scores, labels);
  return m;
}

EvalReport make_report(const std::string& dataset, const std::vector<Image>& probs, const std::vector<Image>& gts,
                       std::span<const double> scores, double threshold, Averaging averaging) {
  EvalReport r;
  r.dataset = dataset;
  r.images = static_cast<std::int64_t>(probs.size());
  r.pixel_threshold = threshold;
  r.image_threshold = threshold;
  r.averaging = averaging;
  r.pixel = pixel_metrics(probs, gts, threshold, averaging);
  std::vector<std::uint8_t> labels;
  for (const auto& g : gts) labels.push_back((g.array() != 0.0f).any() ? 1 : 0);
  for (auto l : labels) r.positives += l;
  r.image = image_metrics(scores, labels, threshold);
  return r;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os << "fasa-eval-report\t1\n";
  os << "dataset\t" << r.dataset << "\n";
  os << "images\t" << r.images << "\n";
  os << "positives\t" << r.positives << "\n";
  os << "degradation\t" << r.degradation.str() << "\n";
  os << "pixel_threshold\t" << fixed(r.pixel_threshold) << "\n";
  os << "image_threshold\t" << fixed(r.image_threshold) << "\n";
  os << "averaging\t" << to_string(r.averaging) << "\n";
  os << "pixel_f1\t" << fixed(r.pixel.f1) << "\n";
  os << "pixel_iou\t" << fixed(r.pixel.iou) << "\n";
  os << "pixel_auc\t" << fixed(r.pixel.auc) << "\n";
  os << "pixel_counts\t" << counts_str(r.pixel.counts) << "\n";
  os << "image_f1\t" << fixed(r.image.f1) << "\n";
  os << "image_acc\t" << fixed(r.image.accuracy) << "\n";
  os << "image_counts\t" << counts_str(r.image.counts) << "\n";
  os << "manifest_hash\t" << hex64(r.manifest_hash) << "\n";
  os << "config_hash\t" << hex64(r.config_hash) << "\n";
  os << "weights_hash\t" << hex64(r.weights_hash) << "\n";
  os << "encoder_hash\t" << hex64(r.encoder_hash) << "\n";
  return os.str();
}

std::vector<RobustnessRow> robustness_curve(const std::function<EvalReport(const DegradationSpec&)>& evaluate,
                                            const std::vector<DegradationSpec>& grid) {
  if (grid.empty()) throw ValidationError("robustness_curve: empty degradation grid");
  std::vector<RobustnessRow> rows;
  for (const auto& d : grid) {
    try {
      EvalReport rep = evaluate(d);
      rep.degradation = d;
      rows.push_back({d, std::move(rep)});
    } catch (const ValidationError& e) {
      throw ValidationError("severity " + d.str() + ": " + e.what());
    } catch (const std::exception& e) {
      throw RuntimeFailure("severity " + d.str() + ": " + e.what());
    }
  }
  return rows;
}

std::string format_robustness_tsv(const std::vector<RobustnessRow>& rows) {
  std::ostringstream os;
  os << "degradation\tblur_sigma\tjpeg_quality\tpixel_f1\tpixel_iou\tpixel_auc\timage_f1\timage_acc\n";
  for (const auto& row : rows) {
    const auto& d = row.degradation;
    os << d.str() << '\t' << fixed(d.blur_sigma) << '\t' << (d.jpeg_quality ? std::to_string(*d.jpeg_quality) : "none")
       << '\t' << fixed(row.report.pixel.f1) << '\t' << fixed(row.report.pixel.iou) << '\t'
       << fixed(row.report.pixel.auc) << '\t' << fixed(row.report.image.f1) << '\t'
       << fixed(row.report.image.accuracy) << "\n";
  }
  return os.str();
}

}  // namespace fasa
