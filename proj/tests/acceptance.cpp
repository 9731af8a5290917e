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

// Acceptance run: ten criteria, one PASS/FAIL line each. Exits non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fasa/config.hpp"
#include "fasa/freq_backbone.hpp"
#include "fasa/freq_dct.hpp"
#include "fasa/gradcheck.hpp"
#include "fasa/harness.hpp"
#include "fasa/mask_decoder.hpp"
#include "fasa/metrics.hpp"
#include "fasa/objectives.hpp"
#include "fasa/semantic_align.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using ::fasa::Corpus;
using ::fasa::Image;
using ::fasa::Index;
using ::fasa::RunConfig;
using ::fasa::Shape;
using ::fasa::Tensor;
using ::fasa::testing::random_tensor;

const std::string kSourceDir = FASA_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

/// Shared state for the training-based criteria.
class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  std::string dir(const std::string& name) const {
    const fs::path p = root_ / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
  }

  /// configs/smoke.cfg with the corpus directories under the work dir.
  RunConfig smoke_config() const {
    RunConfig c = fasa::load_config(kSourceDir + "/configs/smoke.cfg");
    c.train_dir = (root_ / "smoke_train").string();
    c.val_dir = (root_ / "smoke_val").string();
    c.validate();
    return c;
  }

  /// 200 training and 50 validation 64x64 samples from fixed seeds.
  void make_smoke_corpora() {
    if (train_) return;
    const RunConfig c = smoke_config();
    fasa::DatasetConfig d = c.datagen;
    d.size = 64;
    d.count = 200;
    d.seed = 7;
    fs::remove_all(c.train_dir);
    fasa::make_dataset(d, c.train_dir);
    d.count = 50;
    d.seed = 1007;
    fs::remove_all(c.val_dir);
    fasa::make_dataset(d, c.val_dir);
    train_ = std::make_unique<Corpus>(fasa::load_corpus(c.train_dir));
    val_ = std::make_unique<Corpus>(fasa::load_corpus(c.val_dir));
  }

  const Corpus& train() const { return *train_; }
  const Corpus& val() const { return *val_; }

  std::unique_ptr<fasa::Model> smoke_model;
  double smoke_seconds = 0.0;

 private:
  fs::path root_;
  std::unique_ptr<Corpus> train_, val_;
};

Outcome dct_correctness() {
  const Stopwatch clock;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = random_tensor<float>(Shape{3, 64, 64}, 1000 + seed, 0, 1);
    const auto back = fasa::idct2(fasa::dct2(x));
    worst = std::max(worst, static_cast<double>((back.array() - x.array()).abs().maxCoeff()));
  }
  const auto dc = fasa::dct2(Tensor<float>::constant(Shape{64, 64}, 0.5f));
  double off_dc = 0.0;
  for (Index i = 1; i < dc.size(); ++i) off_dc = std::max(off_dc, std::abs(static_cast<double>(dc[i])));
  const double t = clock.seconds();
  const bool pass = worst < 1e-6 && dc[0] == 32.0f && off_dc < 1e-6 && t < 10.0;
  return {pass, "round-trip max err " + fmt("%.3e", worst) + ", DC " + fmt("%.9g", dc[0]) + " (expect 32), off-DC " +
                    fmt("%.3e", off_dc) + ", " + fmt("%.2f", t) + " s"};
}

Outcome gradient_suite() {
  const Stopwatch clock;
  const auto groups = fasa::run_gradient_suite();
  bool pass = !groups.empty();
  std::string detail;
  for (const auto& g : groups) {
    pass = pass && g.passed();
    detail += g.name + " " + fmt("%.2e", g.max_rel_error()) + (g.passed() ? "" : " FAILED") + "; ";
  }
  const double t = clock.seconds();
  pass = pass && t < 120.0;
  return {pass, detail + fmt("%.1f", t) + " s"};
}

Outcome closed_form_losses() {
  using V = fasa::Var<double>;
  const double ln2 = std::log(2.0);

  const Index d = 6;
  const auto er = random_tensor<double>(Shape{d}, 20);
  Tensor<double> ef(Shape{d});
  for (Index k = 0; k < d; ++k) ef[k] = er[(k + 1) % d];
  Tensor<double> z(Shape{3, d});
  for (Index i = 0; i < z.size(); ++i) z[i] = 1.0 + static_cast<double>(i / d);
  const double symmetric = fasa::contrastive_loss(fasa::constant(z), {0, 1, 1}, fasa::constant(er),
                                                  fasa::constant(ef), fasa::constant(Tensor<double>::scalar(0.3)))
                               .value()[0];

  Tensor<double> pr(Shape{4}), pf(Shape{4});
  pr[0] = 1;
  pf[1] = 1;
  const std::vector<int> y = {0, 1, 1, 0, 1};
  Tensor<double> zo(Shape{5, 4});
  for (std::size_t i = 0; i < y.size(); ++i) zo[static_cast<Index>(i) * 4 + y[i]] = 1;
  const double orthonormal = fasa::contrastive_loss(fasa::constant(zo), y, fasa::constant(pr), fasa::constant(pf),
                                                    fasa::constant(Tensor<double>::scalar(1.0)))
                                 .value()[0];
  const double orthonormal_expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));

  const V half = fasa::constant(Tensor<double>::constant(Shape{2, 1, 8, 8}, 0.5));
  Tensor<double> gt(Shape{2, 1, 8, 8});
  for (Index i = 0; i < gt.size(); ++i) gt[i] = (i * 7 % 3 == 0) ? 1.0 : 0.0;
  const double bce = fasa::mask_loss(half, gt).value()[0];

  const bool pass = std::abs(symmetric - ln2) <= 1e-6 && std::abs(orthonormal - orthonormal_expect) <= 1e-6 &&
                    std::abs(bce - ln2) <= 1e-6;
  return {pass, "InfoNCE symmetric " + fmt("%.9f", symmetric) + ", orthonormal " + fmt("%.9f", orthonormal) +
                    " (expect " + fmt("%.9f", orthonormal_expect) + "), BCE uniform " + fmt("%.9f", bce) +
                    " (ln2 " + fmt("%.9f", ln2) + ")"};
}

Outcome structural_identities() {
  // Zero-initialized side adapters leave the backbone stages untouched.
  auto encoder = fasa::make_standin_encoder<double>(fasa::tiny_encoder_spec());
  encoder->enable_hashed_text(true);
  const fasa::FasaModel<double> model(fasa::tiny_model_config(), encoder);
  const auto images = random_tensor<double>(Shape{2, 3, 32, 32}, 5, 0, 1);
  const auto out = model.forward(images);
  const auto plain = model.backbone().forward_stages(out.input);
  bool injection_identity = !model.adapters().empty() && plain.size() == out.stages.size();
  for (std::size_t k = 0; injection_identity && k < plain.size(); ++k)
    injection_identity = (plain[k].value().array() == out.stages[k].value().array()).all();

  fasa::ParameterStore<double> store(4);
  fasa::Conv2d<double> phi(store, "phi", 4, 1, 1, 1, 0);
  phi.bias.mutable_value()[0] = 0.3;
  const auto b = random_tensor<double>(Shape{2, 4, 5, 3}, 16);
  const auto g = random_tensor<double>(Shape{2, 4, 5, 3}, 17, 0, 1);
  const auto zero_gates = fasa::constant(Tensor<double>(Shape{2, 4, 5, 3}));
  const bool closed_gates =
      (fasa::fuse(fasa::constant(b), zero_gates, phi).value().array() == phi(fasa::constant(b)).value().array())
          .all();

  const auto o = fasa::fuse(fasa::constant(b), fasa::constant(g), phi).value();
  double fusion_err = 0.0;
  for (Index n = 0; n < 2; ++n)
    for (Index p = 0; p < 15; ++p) {
      double expect = phi.bias.value()[0];
      for (Index k = 0; k < 4; ++k) {
        const double bk = b[(n * 4 + k) * 15 + p];
        expect += g[(n * 4 + k) * 15 + p] * bk + phi.weight.value()[k] * bk;
      }
      fusion_err = std::max(fusion_err, std::abs(o[n * 15 + p] - expect));
    }

  const auto prob = random_tensor<double>(Shape{4, 1, 16, 16}, 18, 0, 1);
  const auto scores = fasa::image_score(prob);
  bool score_max = scores.size() == 4;
  for (Index n = 0; score_max && n < 4; ++n) {
    double m = -1.0;
    for (Index i = 0; i < 256; ++i) m = std::max(m, prob[n * 256 + i]);
    score_max = scores[static_cast<std::size_t>(n)] == m;
  }

  const bool pass = injection_identity && closed_gates && fusion_err < 1e-6 && score_max;
  return {pass, std::string("zero-init injection ") + (injection_identity ? "exact" : "differs") + ", G=0 fusion " +
                    (closed_gates ? "exact" : "differs") + ", fusion oracle err " + fmt("%.2e", fusion_err) +
                    ", image score " + (score_max ? "exact max" : "differs")};
}

double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

Outcome metrics_oracles() {
  std::int64_t mismatches = 0;
  double identity_err = 0.0;
  for (int a = 0; a < 512; ++a)
    for (int b = 0; b < 512; ++b) {
      Image pred(Shape{1, 3, 3}), gt(Shape{1, 3, 3});
      for (int i = 0; i < 9; ++i) {
        pred[i] = static_cast<float>((a >> i) & 1);
        gt[i] = static_cast<float>((b >> i) & 1);
      }
      const int tp = __builtin_popcount(a & b), fp = __builtin_popcount(a & ~b & 511),
                fn = __builtin_popcount(~a & b & 511);
      const int errors = tp + fp + fn;
      const double f1 = errors == 0 ? 1.0 : 2.0 * tp / (2.0 * tp + fp + fn);
      const double iou = errors == 0 ? 1.0 : static_cast<double>(tp) / errors;
      const double got_f1 = fasa::pixel_f1(pred, gt), got_iou = fasa::pixel_iou(pred, gt);
      if (got_f1 != f1 || got_iou != iou) ++mismatches;
      identity_err = std::max(identity_err, std::abs(got_f1 - 2 * got_iou / (1 + got_iou)));
    }

  fasa::Rng rng(2026);
  double auc_err = 0.0;
  int sets = 0;
  while (sets < 1000) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.integer(0, 80));
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = (sets % 2 == 0) ? rng.uniform(0, 1) : std::round(rng.uniform(0, 1) * 10) / 10;
      y[i] = static_cast<std::uint8_t>(rng.bernoulli(0.5));
    }
    y[0] = 0;
    y[1] = 1;
    const auto a = fasa::auc(s, y);
    if (!a) return {false, "AUC undefined on a two-class score set"};
    auc_err = std::max(auc_err, std::abs(*a - pairwise_auc(s, y)));
    ++sets;
  }
  const bool pass = mismatches == 0 && auc_err < 1e-12 && identity_err < 1e-12;
  return {pass, std::to_string(mismatches) + " F1/IoU mismatches over 262144 3x3 pairs, AUC max err " +
                    fmt("%.2e", auc_err) + " over 1000 sets, F1-IoU identity err " + fmt("%.2e", identity_err)};
}

Outcome frozen_encoder(Workspace& ws) {
  RunConfig c = fasa::testing::tiny_run_config();
  c.train.epochs = 5;
  const std::string root = ws.dir("frozen");
  c.datagen.seed = 11;
  fasa::make_dataset(c.datagen, root + "/train");
  c.datagen.seed = 12;
  c.datagen.count = 8;
  fasa::make_dataset(c.datagen, root + "/val");
  const Corpus train = fasa::load_corpus(root + "/train");
  const Corpus val = fasa::load_corpus(root + "/val");
  const std::uint64_t fresh = fasa::make_encoder(c)->parameter_hash();
  const auto r = fasa::train(c, train, val, fasa::TrainOptions{});
  bool pass = r.epochs.size() == 5 && r.initial_encoder_hash == fresh && r.model->encoder_hash() == fresh;
  for (const auto& e : r.epochs) pass = pass && e.encoder_hash == fresh;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fresh));
  return {pass, std::to_string(r.epochs.size()) + " epochs, encoder hash " + hex +
                    (pass ? " at every epoch" : " changed")};
}

Outcome learnability(Workspace& ws) {
  const Stopwatch clock;
  ws.make_smoke_corpora();
  const RunConfig c = ws.smoke_config();
  fasa::TrainOptions o;
  o.out_dir = ws.dir("smoke_run");
  o.deterministic = true;
  o.progress = &std::cerr;
  auto r = fasa::train(c, ws.train(), ws.val(), o);
  const auto report = fasa::evaluate_model(*r.model, ws.val(), {}, c);
  fasa::write_text_file(o.out_dir + "/val_report.txt", fasa::format_report(report));
  ws.smoke_model = std::move(r.model);
  ws.smoke_seconds = clock.seconds();
  const bool pass = c.train.epochs <= 10 && report.pixel.f1 >= 0.60 && report.image.accuracy >= 0.80 &&
                    ws.smoke_seconds <= 600.0;
  return {pass, std::to_string(c.train.epochs) + " epochs, val pixel F1 " + fmt("%.4f", report.pixel.f1) +
                    " (>= 0.60), image acc " + fmt("%.4f", report.image.accuracy) + " (>= 0.80), " +
                    fmt("%.1f", ws.smoke_seconds) + " s"};
}

Outcome ablation_direction(Workspace& ws) {
  ws.make_smoke_corpora();
  const RunConfig base = ws.smoke_config();
  const auto ladder = fasa::ablation_ladder();
  const auto mean_f1 = [&](const fasa::LadderVariant& variant, std::string& per_seed) {
    double total = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      RunConfig c = base;
      c.model.flags = variant.flags;
      c.model.seed = seed;
      c.train.seed = seed;
      fasa::TrainOptions o;
      o.deterministic = true;
      std::cerr << "ablation " << variant.name << " seed " << seed << std::endl;
      const auto r = fasa::train(c, ws.train(), ws.val(), o);
      const double f1 = fasa::evaluate_model(*r.model, ws.val(), {}, c).pixel.f1;
      per_seed += (per_seed.empty() ? "" : ",") + fmt("%.3f", f1);
      total += f1;
    }
    return total / 3.0;
  };
  std::string base_seeds, full_seeds;
  const double baseline = mean_f1(ladder.front(), base_seeds);
  const double full = mean_f1(ladder.back(), full_seeds);
  return {full >= baseline, "full mean pixel F1 " + fmt("%.4f", full) + " [" + full_seeds + "] vs Baseline " +
                                fmt("%.4f", baseline) + " [" + base_seeds + "]"};
}

Outcome determinism(Workspace& ws) {
  ws.make_smoke_corpora();
  RunConfig c = ws.smoke_config();
  c.train.epochs = 2;
  std::vector<std::string> logs, reports;
  for (const char* name : {"det_a", "det_b"}) {
    fasa::TrainOptions o;
    o.out_dir = ws.dir(name);
    o.deterministic = true;
    const auto r = fasa::train(c, ws.train(), ws.val(), o);
    logs.push_back(fasa::testing::read_file(o.out_dir + "/train_log.tsv"));
    const auto loaded = fasa::load_checkpoint(r.last_checkpoint);
    reports.push_back(fasa::format_report(fasa::evaluate_model(*loaded.model, ws.val(), {}, loaded.config)));
  }
  const bool pass = !logs[0].empty() && logs[0] == logs[1] && reports[0] == reports[1];
  return {pass, std::string("train logs ") + (logs[0] == logs[1] ? "identical" : "differ") + " (" +
                    std::to_string(logs[0].size()) + " bytes), EvalReports " +
                    (reports[0] == reports[1] ? "identical" : "differ")};
}

bool same_scores(const fasa::EvalReport& a, const fasa::EvalReport& b) {
  return a.pixel.f1 == b.pixel.f1 && a.pixel.iou == b.pixel.iou && a.pixel.auc == b.pixel.auc &&
         a.pixel.counts.tp == b.pixel.counts.tp && a.pixel.counts.fp == b.pixel.counts.fp &&
         a.pixel.counts.fn == b.pixel.counts.fn && a.pixel.counts.tn == b.pixel.counts.tn &&
         a.image.f1 == b.image.f1 && a.image.accuracy == b.image.accuracy;
}

Outcome robustness(Workspace& ws) {
  if (!ws.smoke_model) return {false, "no trained smoke model (criterion 7 did not run)"};
  RunConfig c = ws.smoke_config();
  c.sweep_jpeg = {100, 80, 60, 40};
  c.sweep_blur = {0, 1, 2, 3};
  const std::string out = ws.dir("sweep");
  std::ostringstream warnings;
  const auto s = fasa::sweep(*ws.smoke_model, c, ws.val(), out, &warnings);
  const bool complete = s.jpeg.size() == 4 && s.blur.size() == 4 && warnings.str().empty();
  const bool identity = complete && s.blur[0].degradation == fasa::DegradationSpec() && same_scores(s.blur[0].report, s.clean);
  const auto psnr = fasa::jpeg_psnr_table(ws.val(), c.sweep_jpeg);
  std::int64_t violations = 0;
  for (const auto& row : psnr)
    for (std::size_t q = 1; q < row.size(); ++q)
      if (row[q] > row[q - 1]) ++violations;
  const bool pass = complete && identity && violations == 0 && psnr.size() == ws.val().records.size();
  std::string detail = std::string("grid ") + (complete ? "complete" : "incomplete") + ", identity severity " +
                       (identity ? "equals clean" : "differs from clean") + ", PSNR order violations " +
                       std::to_string(violations) + " over " + std::to_string(psnr.size()) + " images";
  if (!warnings.str().empty()) detail += ", warnings: " + warnings.str();
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work_dir = (fs::temp_directory_path() / "fasa_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory for corpora and runs");
  app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  Workspace ws(work_dir);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dct-correctness", dct_correctness},
      {"gradient-suite", gradient_suite},
      {"closed-form-losses", closed_form_losses},
      {"structural-identities", structural_identities},
      {"metrics-oracles", metrics_oracles},
      {"frozen-encoder", [&] { return frozen_encoder(ws); }},
      {"learnability", [&] { return learnability(ws); }},
      {"ablation-direction", [&] { return ablation_direction(ws); }},
      {"determinism", [&] { return determinism(ws); }},
      {"robustness", [&] { return robustness(ws); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << number << " " << criteria[i].first << ": "
              << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
