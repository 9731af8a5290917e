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

#include "fasa/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fasa/error.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using ::fasa::Corpus;
using ::fasa::RunConfig;
using ::fasa::TrainOptions;
using ::fasa::testing::read_file;
using ::fasa::testing::tiny_run_config;

class HarnessTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() / ("fasa_harness_" + std::to_string(::getpid())));
    fs::remove_all(*root_);
    fs::create_directories(*root_);
    RunConfig c = tiny_run_config();
    c.datagen.seed = 7;
    fasa::make_dataset(c.datagen, (*root_ / "train").string());
    c.datagen.seed = 1007;
    c.datagen.count = 8;
    fasa::make_dataset(c.datagen, (*root_ / "val").string());
    c.datagen.authentic_fraction = 1.0;
    fasa::make_dataset(c.datagen, (*root_ / "authentic").string());
    train_ = new Corpus(fasa::load_corpus((*root_ / "train").string()));
    val_ = new Corpus(fasa::load_corpus((*root_ / "val").string()));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete train_;
    delete val_;
    delete root_;
  }

  static std::string dir(const std::string& name) {
    const fs::path p = *root_ / name;
    fs::create_directories(p);
    return p.string();
  }

  static RunConfig config() {
    RunConfig c = tiny_run_config();
    c.train_dir = (*root_ / "train").string();
    c.val_dir = (*root_ / "val").string();
    return c;
  }

  static fs::path* root_;
  static Corpus* train_;
  static Corpus* val_;
};

fs::path* HarnessTest::root_ = nullptr;
Corpus* HarnessTest::train_ = nullptr;
Corpus* HarnessTest::val_ = nullptr;

TrainOptions one_epoch() {
  TrainOptions o;
  o.stop_after = 1;
  return o;
}

std::vector<std::vector<float>> parameter_values(const fasa::Model& model) {
  std::vector<std::vector<float>> out;
  for (const auto& [name, v] : model.parameters().entries())
    out.emplace_back(v.value().array().data(), v.value().array().data() + v.value().size());
  return out;
}

TEST_F(HarnessTest, TrainWritesCheckpointsAndLog) {
  TrainOptions o;
  o.out_dir = dir("train_basic");
  o.deterministic = true;
  const auto r = fasa::train(config(), *train_, *val_, o);
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(r.state.epoch, 2);
  EXPECT_TRUE(fs::exists(r.best_checkpoint));
  EXPECT_TRUE(fs::exists(r.last_checkpoint));
  EXPECT_EQ(read_file(o.out_dir + "/train_log.tsv"), r.log);
  EXPECT_EQ(r.log.rfind(fasa::train_log_header(true), 0), 0u);
  const auto info = fasa::read_checkpoint_info(r.last_checkpoint);
  EXPECT_EQ(info.state.epoch, 2);
  EXPECT_EQ(info.train_manifest_hash, train_->manifest_hash);
  EXPECT_EQ(info.val_manifest_hash, val_->manifest_hash);
  EXPECT_EQ(info.weights_hash, r.model->parameters().hash());
}

TEST_F(HarnessTest, EncoderHashNeverChanges) {
  const auto r = fasa::train(config(), *train_, *val_, TrainOptions{});
  for (const auto& e : r.epochs) EXPECT_EQ(e.encoder_hash, r.initial_encoder_hash) << "epoch " << e.epoch;
  EXPECT_EQ(r.model->encoder_hash(), r.initial_encoder_hash);
}

TEST_F(HarnessTest, DeterministicRunsAgree) {
  TrainOptions o;
  o.deterministic = true;
  const auto a = fasa::train(config(), *train_, *val_, o);
  const auto b = fasa::train(config(), *train_, *val_, o);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.model->parameters().hash(), b.model->parameters().hash());
}

TEST_F(HarnessTest, ResumeMatchesUninterruptedRun) {
  RunConfig c = config();
  c.train.epochs = 3;
  TrainOptions full;
  full.out_dir = dir("resume_full");
  full.deterministic = true;
  const auto straight = fasa::train(c, *train_, *val_, full);

  TrainOptions first;
  first.out_dir = dir("resume_split");
  first.deterministic = true;
  first.stop_after = 1;
  const auto head = fasa::train(c, *train_, *val_, first);
  ASSERT_EQ(head.state.epoch, 1);
  TrainOptions second = first;
  second.stop_after.reset();
  second.resume = head.last_checkpoint;
  const auto tail = fasa::train(c, *train_, *val_, second);
  EXPECT_EQ(tail.state.epoch, 3);
  EXPECT_EQ(tail.epochs.size(), 2u);
  EXPECT_EQ(parameter_values(*tail.model), parameter_values(*straight.model));
  EXPECT_EQ(tail.log, straight.log);
  EXPECT_EQ(tail.state.steps, straight.state.steps);
}

TEST_F(HarnessTest, ResumeRejectsOtherCorpus) {
  TrainOptions first;
  first.out_dir = dir("resume_other");
  first.stop_after = 1;
  const auto head = fasa::train(config(), *train_, *val_, first);
  TrainOptions second;
  second.resume = head.last_checkpoint;
  EXPECT_THROW(fasa::train(config(), *val_, *val_, second), fasa::ValidationError);
}

TEST_F(HarnessTest, TrainingLossFallsOnToyCorpus) {
  RunConfig c = config();
  c.train.epochs = 5;
  c.train.augment.enabled = false;
  const auto r = fasa::train(c, *train_, *val_, TrainOptions{});
  ASSERT_EQ(r.epochs.size(), 5u);
  int rises = 0;
  for (std::size_t i = 1; i < r.epochs.size(); ++i)
    if (r.epochs[i].total > r.epochs[i - 1].total) ++rises;
  EXPECT_LE(rises, 1);
  EXPECT_LT(r.epochs.back().total, r.epochs.front().total);
}

TEST_F(HarnessTest, MissingCorpusIsValidationError) {
  RunConfig c = config();
  c.train_dir = (*root_ / "does_not_exist").string();
  EXPECT_THROW(fasa::train(c, TrainOptions{}), fasa::ValidationError);
}

TEST_F(HarnessTest, EvaluationIsReproducible) {
  TrainOptions o;
  o.out_dir = dir("eval");
  o.stop_after = 1;
  const auto r = fasa::train(config(), *train_, *val_, o);
  const auto loaded = fasa::load_checkpoint(r.last_checkpoint);
  const RunConfig& c = loaded.config;
  const std::string a = fasa::format_report(fasa::evaluate_model(*loaded.model, *val_, {}, c));
  const std::string b = fasa::format_report(fasa::evaluate_model(*loaded.model, *val_, {}, c));
  EXPECT_EQ(a, b);
  const auto report = fasa::evaluate_model(*loaded.model, *val_, {}, c);
  EXPECT_EQ(report.manifest_hash, val_->manifest_hash);
  EXPECT_EQ(report.weights_hash, loaded.model->parameters().hash());
  EXPECT_EQ(report.encoder_hash, loaded.model->encoder_hash());
  EXPECT_EQ(report.images, static_cast<std::int64_t>(val_->records.size()));
  EXPECT_EQ(loaded.model->parameters().hash(), r.model->parameters().hash());
}

TEST_F(HarnessTest, AuthenticOnlyCorpusHasUndefinedImageF1) {
  const auto r = fasa::train(config(), *train_, *val_, one_epoch());
  const Corpus authentic = fasa::load_corpus((*root_ / "authentic").string());
  const auto report = fasa::evaluate_model(*r.model, authentic, {}, config());
  EXPECT_EQ(report.positives, 0);
  EXPECT_FALSE(report.image.f1.has_value());
  EXPECT_NE(fasa::format_report(report).find("image_f1\tn/a\n"), std::string::npos);
}

TEST_F(HarnessTest, EncoderMismatchIsConfigError) {
  TrainOptions o;
  o.out_dir = dir("mismatch");
  o.stop_after = 1;
  const auto r = fasa::train(config(), *train_, *val_, o);
  EXPECT_THROW(fasa::load_checkpoint(r.last_checkpoint, {"encoder.seed=12345"}), fasa::ConfigError);
  EXPECT_NO_THROW(fasa::load_checkpoint(r.last_checkpoint, {"eval.threshold=0.4"}));
}

TEST_F(HarnessTest, LadderVariantsNestTheirParameters) {
  const RunConfig base = config();
  std::set<std::string> previous;
  for (const auto& v : fasa::ablation_ladder()) {
    RunConfig c = base;
    c.model.flags = v.flags;
    const auto encoder = fasa::make_encoder(c);
    const fasa::Model model(c.model, encoder);
    std::set<std::string> names;
    for (const auto& [name, var] : model.parameters().entries()) names.insert(name);
    // The last rung replaces the simple decoder heads with the prototype-guided decoder.
    for (const auto& n : previous) {
      if (v.flags.simple_decoder || n.rfind("decoder.simple.", 0) != 0) {
        EXPECT_TRUE(names.count(n)) << v.name << " lost " << n;
      }
    }
    EXPECT_GT(names.size(), previous.size()) << v.name;
    previous = names;
  }
}

TEST_F(HarnessTest, AblateReportsEveryRungInOrder) {
  std::ostringstream progress;
  TrainOptions o;
  o.progress = &progress;
  const auto rows = fasa::ablate(config(), *train_, *val_, o);
  const auto ladder = fasa::ablation_ladder();
  ASSERT_EQ(rows.size(), ladder.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].variant, ladder[i].name);
    EXPECT_EQ(rows[i].flags, ladder[i].flags);
    EXPECT_TRUE(rows[i].error.empty()) << rows[i].error;
    ASSERT_EQ(rows[i].pixel_f1.size(), 1u);
    EXPECT_DOUBLE_EQ(rows[i].mean_f1, rows[i].pixel_f1[0]);
  }
  const std::string tsv = fasa::format_ablation_tsv(rows);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 6);
}

TEST_F(HarnessTest, SweepWritesTablesAndPlots) {
  const auto r = fasa::train(config(), *train_, *val_, one_epoch());
  RunConfig c = config();
  c.sweep_jpeg = {100, 60};
  c.sweep_blur = {0, 1};
  const std::string out = dir("sweep");
  std::ostringstream warnings;
  const auto s = fasa::sweep(*r.model, c, *val_, out, &warnings);
  for (const char* f : {"clean_report.txt", "jpeg.tsv", "blur.tsv", "jpeg_psnr.tsv", "jpeg.svg", "blur.svg"}) {
    ASSERT_TRUE(fs::exists(out + "/" + f)) << f;
    EXPECT_GT(fs::file_size(out + "/" + f), 0u) << f;
  }
  EXPECT_EQ(warnings.str(), "");
  ASSERT_EQ(s.blur.size(), 2u);
  ASSERT_EQ(s.jpeg.size(), 2u);
  // blur sigma 0 is the identity degradation.
  EXPECT_EQ(s.blur[0].report.pixel.f1, s.clean.pixel.f1);
  EXPECT_EQ(s.blur[0].report.pixel.counts.tp, s.clean.pixel.counts.tp);
  EXPECT_EQ(read_file(out + "/blur.tsv"), fasa::format_robustness_tsv(s.blur));
  EXPECT_EQ(read_file(out + "/clean_report.txt"), fasa::format_report(s.clean));
}

TEST_F(HarnessTest, JpegPsnrFallsWithQuality) {
  const auto table = fasa::jpeg_psnr_table(*val_, {100, 60, 20});
  ASSERT_EQ(table.size(), val_->records.size());
  for (const auto& row : table) {
    ASSERT_EQ(row.size(), 3u);
    EXPECT_GE(row[0], 40.0);
    EXPECT_GT(row[1], row[2]);
  }
}

TEST(PlotTest, SvgContainsSeriesAndLabels) {
  const std::string svg = fasa::line_plot_svg("F1 vs JPEG", "quality", {"100", "80"}, "F1",
                                              {{"pixel_f1", {0.5, 0.25}}, {"image_f1", {0.7, 0.6}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  for (const char* s : {"F1 vs JPEG", "quality", "pixel_f1", "image_f1", "100", "80", "<polyline"})
    EXPECT_NE(svg.find(s), std::string::npos) << s;
}

}  // namespace
