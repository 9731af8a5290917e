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

// Command-line front end. Exit status: 0 success, 2 invalid input or
// configuration, 1 runtime failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fasa/config.hpp"
#include "fasa/error.hpp"
#include "fasa/gradcheck.hpp"
#include "fasa/harness.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", path, "Config file (key = value lines)");
    app->add_option("-s,--set", overrides, "Override one key, e.g. --set train.epochs=5")->take_all();
  }

  fasa::RunConfig load() const {
    fasa::RunConfig c = path.empty() ? fasa::RunConfig() : fasa::load_config(path);
    for (const auto& o : overrides) fasa::set_config_value(c, o);
    c.validate();
    return c;
  }
};

fasa::Corpus load_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw fasa::ValidationError("corpus directory '" + dir + "' does not exist");
  return fasa::load_corpus(dir);
}

int run_gradcheck() {
  bool ok = true;
  for (const auto& group : fasa::run_gradient_suite()) {
    std::cout << (group.passed() ? "PASS" : "FAIL") << '\t' << group.name << "\tmax_rel_error="
              << group.max_rel_error() << "\n";
    for (const auto& r : group.results)
      if (!r.passed) std::cout << "  " << r.name << " rel=" << r.max_rel_error << "\n";
    ok = ok && group.passed();
  }
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-aware semantic alignment for image manipulation localization"};
  app.require_subcommand(1);

  ConfigArgs config_args;
  auto* config_cmd = app.add_subcommand("config", "Print the documented configuration listing");
  config_args.add_to(config_cmd);

  ConfigArgs datagen_args;
  std::string datagen_out;
  auto* datagen_cmd = app.add_subcommand("datagen", "Write a synthetic manipulation corpus");
  datagen_args.add_to(datagen_cmd);
  datagen_cmd->add_option("-o,--out", datagen_out, "Output corpus directory")->required();

  ConfigArgs train_args;
  std::string train_out, resume;
  int stop_after = 0;
  auto* train_cmd = app.add_subcommand("train", "Train on data.train, validating on data.val");
  train_args.add_to(train_cmd);
  train_cmd->add_option("-o,--out", train_out, "Run directory for checkpoints and train_log.tsv")->required();
  train_cmd->add_option("--resume", resume, "Checkpoint to continue from");
  train_cmd->add_option("--stop-after", stop_after, "Stop after this many epochs in this invocation")
      ->check(CLI::PositiveNumber);

  std::string eval_ckpt, eval_data, eval_degradation = "none", eval_out;
  std::vector<std::string> eval_overrides;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and print an EvalReport");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "Corpus directory")->required();
  eval_cmd->add_option("--degradation", eval_degradation, "none, blur=S, jpeg=Q or blur=S;jpeg=Q");
  eval_cmd->add_option("-o,--out", eval_out, "Also write the report to this file");
  eval_cmd->add_option("-s,--set", eval_overrides, "Override a key of the stored config")->take_all();

  ConfigArgs ablate_args;
  std::string ablate_out;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and score every ablation ladder variant");
  ablate_args.add_to(ablate_cmd);
  ablate_cmd->add_option("-o,--out", ablate_out, "Output directory (ablation.tsv and per-run directories)")
      ->required();

  std::string sweep_ckpt, sweep_data, sweep_out;
  std::vector<std::string> sweep_overrides;
  auto* sweep_cmd = app.add_subcommand("sweep", "JPEG and blur robustness tables and plots");
  sweep_cmd->add_option("--checkpoint", sweep_ckpt, "Checkpoint file")->required();
  sweep_cmd->add_option("--data", sweep_data, "Corpus directory")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "Output directory")->required();
  sweep_cmd->add_option("-s,--set", sweep_overrides, "Override a key of the stored config")->take_all();

  app.add_subcommand("gradcheck", "Finite-difference gradient suite on a tiny model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const bool deterministic = fasa::deterministic_mode();
  try {
    if (config_cmd->parsed()) {
      std::cout << fasa::documented_config(config_args.load());
    } else if (datagen_cmd->parsed()) {
      const fasa::RunConfig c = datagen_args.load();
      fasa::make_dataset(c.datagen, datagen_out);
      std::cout << "wrote " << c.datagen.count << " samples to " << datagen_out << "\n";
    } else if (train_cmd->parsed()) {
      const fasa::RunConfig c = train_args.load();
      fasa::TrainOptions o;
      o.out_dir = train_out;
      o.resume = resume;
      if (stop_after > 0) o.stop_after = stop_after;
      o.deterministic = deterministic;
      o.progress = &std::cerr;
      const fasa::TrainResult r = fasa::train(c, o);
      std::cout << "completed epoch " << r.state.epoch << "/" << c.train.epochs << ", best val pixel F1 "
                << r.state.best_f1 << " at epoch " << r.state.best_epoch << "\n";
    } else if (eval_cmd->parsed()) {
      const fasa::DegradationSpec d = fasa::DegradationSpec::parse(eval_degradation);
      const fasa::LoadedModel m = fasa::load_checkpoint(eval_ckpt, eval_overrides);
      const fasa::Corpus corpus = load_dir(eval_data);
      const std::string report = fasa::format_report(fasa::evaluate_model(*m.model, corpus, d, m.config));
      std::cout << report;
      if (!eval_out.empty()) fasa::write_text_file(eval_out, report);
    } else if (ablate_cmd->parsed()) {
      const fasa::RunConfig c = ablate_args.load();
      const fasa::Corpus train_set = load_dir(c.train_dir);
      const fasa::Corpus val_set = load_dir(c.val_dir);
      fasa::TrainOptions o;
      o.out_dir = ablate_out;
      o.deterministic = deterministic;
      o.progress = &std::cerr;
      const std::string table = fasa::format_ablation_tsv(fasa::ablate(c, train_set, val_set, o));
      fasa::write_text_file((fs::path(ablate_out) / "ablation.tsv").string(), table);
      std::cout << table;
    } else if (sweep_cmd->parsed()) {
      const fasa::LoadedModel m = fasa::load_checkpoint(sweep_ckpt, sweep_overrides);
      const fasa::Corpus corpus = load_dir(sweep_data);
      const fasa::SweepResult r = fasa::sweep(*m.model, m.config, corpus, sweep_out, &std::cerr);
      std::cout << fasa::format_robustness_tsv(r.jpeg) << fasa::format_robustness_tsv(r.blur) << r.psnr_tsv;
    } else {
      return run_gradcheck();
    }
  } catch (const fasa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
