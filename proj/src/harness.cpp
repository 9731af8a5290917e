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
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fasa/archive.hpp"
#include "fasa/hash.hpp"
#include "fasa/optim.hpp"
#include "fasa/rng.hpp"

namespace fasa {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCheckpointFormat = "fasa-checkpoint 1";

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw ValidationError("bad number '" + s + "' in checkpoint");
  return v;
}

std::uint64_t parse_hex(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc()) throw ValidationError("bad hash '" + s + "' in checkpoint");
  return v;
}

std::string corpus_name(const Corpus& corpus) {
  const fs::path p(corpus.dir);
  const std::string name = p.filename().string();
  return name.empty() ? p.parent_path().filename().string() : name;
}

void require_corpus(const Corpus& corpus, const RunConfig& config, const char* role) {
  if (corpus.records.empty()) throw ValidationError(std::string(role) + " corpus is empty");
  if (corpus.size != config.model.image_size)
    throw ValidationError(std::string(role) + " corpus " + corpus.dir + " has " + std::to_string(corpus.size) +
                          "px images but model.image_size is " + std::to_string(config.model.image_size));
}

/// Stacks [C, S, S] images into [N, C, S, S].
Tensor<float> stack(const std::vector<const Image*>& images) {
  const Image& first = *images.front();
  const Index per = first.size();
  Tensor<float> out(Shape{static_cast<Index>(images.size()), first.dim(0), first.dim(1), first.dim(2)});
  for (std::size_t i = 0; i < images.size(); ++i)
    std::copy(images[i]->data(), images[i]->data() + per, out.data() + static_cast<Index>(i) * per);
  return out;
}

void save_checkpoint(const std::string& path, const Model& model, const AdamW<float>& optimizer,
                     const TrainState& state, const RunConfig& config, const Corpus& train, const Corpus& val,
                     const std::string& log) {
  TensorArchive a;
  for (const auto& [name, v] : model.parameters().entries()) a.put("param/" + name, v.value());
  optimizer.save(a);
  a.set_meta("format", kCheckpointFormat);
  a.set_meta("epoch", std::to_string(state.epoch));
  a.set_meta("steps", std::to_string(state.steps));
  a.set_meta("best_f1", exact(state.best_f1));
  a.set_meta("best_epoch", std::to_string(state.best_epoch));
  a.set_meta("config", serialize_config(config));
  a.set_meta("config_hash", hex64(config_hash(config)));
  a.set_meta("encoder_manifest", model.encoder()->manifest());
  a.set_meta("encoder_hash", hex64(model.encoder_hash()));
  a.set_meta("weights_hash", hex64(model.parameters().hash()));
  a.set_meta("train_manifest_hash", hex64(train.manifest_hash));
  a.set_meta("val_manifest_hash", hex64(val.manifest_hash));
  a.set_meta("rng", "derived from train.seed=" + std::to_string(config.train.seed) +
                        " and epoch=" + std::to_string(state.epoch));
  a.set_meta("log", log);
  a.save(path);
}

CheckpointInfo info_from_archive(const TensorArchive& a, const std::string& path) {
  if (!a.has_meta("format") || a.meta("format") != kCheckpointFormat)
    throw ValidationError(path + ": not a fasa checkpoint");
  CheckpointInfo info;
  info.state.epoch = std::stoi(a.meta("epoch"));
  info.state.steps = std::stoll(a.meta("steps"));
  info.state.best_f1 = parse_double(a.meta("best_f1"));
  info.state.best_epoch = std::stoi(a.meta("best_epoch"));
  info.config_text = a.meta("config");
  info.config_hash = parse_hex(a.meta("config_hash"));
  info.encoder_manifest = a.meta("encoder_manifest");
  info.encoder_hash = parse_hex(a.meta("encoder_hash"));
  info.weights_hash = parse_hex(a.meta("weights_hash"));
  info.train_manifest_hash = parse_hex(a.meta("train_manifest_hash"));
  info.val_manifest_hash = parse_hex(a.meta("val_manifest_hash"));
  return info;
}

void load_parameters(const TensorArchive& a, ParameterStore<float>& store, const std::string& path) {
  for (auto& [name, v] : store.entries()) {
    const std::string key = "param/" + name;
    if (!a.contains(key)) throw ValidationError(path + ": checkpoint lacks parameter " + name);
    Tensor<float> t = a.get<float>(key);
    if (t.shape() != v.shape())
      throw ValidationError(path + ": parameter " + name + " has shape " + t.shape().str() + ", model expects " +
                            v.shape().str());
    Var<float> handle = v;
    handle.mutable_value() = std::move(t);
  }
}

void check_encoder(const EncoderAdapter<float>& encoder, const CheckpointInfo& info, const std::string& path) {
  if (encoder.manifest() != info.encoder_manifest)
    throw ConfigError(path + ": checkpoint was trained against encoder '" + info.encoder_manifest +
                      "' but the config provides '" + encoder.manifest() + "'");
  if (encoder.parameter_hash() != info.encoder_hash)
    throw ConfigError(path + ": encoder weights hash " + hex64(encoder.parameter_hash()) +
                      " differs from the checkpoint's " + hex64(info.encoder_hash));
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') {
      out += "&amp;";
    } else if (c == '<') {
      out += "&lt;";
    } else if (c == '>') {
      out += "&gt;";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<EncoderAdapter<float>> make_encoder(const RunConfig& config) {
  if (config.encoder == "standin") {
    auto enc = make_standin_encoder<float>(config.encoder_spec);
    enc->enable_hashed_text(config.encoder_text);
    return enc;
  }
  return load_encoder<float>(config.encoder, config.encoder_spec);
}

Predictions predict(const Model& model, const std::vector<Image>& images, Index batch) {
  Predictions p;
  for (std::size_t begin = 0; begin < images.size(); begin += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(images.size(), begin + static_cast<std::size_t>(batch));
    std::vector<const Image*> chunk;
    for (std::size_t i = begin; i < end; ++i) chunk.push_back(&images[i]);
    const ModelOutput<float> out = model.forward(stack(chunk));
    const Tensor<float>& prob = out.mask.prob.value();
    const Index h = prob.dim(2), w = prob.dim(3);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      Image m(Shape{1, h, w});
      std::copy(prob.data() + static_cast<Index>(i) * h * w, prob.data() + static_cast<Index>(i + 1) * h * w,
                m.data());
      p.probs.push_back(std::move(m));
      p.scores.push_back(out.mask.score[i]);
    }
  }
  return p;
}

EvalReport evaluate_model(const Model& model, const Corpus& corpus, const DegradationSpec& degradation,
                          const RunConfig& config) {
  require_corpus(corpus, config, "evaluation");
  std::vector<Image> images;
  images.reserve(corpus.images.size());
  for (const auto& im : corpus.images) images.push_back(degradation.identity() ? im : degrade(im, degradation));
  const Predictions p = predict(model, images, config.eval.batch);
  EvalReport r = make_report(corpus_name(corpus), p.probs, corpus.masks, p.scores, config.eval.threshold,
                             config.eval.averaging);
  r.degradation = degradation;
  r.manifest_hash = corpus.manifest_hash;
  r.config_hash = config_hash(config);
  r.weights_hash = model.parameters().hash();
  r.encoder_hash = model.encoder_hash();
  return r;
}

CheckpointInfo read_checkpoint_info(const std::string& path) {
  return info_from_archive(TensorArchive::load(path), path);
}

LoadedModel load_checkpoint(const std::string& path, const std::vector<std::string>& overrides) {
  const TensorArchive a = TensorArchive::load(path);
  LoadedModel lm;
  lm.info = info_from_archive(a, path);
  lm.config = parse_config(lm.info.config_text);
  for (const auto& o : overrides) set_config_value(lm.config, o);
  lm.config.validate();
  lm.encoder = make_encoder(lm.config);
  check_encoder(*lm.encoder, lm.info, path);
  lm.model = std::make_unique<Model>(lm.config.model, lm.encoder);
  load_parameters(a, lm.model->parameters(), path);
  if (lm.model->parameters().hash() != lm.info.weights_hash)
    throw ValidationError(path + ": weights hash does not match the stored parameters");
  return lm;
}

std::string train_log_header(bool deterministic) {
  std::string h =
      "epoch\tsteps\tlr\tl_mask\tl_edge\tl_pc\ttotal\tval_pixel_f1\tval_pixel_iou\tval_pixel_auc\tval_image_f1\t"
      "val_image_acc\tencoder_hash";
  if (!deterministic) h += "\tseconds";
  return h + "\n";
}

std::string format_epoch(const EpochRecord& r, bool deterministic) {
  std::ostringstream os;
  char lr[32];
  std::snprintf(lr, sizeof(lr), "%.6e", r.lr);
  auto opt = [](const std::optional<double>& v) { return v ? fixed6(*v) : std::string("n/a"); };
  os << r.epoch << '\t' << r.steps << '\t' << lr << '\t' << fixed6(r.l_mask) << '\t' << fixed6(r.l_edge) << '\t'
     << fixed6(r.l_pc) << '\t' << fixed6(r.total) << '\t' << fixed6(r.val.pixel.f1) << '\t'
     << fixed6(r.val.pixel.iou) << '\t' << opt(r.val.pixel.auc) << '\t' << opt(r.val.image.f1) << '\t'
     << fixed6(r.val.image.accuracy) << '\t' << hex64(r.encoder_hash);
  if (!deterministic) {
    char s[32];
    std::snprintf(s, sizeof(s), "%.2f", r.seconds);
    os << '\t' << s;
  }
  os << "\n";
  return os.str();
}

TrainResult train(const RunConfig& config, const Corpus& train_set, const Corpus& val_set,
                  const TrainOptions& options) {
  config.validate();
  require_corpus(train_set, config, "training");
  require_corpus(val_set, config, "validation");
  auto encoder = make_encoder(config);
  auto model = std::make_unique<Model>(config.model, encoder);
  AdamW<float> optimizer(model->parameters(), config.optim);

  TrainResult result;
  TrainState state;
  std::string log = train_log_header(options.deterministic);
  if (!options.resume.empty()) {
    const TensorArchive a = TensorArchive::load(options.resume);
    const CheckpointInfo info = info_from_archive(a, options.resume);
    if (info.config_hash != config_hash(config))
      throw ValidationError(options.resume + ": checkpoint config differs from the run config");
    if (info.train_manifest_hash != train_set.manifest_hash || info.val_manifest_hash != val_set.manifest_hash)
      throw ValidationError(options.resume + ": checkpoint was trained on different corpora");
    check_encoder(*encoder, info, options.resume);
    load_parameters(a, model->parameters(), options.resume);
    optimizer.load(a);
    state = info.state;
    log = a.meta("log");
  }
  if (!options.out_dir.empty()) {
    try {
      fs::create_directories(options.out_dir);
    } catch (const fs::filesystem_error& e) {
      throw IoError(options.out_dir + ": cannot create output directory (" + e.what() + ")");
    }
    result.best_checkpoint = (fs::path(options.out_dir) / "best.ckpt").string();
    result.last_checkpoint = (fs::path(options.out_dir) / "last.ckpt").string();
  }

  result.initial_encoder_hash = encoder->parameter_hash();
  const Index n = static_cast<Index>(train_set.records.size());
  const Index batch = std::min(config.train.batch, n);
  const Index batches = (n + batch - 1) / batch;
  const std::int64_t total_steps = static_cast<std::int64_t>(config.train.epochs) * batches;
  const Index side = config.model.image_size;
  int ran = 0;

  for (int epoch = state.epoch + 1; epoch <= config.train.epochs; ++epoch) {
    if (options.stop_after && ran >= *options.stop_after) break;
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t epoch_seed = mix_seed(config.train.seed, static_cast<std::uint64_t>(epoch));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(epoch_seed);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = config.train.schedule == Schedule::kCosine ? cosine_lr(config.optim.lr, state.steps, total_steps)
                                                        : config.optim.lr;
    for (Index b = 0; b < batches; ++b) {
      const Index begin = b * batch, end = std::min(n, begin + batch);
      const Index count = end - begin;
      Tensor<float> x(Shape{count, 3, side, side}), y(Shape{count, 1, side, side});
      for (Index i = 0; i < count; ++i) {
        const Index idx = order[static_cast<std::size_t>(begin + i)];
        SamplePair s{train_set.images[static_cast<std::size_t>(idx)], train_set.masks[static_cast<std::size_t>(idx)],
                     train_set.records[static_cast<std::size_t>(idx)].manipulated, std::nullopt};
        if (config.train.augment.enabled) s = augment(s, mix_seed(epoch_seed, static_cast<std::uint64_t>(idx)), config.train.augment);
        std::copy(s.image.data(), s.image.data() + s.image.size(), x.data() + i * 3 * side * side);
        std::copy(s.mask.data(), s.mask.data() + s.mask.size(), y.data() + i * side * side);
      }
      const ModelOutput<float> out = model->forward(x);
      const LossBreakdown<float> loss = model->loss(out, y, config.loss);
      if (!std::isfinite(loss.total))
        throw RuntimeFailure("non-finite loss at epoch " + std::to_string(epoch) + " batch " + std::to_string(b) +
                             " (first sample " + train_set.records[static_cast<std::size_t>(order[begin])].id + ")");
      backward(loss.objective);
      const double lr = config.train.schedule == Schedule::kCosine
                            ? cosine_lr(config.optim.lr, state.steps, total_steps)
                            : config.optim.lr;
      optimizer.step(lr);
      model->parameters().zero_grad();
      ++state.steps;
      const double wgt = static_cast<double>(count) / static_cast<double>(n);
      rec.l_mask += wgt * loss.l_mask;
      rec.l_edge += wgt * loss.l_edge;
      rec.l_pc += wgt * loss.l_pc;
      rec.total += wgt * loss.total;
    }
    rec.steps = state.steps;
    rec.val = evaluate_model(*model, val_set, DegradationSpec(), config);
    rec.encoder_hash = encoder->parameter_hash();
    if (rec.encoder_hash != result.initial_encoder_hash)
      throw RuntimeFailure("frozen encoder parameters changed during epoch " + std::to_string(epoch));
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    state.epoch = epoch;
    const bool improved = rec.val.pixel.f1 > state.best_f1;
    if (improved) {
      state.best_f1 = rec.val.pixel.f1;
      state.best_epoch = epoch;
    }
    log += format_epoch(rec, options.deterministic);
    if (!options.out_dir.empty()) {
      if (improved) save_checkpoint(result.best_checkpoint, *model, optimizer, state, config, train_set, val_set, log);
      save_checkpoint(result.last_checkpoint, *model, optimizer, state, config, train_set, val_set, log);
      write_text_file((fs::path(options.out_dir) / "train_log.tsv").string(), log);
    }
    if (options.progress) {
      *options.progress << "epoch " << epoch << "/" << config.train.epochs << " loss " << fixed6(rec.total)
                        << " val_pixel_f1 " << fixed6(rec.val.pixel.f1) << " val_image_acc "
                        << fixed6(rec.val.image.accuracy) << std::endl;
    }
    result.epochs.push_back(std::move(rec));
    ++ran;
  }
  result.log = log;
  result.state = state;
  result.model = std::move(model);
  return result;
}

TrainResult train(const RunConfig& config, const TrainOptions& options) {
  config.validate();
  for (const auto* dir : {&config.train_dir, &config.val_dir})
    if (!fs::is_directory(*dir)) throw ValidationError("corpus directory '" + *dir + "' does not exist");
  const Corpus train_set = load_corpus(config.train_dir);
  const Corpus val_set = load_corpus(config.val_dir);
  return train(config, train_set, val_set, options);
}

std::vector<AblationRow> ablate(const RunConfig& config, const Corpus& train_set, const Corpus& val_set,
                                const TrainOptions& options) {
  std::vector<AblationRow> rows;
  for (const auto& variant : ablation_ladder()) {
    AblationRow row;
    row.variant = variant.name;
    row.flags = variant.flags;
    try {
      for (std::uint64_t seed : config.ablate_seeds) {
        RunConfig c = config;
        c.model.flags = variant.flags;
        c.model.seed = seed;
        c.train.seed = seed;
        TrainOptions o = options;
        o.resume.clear();
        if (!options.out_dir.empty()) {
          std::string slug = variant.name;
          std::replace(slug.begin(), slug.end(), '+', 'p');
          o.out_dir = (fs::path(options.out_dir) / slug / ("seed" + std::to_string(seed))).string();
        }
        if (options.progress) *options.progress << "ablate " << variant.name << " seed " << seed << std::endl;
        const TrainResult r = train(c, train_set, val_set, o);
        const EvalReport rep = evaluate_model(*r.model, val_set, DegradationSpec(), c);
        row.seeds.push_back(seed);
        row.pixel_f1.push_back(rep.pixel.f1);
        row.pixel_iou.push_back(rep.pixel.iou);
      }
      const double k = static_cast<double>(row.seeds.size());
      row.mean_f1 = std::accumulate(row.pixel_f1.begin(), row.pixel_f1.end(), 0.0) / k;
      row.mean_iou = std::accumulate(row.pixel_iou.begin(), row.pixel_iou.end(), 0.0) / k;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (options.progress) *options.progress << "ablate " << variant.name << " failed: " << e.what() << std::endl;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_tsv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "variant\tflags\tseeds\tpixel_f1\tpixel_iou\tper_seed_f1\tstatus\n";
  for (const auto& r : rows) {
    std::string seeds, per_seed;
    for (std::size_t i = 0; i < r.seeds.size(); ++i) {
      seeds += (i ? "," : "") + std::to_string(r.seeds[i]);
      per_seed += (i ? "," : "") + fixed6(r.pixel_f1[i]);
    }
    const bool ok = r.error.empty();
    os << r.variant << '\t' << r.flags.str() << '\t' << (seeds.empty() ? "-" : seeds) << '\t'
       << (ok ? fixed6(r.mean_f1) : "n/a") << '\t' << (ok ? fixed6(r.mean_iou) : "n/a") << '\t'
       << (per_seed.empty() ? "-" : per_seed) << '\t' << (ok ? "ok" : "failed: " + r.error) << "\n";
  }
  return os.str();
}

std::vector<std::vector<double>> jpeg_psnr_table(const Corpus& corpus, const std::vector<int>& qualities) {
  std::vector<std::vector<double>> table;
  for (const auto& im : corpus.images) {
    std::vector<double> row;
    for (int q : qualities) row.push_back(psnr(im, jpeg_roundtrip(im, q)));
    table.push_back(std::move(row));
  }
  return table;
}

SweepResult sweep(const Model& model, const RunConfig& config, const Corpus& corpus, const std::string& out_dir,
                  std::ostream* warnings) {
  config.validate();
  SweepResult result;
  result.clean = evaluate_model(model, corpus, DegradationSpec(), config);
  std::vector<DegradationSpec> jpeg_grid, blur_grid;
  for (int q : config.sweep_jpeg) jpeg_grid.push_back(DegradationSpec{0.0, q});
  for (double s : config.sweep_blur) blur_grid.push_back(DegradationSpec{s, std::nullopt});
  auto eval = [&](const DegradationSpec& d) { return evaluate_model(model, corpus, d, config); };
  result.jpeg = robustness_curve(eval, jpeg_grid);
  result.blur = robustness_curve(eval, blur_grid);

  const auto psnr_rows = jpeg_psnr_table(corpus, config.sweep_jpeg);
  std::ostringstream ps;
  ps << "jpeg_quality\tmean_psnr_db\tmin_psnr_db\tnon_increasing_images\n";
  for (std::size_t j = 0; j < config.sweep_jpeg.size(); ++j) {
    double sum = 0, lo = INFINITY;
    std::size_t mono = 0;
    for (const auto& row : psnr_rows) {
      sum += row[j];
      lo = std::min(lo, row[j]);
      if (j == 0 || row[j] <= row[j - 1]) ++mono;
    }
    ps << config.sweep_jpeg[j] << '\t' << fixed6(sum / static_cast<double>(psnr_rows.size())) << '\t' << fixed6(lo)
       << '\t' << mono << "/" << psnr_rows.size() << "\n";
  }
  result.psnr_tsv = ps.str();

  if (out_dir.empty()) return result;
  try {
    fs::create_directories(out_dir);
  } catch (const fs::filesystem_error& e) {
    throw IoError(out_dir + ": cannot create output directory (" + e.what() + ")");
  }
  const fs::path dir(out_dir);
  write_text_file((dir / "clean_report.txt").string(), format_report(result.clean));
  write_text_file((dir / "jpeg.tsv").string(), format_robustness_tsv(result.jpeg));
  write_text_file((dir / "blur.tsv").string(), format_robustness_tsv(result.blur));
  write_text_file((dir / "jpeg_psnr.tsv").string(), result.psnr_tsv);

  auto plot = [&](const std::string& file, const std::string& title, const std::string& x_label,
                  const std::vector<RobustnessRow>& rows, auto label) {
    std::vector<std::string> xs;
    PlotSeries f1{"pixel F1", {}}, iou{"pixel IoU", {}};
    for (const auto& r : rows) {
      xs.push_back(label(r.degradation));
      f1.y.push_back(r.report.pixel.f1);
      iou.y.push_back(r.report.pixel.iou);
    }
    const std::string path = (dir / file).string();
    try {
      write_text_file(path, line_plot_svg(title, x_label, xs, "score", {f1, iou}));
      result.plots.push_back(path);
    } catch (const std::exception& e) {
      if (warnings) *warnings << "warning: plot " << path << " not written: " << e.what() << std::endl;
    }
  };
  plot("jpeg.svg", "Localization under JPEG compression", "JPEG quality", result.jpeg,
       [](const DegradationSpec& d) { return std::to_string(*d.jpeg_quality); });
  plot("blur.svg", "Localization under Gaussian blur", "blur sigma (px)", result.blur, [](const DegradationSpec& d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", d.blur_sigma);
    return std::string(buf);
  });
  return result;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::vector<std::string>& x,
                          const std::string& y_label, const std::vector<PlotSeries>& series) {
  if (x.empty()) throw ValidationError("line_plot_svg: no x positions");
  const double width = 520, height = 340, left = 60, right = 130, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double lo = 0.0, hi = 1.0;
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  auto px = [&](std::size_t i) {
    return x.size() == 1 ? left + pw / 2 : left + pw * static_cast<double>(i) / static_cast<double>(x.size() - 1);
  };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
     << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    os << "<line x1=\"" << left - 4 << "\" y1=\"" << py(v) << "\" x2=\"" << left + pw << "\" y2=\"" << py(v)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    os << "<text x=\"" << px(i) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << escape_xml(x[i])
       << "</text>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
     << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].y.size() && i < x.size(); ++i)
      os << (i ? " " : "") << px(i) << "," << py(series[s].y[i]);
    os << "\"/>\n";
    for (std::size_t i = 0; i < series[s].y.size() && i < x.size(); ++i)
      os << "<circle cx=\"" << px(i) << "\" cy=\"" << py(series[s].y[i]) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[s].name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << text;
  os.flush();
  if (!os) throw IoError(path + ": write failed");
}

}  // namespace fasa
