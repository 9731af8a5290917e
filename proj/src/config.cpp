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

#include "fasa/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "fasa/hash.hpp"

namespace fasa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) throw ConfigError("'" + text + "' is not a valid number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError("'" + text + "' is not finite");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("'" + text + "' is not a boolean (true or false)");
}

std::string bstr(bool b) { return b ? "true" : "false"; }

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  if (text.empty()) return out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(item));
  return out;
}

template <typename T, std::size_t N>
std::array<T, N> parse_array(const std::string& text) {
  const auto v = parse_list<T>(text);
  if (v.size() != N) throw ConfigError("expected " + std::to_string(N) + " comma-separated values, got '" + text + "'");
  std::array<T, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

template <typename T, std::size_t N>
std::string join(const std::array<T, N>& a) {
  return join(std::vector<T>(a.begin(), a.end()));
}

std::string name(PatchLabelRule r) { return r == PatchLabelRule::kMajority ? "majority" : "any"; }
std::string name(PrototypeSource s) { return s == PrototypeSource::kTextEmbeddings ? "text" : "random"; }
std::string name(BasisMode m) { return m == BasisMode::kQueryDot ? "query_dot" : "attention_map"; }
std::string name(EdgeLossKind k) { return k == EdgeLossKind::kBandBce ? "bce" : "dice"; }
std::string name(Schedule s) { return s == Schedule::kCosine ? "cosine" : "constant"; }

Schedule parse_schedule(const std::string& s) {
  if (s == "cosine") return Schedule::kCosine;
  if (s == "constant") return Schedule::kConstant;
  throw ConfigError("unknown schedule '" + s + "' (expected cosine or constant)");
}

struct Field {
  const char* key;
  const char* doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define FASA_NUM(KEY, DOC, MEMBER, TYPE)                                        \
  Field {                                                                      \
    KEY, DOC, [](const RunConfig& c) { return num_str(c.MEMBER); },            \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<TYPE>(v); } \
  }
#define FASA_BOOL(KEY, DOC, MEMBER)                                            \
  Field {                                                                      \
    KEY, DOC, [](const RunConfig& c) { return bstr(c.MEMBER); },               \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(v); }   \
  }
#define FASA_ENUM(KEY, DOC, MEMBER, PARSE)                                     \
  Field {                                                                      \
    KEY, DOC, [](const RunConfig& c) { return name(c.MEMBER); },               \
        [](RunConfig& c, const std::string& v) { c.MEMBER = PARSE(v); }        \
  }

template <typename T>
std::string num_str(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    return fmt(v);
  } else {
    return std::to_string(v);
  }
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FASA_NUM("datagen.count", "Samples per generated corpus.", datagen.count, Index),
      FASA_NUM("datagen.size", "Square image side in pixels.", datagen.size, Index),
      FASA_NUM("datagen.seed", "Corpus seed; the corpus is a pure function of the datagen keys.", datagen.seed,
               std::uint64_t),
      FASA_NUM("datagen.authentic_fraction", "Fraction of authentic samples.", datagen.authentic_fraction, double),
      Field{"datagen.mix", "Shares of splice, copy_move, erase_fill among manipulated samples.",
            [](const RunConfig& c) { return join(c.datagen.mix); },
            [](RunConfig& c, const std::string& v) { c.datagen.mix = parse_array<double, 3>(v); }},
      Field{"datagen.degradation", "Degradation applied to every written image: none, blur=S, jpeg=Q or blur=S;jpeg=Q.",
            [](const RunConfig& c) { return c.datagen.degradation.str(); },
            [](RunConfig& c, const std::string& v) {
              try {
                c.datagen.degradation = DegradationSpec::parse(v);
              } catch (const ConfigError&) {
                throw;
              } catch (const ValidationError& e) {
                throw ConfigError(e.what());
              }
            }},
      FASA_NUM("datagen.noise_min", "Lower bound of the authentic sensor noise sigma.", datagen.generator.noise_min,
               double),
      FASA_NUM("datagen.noise_max", "Upper bound of the authentic sensor noise sigma.", datagen.generator.noise_max,
               double),
      FASA_NUM("datagen.splice_noise_max", "Upper bound of the spliced source noise sigma.",
               datagen.generator.splice_noise_max, double),
      FASA_NUM("datagen.region_min", "Smallest edited region side, as a fraction of the image side.",
               datagen.generator.region_min, double),
      FASA_NUM("datagen.region_max", "Largest edited region side, as a fraction of the image side.",
               datagen.generator.region_max, double),
      FASA_NUM("datagen.feather_prob", "Probability that a splice is feathered.", datagen.generator.feather_prob,
               double),
      FASA_NUM("datagen.feather_min", "Smallest feather sigma in pixels.", datagen.generator.feather_min, double),
      FASA_NUM("datagen.feather_max", "Largest feather sigma in pixels.", datagen.generator.feather_max, double),
      Field{"data.train", "Training corpus directory.", [](const RunConfig& c) { return c.train_dir; },
            [](RunConfig& c, const std::string& v) { c.train_dir = v; }},
      Field{"data.val", "Validation corpus directory.", [](const RunConfig& c) { return c.val_dir; },
            [](RunConfig& c, const std::string& v) { c.val_dir = v; }},
      Field{"encoder.choice", "Frozen encoder: standin, or file:<path> for converted weights.",
            [](const RunConfig& c) { return c.encoder; }, [](RunConfig& c, const std::string& v) { c.encoder = v; }},
      FASA_NUM("encoder.input_size", "Stand-in encoder input side.", encoder_spec.input_size, Index),
      FASA_NUM("encoder.patch_grid", "Stand-in encoder patches per side.", encoder_spec.patch_grid, Index),
      FASA_NUM("encoder.token_dim", "Stand-in encoder token width.", encoder_spec.token_dim, Index),
      FASA_NUM("encoder.layers", "Stand-in encoder depth.", encoder_spec.layers, int),
      FASA_NUM("encoder.heads", "Stand-in encoder attention heads.", encoder_spec.heads, Index),
      FASA_NUM("encoder.seed", "Stand-in encoder weight seed.", encoder_spec.seed, std::uint64_t),
      FASA_BOOL("encoder.text", "Stand-in exposes hashed prompt embeddings.", encoder_text),
      FASA_NUM("model.image_size", "Backbone input side; must match the corpus.", model.image_size, Index),
      FASA_NUM("model.seed", "Parameter initialization seed.", model.seed, std::uint64_t),
      FASA_NUM("model.dct_sharpness", "Slope of the soft radial band masks.", model.dct_sharpness, double),
      FASA_NUM("model.high_band_gain", "Factor on the high-band reconstruction in the 9-channel input.", model.high_band_gain, double),
      FASA_ENUM("model.patch_rule", "Patch label rule for the contrastive loss: majority or any.", model.patch_rule,
                parse_patch_label_rule),
      FASA_NUM("model.edge_radius", "Half width of the boundary band used by the edge loss.", model.edge_radius, int),
      FASA_ENUM("model.edge_loss", "Edge loss form: bce or dice.", model.edge_loss, parse_edge_loss_kind),
      FASA_NUM("semantic.embed_dim", "Aligned patch embedding width d.", model.semantic.embed_dim, Index),
      FASA_NUM("semantic.heads", "Heads of the patch refinement attention.", model.semantic.heads, Index),
      FASA_NUM("semantic.tau_init", "Initial contrastive temperature.", model.semantic.tau_init, double),
      Field{"semantic.layers", "Encoder layers to aggregate (1-based), or default.",
            [](const RunConfig& c) {
              return c.model.semantic.layers.empty() ? std::string("default") : join(c.model.semantic.layers);
            },
            [](RunConfig& c, const std::string& v) {
              c.model.semantic.layers = v == "default" ? std::vector<int>{} : parse_list<int>(v);
            }},
      FASA_ENUM("semantic.prototype_source", "Prototype initialization: text or random.",
                model.semantic.prototype_source, parse_prototype_source),
      FASA_BOOL("semantic.share_projector", "Feed refined tokens to the contrastive loss without a projector.",
                model.semantic.share_projector),
      Field{"backbone.channels", "Channels of the four backbone stages.",
            [](const RunConfig& c) { return join(c.model.backbone.channels); },
            [](RunConfig& c, const std::string& v) { c.model.backbone.channels = parse_array<Index, 4>(v); }},
      Field{"backbone.depths", "Blocks per backbone stage.",
            [](const RunConfig& c) { return join(c.model.backbone.depths); },
            [](RunConfig& c, const std::string& v) { c.model.backbone.depths = parse_array<int, 4>(v); }},
      FASA_NUM("decoder.query_dim", "Query width d_q of the mask decoder.", model.decoder.query_dim, Index),
      FASA_NUM("decoder.heads", "Heads of the prototype cross-attention.", model.decoder.heads, Index),
      FASA_NUM("decoder.gate_hidden", "Hidden channels of the gate network.", model.decoder.gate_hidden, Index),
      FASA_ENUM("decoder.basis_mode", "Basis map form: query_dot or attention_map.", model.decoder.basis_mode,
                parse_basis_mode),
      FASA_BOOL("ablation.no_adbdct", "Feed RGB only to the backbone.", model.flags.no_adbdct),
      FASA_BOOL("ablation.no_psa", "Drop semantic alignment and the contrastive loss.", model.flags.no_psa),
      FASA_BOOL("ablation.no_sfsa", "Drop the side adapters.", model.flags.no_sfsa),
      FASA_BOOL("ablation.simple_decoder", "Replace the gated decoder with per-stage heads.",
                model.flags.simple_decoder),
      FASA_NUM("loss.mask", "Weight of the mask loss.", loss.mask, double),
      FASA_NUM("loss.edge", "Weight of the edge loss.", loss.edge, double),
      FASA_NUM("loss.contrastive", "Weight of the contrastive loss.", loss.contrastive, double),
      FASA_NUM("optim.lr", "AdamW base learning rate.", optim.lr, double),
      FASA_NUM("optim.beta1", "AdamW first-moment decay.", optim.beta1, double),
      FASA_NUM("optim.beta2", "AdamW second-moment decay.", optim.beta2, double),
      FASA_NUM("optim.eps", "AdamW denominator epsilon.", optim.eps, double),
      FASA_NUM("optim.weight_decay", "AdamW decoupled weight decay.", optim.weight_decay, double),
      FASA_ENUM("optim.schedule", "Learning-rate schedule: cosine (to zero, no warmup) or constant.", train.schedule,
                parse_schedule),
      FASA_NUM("train.epochs", "Training epochs.", train.epochs, int),
      FASA_NUM("train.batch", "Training batch size.", train.batch, Index),
      FASA_NUM("train.seed", "Seed of the data order and augmentation draws.", train.seed, std::uint64_t),
      FASA_BOOL("augment.enabled", "Apply training augmentation.", train.augment.enabled),
      FASA_NUM("augment.flip_prob", "Horizontal flip probability.", train.augment.flip_prob, double),
      FASA_NUM("augment.scale_prob", "Random scaling probability.", train.augment.scale_prob, double),
      FASA_NUM("augment.scale_min", "Smallest scale factor.", train.augment.scale_min, double),
      FASA_NUM("augment.scale_max", "Largest scale factor.", train.augment.scale_max, double),
      FASA_NUM("augment.crop_prob", "Random crop probability.", train.augment.crop_prob, double),
      FASA_NUM("augment.crop_min", "Smallest crop side as a fraction of the image side.", train.augment.crop_min,
               double),
      FASA_NUM("augment.blur_prob", "Gaussian blur probability.", train.augment.blur_prob, double),
      FASA_NUM("augment.blur_max", "Largest blur sigma in pixels.", train.augment.blur_max, double),
      FASA_NUM("augment.jpeg_prob", "JPEG compression probability.", train.augment.jpeg_prob, double),
      FASA_NUM("augment.jpeg_min", "Lowest JPEG quality.", train.augment.jpeg_min, int),
      FASA_NUM("augment.jpeg_max", "Highest JPEG quality.", train.augment.jpeg_max, int),
      FASA_NUM("eval.threshold", "Pixel and image decision threshold (strict >).", eval.threshold, double),
      Field{"eval.averaging", "Pixel F1 / IoU averaging: macro (per image) or micro (pooled).",
            [](const RunConfig& c) { return to_string(c.eval.averaging); },
            [](RunConfig& c, const std::string& v) {
              try {
                c.eval.averaging = parse_averaging(v);
              } catch (const ValidationError& e) {
                throw ConfigError(e.what());
              }
            }},
      FASA_NUM("eval.batch", "Evaluation batch size.", eval.batch, Index),
      Field{"ablate.seeds", "Seeds trained per ablation variant.", [](const RunConfig& c) { return join(c.ablate_seeds); },
            [](RunConfig& c, const std::string& v) { c.ablate_seeds = parse_list<std::uint64_t>(v); }},
      Field{"sweep.jpeg", "JPEG qualities of the robustness sweep.", [](const RunConfig& c) { return join(c.sweep_jpeg); },
            [](RunConfig& c, const std::string& v) { c.sweep_jpeg = parse_list<int>(v); }},
      Field{"sweep.blur", "Blur sigmas of the robustness sweep.", [](const RunConfig& c) { return join(c.sweep_blur); },
            [](RunConfig& c, const std::string& v) { c.sweep_blur = parse_list<double>(v); }},
  };
  return table;
}

#undef FASA_NUM
#undef FASA_BOOL
#undef FASA_ENUM

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

void apply(RunConfig& config, const std::string& key, const std::string& value) {
  const Field& f = find_field(key);
  try {
    f.set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

template <typename F>
void check(bool ok, F&& message) {
  if (!ok) throw ConfigError(message());
}

}  // namespace

void RunConfig::validate() const {
  try {
    datagen.validate();
    model.validate();
    loss.validate();
    train.augment.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  check(encoder == "standin" || encoder.rfind("file:", 0) == 0,
        [&] { return "encoder.choice must be standin or file:<path>, got '" + encoder + "'"; });
  check(encoder_spec.input_size > 0 && encoder_spec.patch_grid > 0 && encoder_spec.token_dim > 0 &&
            encoder_spec.layers > 0 && encoder_spec.heads > 0,
        [] { return std::string("encoder dimensions must be positive"); });
  check(encoder_spec.input_size % encoder_spec.patch_grid == 0,
        [] { return std::string("encoder.input_size must be a multiple of encoder.patch_grid"); });
  check(encoder_spec.token_dim % encoder_spec.heads == 0,
        [] { return std::string("encoder.token_dim must be divisible by encoder.heads"); });
  for (int l : model.semantic.layers)
    check(l >= 1 && l <= encoder_spec.layers, [&] { return "semantic.layers entry " + std::to_string(l) + " out of range"; });
  check(optim.lr > 0, [] { return std::string("optim.lr must be positive"); });
  check(optim.beta1 >= 0 && optim.beta1 < 1 && optim.beta2 >= 0 && optim.beta2 < 1,
        [] { return std::string("optim betas must lie in [0, 1)"); });
  check(optim.eps > 0 && optim.weight_decay >= 0, [] { return std::string("optim.eps must be > 0, weight_decay >= 0"); });
  check(train.epochs >= 1, [] { return std::string("train.epochs must be >= 1"); });
  check(train.batch >= 1 && eval.batch >= 1, [] { return std::string("batch sizes must be >= 1"); });
  check(eval.threshold >= 0 && eval.threshold <= 1, [] { return std::string("eval.threshold must lie in [0, 1]"); });
  check(!ablate_seeds.empty(), [] { return std::string("ablate.seeds must not be empty"); });
  check(!sweep_jpeg.empty() && !sweep_blur.empty(), [] { return std::string("sweep grids must not be empty"); });
  for (int q : sweep_jpeg)
    check(q >= 10 && q <= 100, [&] { return "sweep.jpeg quality " + std::to_string(q) + " outside 10..100"; });
  for (double s : sweep_blur) check(s >= 0, [] { return std::string("sweep.blur sigmas must be >= 0"); });
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig config = base;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << is.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void set_config_value(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  apply(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::string documented_config(const RunConfig& config) {
  std::string out = "# fasa run configuration. Every key is listed with its default.\n";
  std::string section;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const std::string s = key.substr(0, key.find('.'));
    if (s != section) {
      out += "\n";
      section = s;
    }
    out += "# " + std::string(f.doc) + "\n" + key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(serialize_config(config)); }

bool deterministic_mode() {
  const char* v = std::getenv("FASA_DETERMINISTIC");
  return v != nullptr && std::string(v) != "" && std::string(v) != "0";
}

}  // namespace fasa
