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

#include "fasa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fasa {
namespace {

std::vector<Index> probe_indices(Index size, Index max_entries, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(size));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (size <= max_entries) return idx;
  for (Index i = 0; i < max_entries; ++i) {
    const Index j = rng.integer(i, size - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(max_entries));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::pair<std::string, Var<double>>> select(const ParameterStore<double>& store,
                                                        const std::vector<std::string>& prefixes) {
  std::vector<std::pair<std::string, Var<double>>> out;
  for (const auto& [name, v] : store.entries())
    for (const auto& p : prefixes)
      if (name.rfind(p, 0) == 0) {
        out.emplace_back(name, v);
        break;
      }
  return out;
}

Var<double> weighted_sum(const Var<double>& x, std::uint64_t seed) {
  Tensor<double> r(x.shape());
  Rng rng(seed);
  for (Index i = 0; i < r.size(); ++i) r[i] = rng.uniform(-1.0, 1.0);
  return sum(mul(x, constant(std::move(r))));
}

}  // namespace

std::vector<GradcheckResult> gradcheck(const std::function<Var<double>()>& loss,
                                       const std::vector<std::pair<std::string, Var<double>>>& params,
                                       const GradcheckOptions& options) {
  for (auto [name, v] : params) v.zero_grad();
  const Var<double> root = loss();
  backward(root);
  std::vector<Tensor<double>> analytic;
  for (const auto& [name, v] : params)
    analytic.push_back(v.grad().size() == v.value().size() ? v.grad() : Tensor<double>(v.shape()));

  Rng rng(options.seed);
  std::vector<GradcheckResult> results;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Var<double> p = params[k].second;
    GradcheckResult r;
    r.name = params[k].first;
    for (Index i : probe_indices(p.value().size(), options.max_entries, rng)) {
      const double orig = p.value()[i];
      p.mutable_value()[i] = orig + options.step;
      const double up = loss().value()[0];
      p.mutable_value()[i] = orig - options.step;
      const double down = loss().value()[0];
      p.mutable_value()[i] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      r.max_rel_error = std::max(r.max_rel_error, std::isfinite(rel) ? rel : INFINITY);
      r.max_abs_gradient = std::max(r.max_abs_gradient, std::abs(a));
      ++r.checked;
    }
    r.passed = r.max_rel_error < options.tolerance;
    results.push_back(r);
  }
  for (auto [name, v] : params) v.zero_grad();
  return results;
}

bool GradientGroup::passed() const {
  return !results.empty() && std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

double GradientGroup::max_rel_error() const {
  double m = 0;
  for (const auto& r : results) m = std::max(m, r.max_rel_error);
  return m;
}

EncoderSpec tiny_encoder_spec() {
  EncoderSpec s;
  s.input_size = 16;
  s.patch_grid = 4;
  s.token_dim = 8;
  s.layers = 2;
  s.heads = 2;
  s.seed = 99;
  return s;
}

ModelConfig tiny_model_config() {
  ModelConfig c;
  c.image_size = 32;
  c.seed = 5;
  c.semantic.embed_dim = 8;
  c.semantic.heads = 2;
  c.backbone.channels = {4, 4, 4, 4};
  c.backbone.depths = {1, 1, 1, 1};
  c.decoder.query_dim = 8;
  c.decoder.heads = 2;
  c.decoder.gate_hidden = 4;
  return c;
}

void randomize_parameters(ParameterStore<double>& store, std::uint64_t seed) {
  for (const auto& [name, v] : store.entries()) {
    Var<double> p = v;
    Rng rng(mix_seed(seed, fnv1a(name)));
    auto& a = p.mutable_value().array();
    if (name == "psa.log_tau") {
      a[0] = std::log(0.2) + 0.1 * rng.normal();
      continue;
    }
    const bool gain = name.size() > 5 && name.compare(name.size() - 5, 5, ".gain") == 0;
    const double scale = name.rfind("freq.", 0) == 0 ? 0.5 : 0.3;
    for (Index i = 0; i < a.size(); ++i) a[i] = (gain ? 1.0 : 0.0) + scale * rng.normal();
  }
}

std::vector<GradientGroup> run_gradient_suite(const GradcheckOptions& options) {
  std::vector<GradientGroup> groups;

  {
    ParameterStore<double> store(3);
    DualBandDct<double> dct(store, 50.0);
    Var<double>(store.get("freq.alpha_high")).mutable_value()[0] = 0.3;
    Var<double>(store.get("freq.alpha_low")).mutable_value()[0] = -0.2;
    Tensor<double> image(Shape{1, 3, 8, 8});
    Rng rng(11);
    for (Index i = 0; i < image.size(); ++i) image[i] = rng.uniform();
    auto f = [&] {
      const auto bands = dct.decompose(constant(image));
      return add(sum(mul(bands.high, bands.high)), sum(mul(bands.low, bands.low)));
    };
    groups.push_back({"band cutoffs", gradcheck(f, select(store, {"freq."}), options)});
  }

  auto encoder = make_standin_encoder<double>(tiny_encoder_spec());
  FasaModel<double> model(tiny_model_config(), encoder);
  randomize_parameters(model.parameters(), 23);
  const Index n = 2, s = model.config().image_size;
  Tensor<double> images(Shape{n, 3, s, s});
  Tensor<double> masks(Shape{n, 1, s, s});
  Rng rng(29);
  for (Index i = 0; i < images.size(); ++i) images[i] = rng.uniform();
  for (Index y = 6; y < 20; ++y)
    for (Index x = 10; x < 26; ++x) masks.at(0, 0, y, x) = 1;
  for (Index y = 0; y < 12; ++y)
    for (Index x = 0; x < 8; ++x) masks.at(1, 0, y, x) = 1;
  const LossWeights weights;

  auto contrastive = [&] {
    const auto out = model.forward(images);
    const auto loss = model.loss(out, masks, LossWeights{0.0, 0.0, 1.0});
    return loss.objective;
  };
  groups.push_back({"contrastive alignment",
                    gradcheck(contrastive,
                              select(model.parameters(), {"psa.w_m", "psa.projector", "psa.prototype", "psa.log_tau"}),
                              options)});

  auto adapter = [&] {
    const auto out = model.forward(images);
    Var<double> acc = weighted_sum(out.stages[0], 1);
    for (std::size_t k = 1; k < out.stages.size(); ++k) acc = add(acc, weighted_sum(out.stages[k], 1 + k));
    return acc;
  };
  groups.push_back({"side adapters", gradcheck(adapter, select(model.parameters(), {"sfsa."}), options)});

  auto decoder = [&] { return weighted_sum(model.forward(images).mask.logits, 7); };
  groups.push_back({"decoder query, gates and fusion",
                    gradcheck(decoder,
                              select(model.parameters(), {"psa.prototype_fake", "decoder.gates.", "decoder.phi."}),
                              options)});

  auto total = [&] { return model.loss(model.forward(images), masks, weights).objective; };
  std::vector<std::pair<std::string, Var<double>>> all(model.parameters().entries().begin(),
                                                       model.parameters().entries().end());
  GradcheckOptions total_options = options;
  total_options.max_entries = std::min<Index>(options.max_entries, 2);
  groups.push_back({"total objective", gradcheck(total, all, total_options)});
  return groups;
}

}  // namespace fasa
