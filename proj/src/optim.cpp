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

#include "fasa/optim.hpp"

namespace fasa {

template <typename S>
AdamW<S>::AdamW(ParameterStore<S>& store, const AdamWConfig& config) : store_(store), config_(config) {
  if (!(config.lr >= 0) || !(config.weight_decay >= 0) || !(config.eps > 0) || !(config.beta1 >= 0 && config.beta1 < 1) ||
      !(config.beta2 >= 0 && config.beta2 < 1))
    throw ConfigError("invalid AdamW hyperparameters");
  for (const auto& [name, v] : store.entries()) {
    m_.push_back(Eigen::ArrayXd::Zero(v.value().size()));
    v_.push_back(Eigen::ArrayXd::Zero(v.value().size()));
  }
}

template <typename S>
void AdamW<S>::step(double lr) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Var<S> p = entries[i].second;
    auto& value = p.mutable_value().array();
    Eigen::ArrayXd w = value.template cast<double>();
    w *= 1.0 - lr * config_.weight_decay;
    if (p.grad().size() == value.size()) {
      const Eigen::ArrayXd g = p.grad().array().template cast<double>();
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g.square();
      w -= lr * (m_[i] / c1) / ((v_[i] / c2).sqrt() + config_.eps);
    }
    value = w.template cast<S>();
  }
}

template <typename S>
void AdamW<S>::save(TensorArchive& archive) const {
  const auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Shape& shape = entries[i].second.shape();
    archive.put("adamw.m/" + entries[i].first, Tensor<double>(shape, m_[i]));
    archive.put("adamw.v/" + entries[i].first, Tensor<double>(shape, v_[i]));
  }
  archive.set_meta("adamw.step", std::to_string(t_));
}

template <typename S>
void AdamW<S>::load(const TensorArchive& archive) {
  const auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Tensor<double> m = archive.get<double>("adamw.m/" + entries[i].first);
    const Tensor<double> v = archive.get<double>("adamw.v/" + entries[i].first);
    if (m.size() != entries[i].second.value().size() || v.size() != m.size())
      throw ValidationError("optimizer state for " + entries[i].first + " has the wrong size");
    m_[i] = m.array();
    v_[i] = v.array();
  }
  t_ = std::stoll(archive.meta("adamw.step"));
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace fasa
