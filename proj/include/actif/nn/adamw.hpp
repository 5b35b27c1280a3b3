/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_NN_ADAMW_HPP_
#define ACTIF_NN_ADAMW_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "actif/error.hpp"
#include "actif/nn/model.hpp"

namespace actif::nn {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// First and second moment estimates, flattened in for_each_tensor order.
struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  static AdamWState for_model(const LstmRegressor& model) {
    const std::size_t n = parameter_count(model.params());
    return AdamWState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
  }
};

// One AdamW update with decoupled weight decay:
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// with bias-corrected moments m_hat, v_hat.
inline void adamw_step(LstmRegressor& model, const LstmParameters& grads, AdamWState& state,
                       const AdamWConfig& cfg) {
  const std::size_t n = parameter_count(model.params());
  if (state.m.size() != n || state.v.size() != n || parameter_count(grads) != n) {
    throw ConfigError("optimizer state does not match model (" + std::to_string(n) +
                      " parameters)");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;

  std::vector<std::span<const double>> grad_tensors;
  for_each_tensor(grads, [&](std::string_view, std::span<const double> g) {
    grad_tensors.push_back(g);
  });

  LstmParameters next = model.params();
  std::size_t offset = 0;
  std::size_t tensor = 0;
  for_each_tensor(next, [&](std::string_view, std::span<double> w) {
    const auto g = grad_tensors[tensor++];
    if (g.size() != w.size()) throw ConfigError("gradient shape does not match model");
    for (std::size_t j = 0; j < w.size(); ++j, ++offset) {
      double& m = state.m[offset];
      double& v = state.v[offset];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g[j];
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g[j] * g[j];
      w[j] *= decay;
      w[j] -= cfg.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + cfg.eps);
    }
  });
  model.set_params(std::move(next));
}

}  // namespace actif::nn

#endif  // ACTIF_NN_ADAMW_HPP_
