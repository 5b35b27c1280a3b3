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

#ifndef ACTIF_ATTRIBUTION_ATTRIBUTOR_HPP_
#define ACTIF_ATTRIBUTION_ATTRIBUTOR_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "actif/attribution/deepactif.hpp"
#include "actif/attribution/integrated_gradients.hpp"
#include "actif/attribution/perturbation.hpp"
#include "actif/attribution/random.hpp"
#include "actif/attribution/scores.hpp"
#include "actif/attribution/shapley.hpp"
#include "actif/config_json.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/nn/model.hpp"

namespace actif::attribution {

struct AttributionConfig {
  std::string method = "deepactif-lstm";
  double epsilon = kDefaultEpsilon;
  std::size_t ig_steps = 50;
  std::size_t shap_coalitions = 2048;
  std::size_t shuffle_repeats = 10;
  std::size_t random_baseline_draws = 5;
  std::uint64_t seed = 0;

  void validate(std::size_t F) const;
};

inline const std::vector<std::string>& method_tags() {
  static const std::vector<std::string> tags = {
      "deepactif-input", "deepactif-lstm", "deepactif-penultimate",
      "ablation",        "shuffle",        "ig-zero",
      "ig-mean",         "ig-random",      "kernelshap",
      "random"};
  return tags;
}

inline std::string valid_methods_message() {
  std::string out;
  for (const auto& t : method_tags()) out += (out.empty() ? "" : ", ") + t;
  return out;
}

inline void check_method(std::string_view tag) {
  for (const auto& t : method_tags()) {
    if (t == tag) return;
  }
  throw ConfigError("unknown attribution method '" + std::string(tag) +
                    "'; valid methods: " + valid_methods_message());
}

// Method family: the tag prefix before the first '-'.
inline std::string method_family(std::string_view tag) {
  return std::string(tag.substr(0, tag.find('-')));
}

// Display labels in the family / variant layout of the report tables.
struct MethodLabel {
  std::string family;
  std::string variant;
};

inline MethodLabel method_label(std::string_view tag) {
  if (tag == "deepactif-input") return {"DeepACTIF", "Input"};
  if (tag == "deepactif-lstm") return {"DeepACTIF", "LSTM"};
  if (tag == "deepactif-penultimate") return {"DeepACTIF", "Penultimate"};
  if (tag == "ig-zero") return {"IG", "ZERO"};
  if (tag == "ig-mean") return {"IG", "MEAN"};
  if (tag == "ig-random") return {"IG", "RANDOM"};
  if (tag == "ablation") return {"Ablation", "-"};
  if (tag == "shuffle") return {"Shuffle", "-"};
  if (tag == "kernelshap") return {"KernelSHAP", "-"};
  if (tag == "random") return {"Random", "-"};
  return {std::string(tag), "-"};
}

inline void AttributionConfig::validate(std::size_t F) const {
  check_method(method);
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (ig_steps < 1) throw ConfigError("ig_steps must be >= 1");
  if (shuffle_repeats < 1) throw ConfigError("shuffle_repeats must be >= 1");
  if (random_baseline_draws < 1) throw ConfigError("random_baseline_draws must be >= 1");
  if (method == "kernelshap" && shap_coalitions < 2 * F) {
    throw ConfigError("shap_coalitions must be >= 2F = " + std::to_string(2 * F));
  }
}

inline void to_json(nlohmann::json& j, const AttributionConfig& c) {
  j = nlohmann::json{{"method", c.method},
                     {"epsilon", c.epsilon},
                     {"ig_steps", c.ig_steps},
                     {"shap_coalitions", c.shap_coalitions},
                     {"shuffle_repeats", c.shuffle_repeats},
                     {"random_baseline_draws", c.random_baseline_draws},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, AttributionConfig& c) {
  check_keys(j,
             {"method", "epsilon", "ig_steps", "shap_coalitions", "shuffle_repeats",
              "random_baseline_draws", "seed"},
             "attribution config");
  c = AttributionConfig{};
  c.method = j.value("method", c.method);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.ig_steps = j.value("ig_steps", c.ig_steps);
  c.shap_coalitions = j.value("shap_coalitions", c.shap_coalitions);
  c.shuffle_repeats = j.value("shuffle_repeats", c.shuffle_repeats);
  c.random_baseline_draws = j.value("random_baseline_draws", c.random_baseline_draws);
  c.seed = j.value("seed", c.seed);
}

// Runs the configured method. `reference` supplies the per-feature means used
// by the IG mean baseline and the KernelSHAP background; it defaults to `ds`.
inline FeatureScores attribute(const nn::LstmRegressor& model, const data::SequenceDataset& ds,
                               const AttributionConfig& cfg,
                               const data::SequenceDataset* reference = nullptr) {
  cfg.validate(ds.F());
  if (ds.empty()) throw DataError("attribution needs a non-empty dataset");
  if (model.dims().input != ds.F()) {
    throw ConfigError("model expects " + std::to_string(model.dims().input) +
                      " features but the dataset has " + std::to_string(ds.F()));
  }
  const std::string& m = cfg.method;
  if (m.starts_with("deepactif-")) {
    return deepactif(model, ds, parse_tap(std::string_view(m).substr(10)), cfg.epsilon);
  }
  if (m == "ablation") return ablation_importance(model, ds);
  if (m == "shuffle") return shuffle_importance(model, ds, cfg.shuffle_repeats, cfg.seed);
  if (m.starts_with("ig-")) {
    IgOptions opts{cfg.ig_steps, cfg.random_baseline_draws, cfg.seed};
    return ig_feature_scores(model, ds, parse_baseline(std::string_view(m).substr(3)), opts,
                             reference);
  }
  if (m == "kernelshap") {
    return kernel_shap_scores(model, ds, KernelShapOptions{cfg.shap_coalitions, cfg.seed, false},
                              reference);
  }
  return random_scores(ds.F(), cfg.seed, ds.feature_names);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_ATTRIBUTOR_HPP_
