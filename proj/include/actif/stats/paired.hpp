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

#ifndef ACTIF_STATS_PAIRED_HPP_
#define ACTIF_STATS_PAIRED_HPP_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace actif::stats {

// Reference method vs one other method at one k, paired by fold.
struct PairedComparison {
  std::string method_a;  // reference
  std::string method_b;
  int k = 0;
  std::vector<std::string> folds;
  std::vector<double> x;  // per-fold MAE of method_a
  std::vector<double> y;  // per-fold MAE of method_b
  double w_statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> effect_d;  // empty: undefined (zero-variance differences)
  std::size_t n_effective = 0;
  bool exact = false;
  std::string error;  // non-empty when the test was refused

  bool ok() const { return error.empty(); }
};

inline nlohmann::json to_json(const PairedComparison& c) {
  nlohmann::json j{{"method_a", c.method_a}, {"method_b", c.method_b}, {"k", c.k},
                   {"folds", c.folds},       {"x", c.x},               {"y", c.y},
                   {"n_effective", c.n_effective}};
  if (c.ok()) {
    j["w_statistic"] = c.w_statistic;
    j["p_value"] = c.p_value;
    j["exact"] = c.exact;
  } else {
    j["error"] = c.error;
  }
  j["effect_d"] = c.effect_d ? nlohmann::json(*c.effect_d) : nlohmann::json(nullptr);
  return j;
}

inline PairedComparison comparison_from_json(const nlohmann::json& j) {
  PairedComparison c;
  c.method_a = j.at("method_a").get<std::string>();
  c.method_b = j.at("method_b").get<std::string>();
  c.k = j.at("k").get<int>();
  c.folds = j.at("folds").get<std::vector<std::string>>();
  c.x = j.at("x").get<std::vector<double>>();
  c.y = j.at("y").get<std::vector<double>>();
  c.n_effective = j.at("n_effective").get<std::size_t>();
  if (j.contains("error")) {
    c.error = j.at("error").get<std::string>();
  } else {
    c.w_statistic = j.at("w_statistic").get<double>();
    c.p_value = j.at("p_value").get<double>();
    c.exact = j.at("exact").get<bool>();
  }
  if (!j.at("effect_d").is_null()) c.effect_d = j.at("effect_d").get<double>();
  return c;
}

}  // namespace actif::stats

#endif  // ACTIF_STATS_PAIRED_HPP_
