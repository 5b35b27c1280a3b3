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

#ifndef ACTIF_EVALUATION_TOPK_HPP_
#define ACTIF_EVALUATION_TOPK_HPP_

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "actif/attribution/scores.hpp"
#include "actif/config_json.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"

namespace actif::evaluation {

struct TopKConfig {
  std::vector<int> k_percents = {10, 20, 30, 40};
  std::size_t repeats = 25;
  std::uint64_t seed = 0;

  void validate() const {
    if (k_percents.empty()) throw ConfigError("k_percents must not be empty");
    for (int k : k_percents) {
      if (k <= 0 || k > 100) throw ConfigError("k percent " + std::to_string(k) + " outside (0, 100]");
    }
    std::vector<int> sorted = k_percents;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("k_percents contains duplicates");
    }
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
  }
};

inline void to_json(nlohmann::json& j, const TopKConfig& c) {
  j = nlohmann::json{{"k_percents", c.k_percents}, {"repeats", c.repeats}, {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TopKConfig& c) {
  check_keys(j, {"k_percents", "repeats", "seed"}, "top-k config");
  c = TopKConfig{};
  c.k_percents = j.value("k_percents", c.k_percents);
  c.repeats = j.value("repeats", c.repeats);
  c.seed = j.value("seed", c.seed);
}

// ceil(k / 100 * F), at least 1.
inline std::size_t top_k_count(std::size_t F, int k_percent) {
  if (k_percent <= 0 || k_percent > 100) {
    throw ConfigError("k percent " + std::to_string(k_percent) + " outside (0, 100]");
  }
  const std::size_t n = (static_cast<std::size_t>(k_percent) * F + 99) / 100;
  return std::max<std::size_t>(1, n);
}

// Leading entries of the ranking, in rank order. Sets are nested in k.
inline std::vector<std::size_t> select_top_k(const attribution::FeatureScores& scores,
                                             int k_percent) {
  const std::size_t n = top_k_count(scores.F(), k_percent);
  return {scores.ranking.begin(), scores.ranking.begin() + static_cast<std::ptrdiff_t>(n)};
}

// Keeps the given feature columns in their original relative order.
inline data::SequenceDataset subset_dataset(const data::SequenceDataset& ds,
                                            std::vector<std::size_t> features) {
  if (features.empty()) throw ConfigError("feature subset must not be empty");
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  if (features.back() >= ds.F()) {
    throw ConfigError("feature index " + std::to_string(features.back()) +
                      " out of range for F=" + std::to_string(ds.F()));
  }
  data::SequenceDataset out;
  out.window = ds.window;
  for (std::size_t f : features) out.feature_names.push_back(ds.feature_names[f]);
  for (const auto& [subject, stats] : ds.norm_stats) {
    auto& kept = out.norm_stats[subject];
    for (std::size_t f : features) {
      if (f < stats.size()) kept.push_back(stats[f]);
    }
  }
  out.samples.reserve(ds.N());
  for (const auto& s : ds.samples) {
    data::Sample copy;
    copy.subject = s.subject;
    copy.target = s.target;
    copy.x.resize(s.x.rows(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
      copy.x.col(static_cast<Eigen::Index>(j)) = s.x.col(static_cast<Eigen::Index>(features[j]));
    }
    out.samples.push_back(std::move(copy));
  }
  return out;
}

}  // namespace actif::evaluation

#endif  // ACTIF_EVALUATION_TOPK_HPP_
