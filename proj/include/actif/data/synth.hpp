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

#ifndef ACTIF_DATA_SYNTH_HPP_
#define ACTIF_DATA_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "actif/config_json.hpp"
#include "actif/data/dataset.hpp"
#include "actif/data/preprocess.hpp"
#include "actif/data/records.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"

namespace actif::data {

// Synthetic regression task with a planted set of relevant features.
//
// Each subject's features are independent stationary AR(1) processes
// (coefficient `ar_coefficient`, unit marginal variance). The target of a row
// is sum_{f in relevant} weight_f * (mean of feature f over the trailing
// `window` rows) plus Gaussian noise, so the target of any aligned window is
// the weighted temporal mean of its relevant features. Irrelevant features
// never enter the target.
struct SynthConfig {
  std::size_t n_subjects = 8;
  std::size_t windows_per_subject = 40;
  std::size_t window = 30;  // T
  std::size_t features = 15;
  std::vector<std::size_t> relevant;
  std::vector<double> weights;  // one per relevant feature
  double noise_std = 0.1;
  double ar_coefficient = 0.9;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_subjects < 1) throw ConfigError("synth: n_subjects must be >= 1");
    if (windows_per_subject < 1) throw ConfigError("synth: windows_per_subject must be >= 1");
    if (window < 1) throw ConfigError("synth: T must be >= 1");
    if (features < 1) throw ConfigError("synth: F must be >= 1");
    if (weights.size() != relevant.size()) {
      throw ConfigError("synth: weights must have one entry per relevant feature");
    }
    for (std::size_t f : relevant) {
      if (f >= features) {
        throw ConfigError("synth: relevant feature " + std::to_string(f) + " outside 0.." +
                          std::to_string(features - 1));
      }
    }
    if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be >= 0");
    if (!(std::abs(ar_coefficient) < 1.0)) {
      throw ConfigError("synth: ar_coefficient must lie in (-1, 1)");
    }
  }
};

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_subjects", c.n_subjects},
                     {"windows_per_subject", c.windows_per_subject},
                     {"T", c.window},
                     {"F", c.features},
                     {"relevant", c.relevant},
                     {"weights", c.weights},
                     {"noise_std", c.noise_std},
                     {"ar_coefficient", c.ar_coefficient},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  check_keys(j,
             {"n_subjects", "windows_per_subject", "T", "F", "relevant", "weights", "noise_std",
              "ar_coefficient", "seed"},
             "synth config");
  c = SynthConfig{};
  c.n_subjects = j.value("n_subjects", c.n_subjects);
  c.windows_per_subject = j.value("windows_per_subject", c.windows_per_subject);
  c.window = j.value("T", c.window);
  c.features = j.value("F", c.features);
  c.relevant = j.value("relevant", c.relevant);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.ar_coefficient = j.value("ar_coefficient", c.ar_coefficient);
  c.seed = j.value("seed", c.seed);
  if (j.contains("weights")) {
    c.weights = j.at("weights").get<std::vector<double>>();
  } else {
    c.weights.assign(c.relevant.size(), 1.0);
  }
}

struct SynthOutput {
  RawRecords records;       // row-level traces, CSV-exportable
  SequenceDataset dataset;  // aligned non-overlapping windows
  std::vector<std::size_t> relevant;
};

inline std::string synth_subject_id(std::size_t index, std::size_t count) {
  const int width = count < 10 ? 1 : static_cast<int>(std::to_string(count - 1).size());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%0*zu", width, index);
  return buf;
}

inline SynthOutput synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t T = cfg.window;
  const std::size_t F = cfg.features;
  const std::size_t rows = cfg.windows_per_subject * T;
  const double innovation_sd = std::sqrt(1.0 - cfg.ar_coefficient * cfg.ar_coefficient);

  SynthOutput out;
  out.relevant = cfg.relevant;
  out.records.feature_names.reserve(F);
  for (std::size_t f = 0; f < F; ++f) out.records.feature_names.push_back("f" + std::to_string(f));

  for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
    std::mt19937_64 rng(mix_seed(cfg.seed, s));
    std::normal_distribution<double> normal(0.0, 1.0);
    SubjectTrace trace;
    trace.id = synth_subject_id(s, cfg.n_subjects);
    trace.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(F));
    trace.timestamps.resize(rows);
    trace.targets.resize(rows);
    for (std::size_t f = 0; f < F; ++f) trace.features(0, static_cast<Eigen::Index>(f)) = normal(rng);
    for (std::size_t r = 1; r < rows; ++r) {
      for (std::size_t f = 0; f < F; ++f) {
        const auto ri = static_cast<Eigen::Index>(r);
        const auto fi = static_cast<Eigen::Index>(f);
        trace.features(ri, fi) =
            cfg.ar_coefficient * trace.features(ri - 1, fi) + innovation_sd * normal(rng);
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t first = r + 1 >= T ? r + 1 - T : 0;
      const auto len = static_cast<Eigen::Index>(r + 1 - first);
      double y = 0.0;
      for (std::size_t k = 0; k < cfg.relevant.size(); ++k) {
        const auto fi = static_cast<Eigen::Index>(cfg.relevant[k]);
        y += cfg.weights[k] *
             trace.features.col(fi).segment(static_cast<Eigen::Index>(first), len).mean();
      }
      const double noise = normal(rng);
      trace.targets[r] = y + cfg.noise_std * noise;
      trace.timestamps[r] = static_cast<double>(r);
    }
    out.records.subjects.push_back(std::move(trace));
  }
  out.dataset = window(out.records, T, T);
  return out;
}

}  // namespace actif::data

#endif  // ACTIF_DATA_SYNTH_HPP_
