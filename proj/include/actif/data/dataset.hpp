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

#ifndef ACTIF_DATA_DATASET_HPP_
#define ACTIF_DATA_DATASET_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actif/error.hpp"
#include "actif/hash.hpp"

namespace actif::data {

// Per-subject, per-feature z-score parameters.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  bool constant = false;

  bool operator==(const NormStats&) const = default;
};

using NormStatsMap = std::map<std::string, std::vector<NormStats>>;

// One fixed-length window: T x F inputs, target taken at the final row.
struct Sample {
  std::string subject;
  Eigen::MatrixXd x;
  double target = 0.0;

  bool operator==(const Sample& o) const {
    return subject == o.subject && target == o.target && x.rows() == o.x.rows() &&
           x.cols() == o.x.cols() && x == o.x;
  }
};

struct SequenceDataset {
  std::vector<Sample> samples;
  std::vector<std::string> feature_names;
  std::size_t window = 0;  // T
  NormStatsMap norm_stats;

  std::size_t T() const { return window; }
  std::size_t F() const { return feature_names.size(); }
  std::size_t N() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // Subject ids in order of first appearance.
  std::vector<std::string> subjects() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : samples) {
      if (seen.insert(s.subject).second) out.push_back(s.subject);
    }
    return out;
  }

  // Throws ConfigError if any sample disagrees with (T, F).
  void validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& x = samples[i].x;
      if (static_cast<std::size_t>(x.rows()) != window ||
          static_cast<std::size_t>(x.cols()) != F()) {
        throw ConfigError("sample " + std::to_string(i) + " has shape " +
                          std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          ", expected " + std::to_string(window) + "x" + std::to_string(F()));
      }
    }
  }

  // Copy with the same metadata and only the samples for which keep() holds.
  template <class Pred>
  SequenceDataset filtered(Pred keep) const {
    SequenceDataset out;
    out.feature_names = feature_names;
    out.window = window;
    out.norm_stats = norm_stats;
    for (const auto& s : samples) {
      if (keep(s)) out.samples.push_back(s);
    }
    return out;
  }

  bool operator==(const SequenceDataset&) const = default;
};

// Content hash over feature names, window length, and every sample.
inline std::string fingerprint(const SequenceDataset& ds) {
  Fnv1a h;
  h.update(static_cast<std::uint64_t>(ds.window));
  for (const auto& name : ds.feature_names) h.update(name);
  for (const auto& s : ds.samples) {
    h.update(s.subject);
    h.update(s.target);
    h.update(s.x.data(), static_cast<std::size_t>(s.x.size()) * sizeof(double));
  }
  return h.hex();
}

// Per-feature mean over every sample and timestep.
inline Eigen::RowVectorXd feature_means(const SequenceDataset& ds) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(ds.F()));
  double count = 0.0;
  for (const auto& s : ds.samples) {
    sum += s.x.colwise().sum();
    count += static_cast<double>(s.x.rows());
  }
  if (count > 0.0) sum /= count;
  return sum;
}

}  // namespace actif::data

#endif  // ACTIF_DATA_DATASET_HPP_
