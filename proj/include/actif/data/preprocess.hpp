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

#ifndef ACTIF_DATA_PREPROCESS_HPP_
#define ACTIF_DATA_PREPROCESS_HPP_

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actif/data/dataset.hpp"
#include "actif/data/records.hpp"
#include "actif/error.hpp"

namespace actif::data {

// Per-feature std below this is treated as a constant column.
inline constexpr double kConstantStdThreshold = 1e-12;

// Z-scores every feature within each subject using that subject's full trace
// (population std). Constant columns are shifted to 0 and flagged.
inline RawRecords subject_normalize(RawRecords rec) {
  rec.norm_stats.clear();
  for (auto& s : rec.subjects) {
    if (s.rows() < 2) {
      throw DataError("subject '" + s.id + "' has " + std::to_string(s.rows()) +
                      " row(s); normalization needs at least 2");
    }
    const double n = static_cast<double>(s.rows());
    std::vector<NormStats> stats(static_cast<std::size_t>(s.features.cols()));
    for (Eigen::Index f = 0; f < s.features.cols(); ++f) {
      auto col = s.features.col(f);
      const double mean = col.sum() / n;
      const double var = (col.array() - mean).square().sum() / n;
      const double sd = std::sqrt(var);
      NormStats& st = stats[static_cast<std::size_t>(f)];
      st.mean = mean;
      if (sd < kConstantStdThreshold) {
        st.std = 0.0;
        st.constant = true;
        col.setZero();
      } else {
        st.std = sd;
        col = ((col.array() - mean) / sd).matrix();
      }
    }
    rec.norm_stats[s.id] = std::move(stats);
  }
  return rec;
}

// Slides a length-T window with the given stride over each subject's trace.
// Windows never span two subjects; a window's target is the target at its
// last row. Subjects shorter than T are skipped and reported in `warnings`.
inline SequenceDataset window(const RawRecords& rec, std::size_t T, std::size_t stride,
                              std::vector<std::string>& warnings) {
  if (T < 1) throw ConfigError("window length must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
  SequenceDataset ds;
  ds.feature_names = rec.feature_names;
  ds.window = T;
  ds.norm_stats = rec.norm_stats;
  for (const auto& s : rec.subjects) {
    if (s.rows() < T) {
      warnings.push_back("subject '" + s.id + "' has " + std::to_string(s.rows()) +
                         " rows, fewer than window length " + std::to_string(T) + "; skipped");
      continue;
    }
    for (std::size_t start = 0; start + T <= s.rows(); start += stride) {
      Sample sample;
      sample.subject = s.id;
      sample.x = s.features.middleRows(static_cast<Eigen::Index>(start),
                                       static_cast<Eigen::Index>(T));
      sample.target = s.targets[start + T - 1];
      ds.samples.push_back(std::move(sample));
    }
  }
  return ds;
}

inline SequenceDataset window(const RawRecords& rec, std::size_t T, std::size_t stride) {
  std::vector<std::string> warnings;
  SequenceDataset ds = window(rec, T, stride, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

}  // namespace actif::data

#endif  // ACTIF_DATA_PREPROCESS_HPP_
