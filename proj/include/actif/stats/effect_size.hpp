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

#ifndef ACTIF_STATS_EFFECT_SIZE_HPP_
#define ACTIF_STATS_EFFECT_SIZE_HPP_

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actif/error.hpp"

namespace actif::stats {

// Paired Cohen's d: mean(x - y) / sample_std(x - y). Empty when the
// differences have zero spread.
inline std::optional<double> cohens_d_paired(std::span<const double> x,
                                             std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("paired samples differ in length: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) throw DataError("Cohen's d needs at least 2 pairs");
  std::vector<double> d(x.size());
  bool all_equal = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d[i] = x[i] - y[i];
    if (d[i] != d[0]) all_equal = false;
  }
  if (all_equal) return std::nullopt;
  const auto n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return std::nullopt;
  return mean / sd;
}

}  // namespace actif::stats

#endif  // ACTIF_STATS_EFFECT_SIZE_HPP_
