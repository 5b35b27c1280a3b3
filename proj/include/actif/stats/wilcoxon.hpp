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

#ifndef ACTIF_STATS_WILCOXON_HPP_
#define ACTIF_STATS_WILCOXON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "actif/error.hpp"

namespace actif::stats {

enum class WilcoxonMode { kAuto, kExact, kNormal };

// Largest n_effective for which kAuto uses the exact null distribution.
inline constexpr std::size_t kExactLimit = 20;
inline constexpr std::size_t kMinEffective = 5;

struct WilcoxonResult {
  double w = 0.0;  // min(w_plus, w_minus)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n_effective = 0;
  bool exact = false;
};

// Midranks of |d| (1-based). Ties share the mean of the ranks they span.
inline std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// Exact two-sided p from the sign-flip null distribution. Ranks are doubled so
// midranks become integers; counts[s] is the number of sign assignments whose
// doubled positive-rank sum is s.
inline double exact_p_value(const std::vector<double>& ranks, double w) {
  std::vector<std::size_t> doubled(ranks.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
    total += doubled[i];
  }
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;) counts[s + r] += counts[s];
    reach += r;
  }
  const auto limit = static_cast<std::size_t>(std::llround(2.0 * w));
  double tail = 0.0;
  for (std::size_t s = 0; s <= limit && s <= total; ++s) tail += counts[s];
  const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, p);
}

// Normal approximation with tie and continuity corrections.
inline double normal_p_value(const std::vector<double>& ranks, double w_plus) {
  const auto n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Signed-rank test on paired differences. Zero differences are dropped.
inline WilcoxonResult wilcoxon_differences(std::span<const double> d,
                                           WilcoxonMode mode = WilcoxonMode::kAuto) {
  std::vector<double> nonzero;
  for (double v : d) {
    if (!std::isfinite(v)) throw NumericError("non-finite paired difference");
    if (v != 0.0) nonzero.push_back(v);
  }
  if (nonzero.empty()) throw DegenerateDataError("all paired differences are zero");
  if (nonzero.size() < kMinEffective) {
    throw TooFewSamplesError("Wilcoxon signed-rank needs at least " +
                             std::to_string(kMinEffective) +
                             " non-zero differences, got " + std::to_string(nonzero.size()));
  }
  std::vector<double> magnitude(nonzero.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) magnitude[i] = std::abs(nonzero[i]);
  const std::vector<double> ranks = midranks(magnitude);
  WilcoxonResult r;
  r.n_effective = nonzero.size();
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    (nonzero[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  }
  r.w = std::min(r.w_plus, r.w_minus);
  r.exact = mode == WilcoxonMode::kExact ||
            (mode == WilcoxonMode::kAuto && r.n_effective <= kExactLimit);
  r.p = r.exact ? exact_p_value(ranks, r.w) : normal_p_value(ranks, r.w_plus);
  r.p = std::clamp(r.p, std::numeric_limits<double>::min(), 1.0);
  return r;
}

inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                           WilcoxonMode mode = WilcoxonMode::kAuto) {
  if (x.size() != y.size()) {
    throw DataError("paired samples differ in length: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return wilcoxon_differences(d, mode);
}

}  // namespace actif::stats

#endif  // ACTIF_STATS_WILCOXON_HPP_
