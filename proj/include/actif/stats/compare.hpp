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

#ifndef ACTIF_STATS_COMPARE_HPP_
#define ACTIF_STATS_COMPARE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "actif/attribution/attributor.hpp"
#include "actif/error.hpp"
#include "actif/evaluation/report.hpp"
#include "actif/stats/effect_size.hpp"
#include "actif/stats/paired.hpp"
#include "actif/stats/wilcoxon.hpp"

namespace actif::stats {

namespace detail {
inline std::vector<double> checked_fold_means(const evaluation::EvalReport& r,
                                              const std::string& method, int k) {
  std::vector<double> v = evaluation::fold_means(r, method, k);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw IntegrityError("method '" + method + "' has no successful cell for fold " +
                           r.meta.folds[i] + " at k=" + std::to_string(k));
    }
  }
  return v;
}

inline double mean_mae(const evaluation::EvalReport& r, const std::string& method, int k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : r.cells) {
    if (c.method == method && c.k == k && c.mae) {
      sum += *c.mae;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : std::nan("");
}
}  // namespace detail

// Paired test of two methods' per-fold MAEs (averaged over repeats). Refusals
// from the signed-rank test are recorded in `error`, not thrown.
inline PairedComparison compare_methods(const evaluation::EvalReport& r, const std::string& a,
                                        const std::string& b, int k,
                                        WilcoxonMode mode = WilcoxonMode::kAuto) {
  PairedComparison c;
  c.method_a = a;
  c.method_b = b;
  c.k = k;
  c.folds = r.meta.folds;
  c.x = detail::checked_fold_means(r, a, k);
  c.y = detail::checked_fold_means(r, b, k);
  try {
    const WilcoxonResult w = wilcoxon_signed_rank(c.x, c.y, mode);
    c.w_statistic = w.w;
    c.p_value = w.p;
    c.n_effective = w.n_effective;
    c.exact = w.exact;
  } catch (const DataError& e) {
    c.error = e.what();
    for (std::size_t i = 0; i < c.x.size(); ++i) c.n_effective += c.x[i] != c.y[i] ? 1 : 0;
  }
  if (c.x.size() >= 2) c.effect_d = cohens_d_paired(c.x, c.y);
  return c;
}

// Compares `reference` with the best variant (lowest mean MAE at k) of every
// other method family present in the report.
inline std::vector<PairedComparison> compare_all(const evaluation::EvalReport& r,
                                                 const std::string& reference, int k,
                                                 WilcoxonMode mode = WilcoxonMode::kAuto) {
  if (std::find(r.meta.methods.begin(), r.meta.methods.end(), reference) == r.meta.methods.end()) {
    throw ConfigError("reference method '" + reference + "' is not in the report");
  }
  if (std::find(r.meta.k_percents.begin(), r.meta.k_percents.end(), k) ==
      r.meta.k_percents.end()) {
    throw ConfigError("k=" + std::to_string(k) + " is not in the report");
  }
  const std::string ref_family = attribution::method_family(reference);
  std::vector<std::string> families;
  std::map<std::string, std::string> best;
  for (const auto& m : r.meta.methods) {
    const std::string fam = attribution::method_family(m);
    if (fam == ref_family) continue;
    const double mae = detail::mean_mae(r, m, k);
    auto it = best.find(fam);
    if (it == best.end()) {
      families.push_back(fam);
      best[fam] = m;
    } else {
      const double cur = detail::mean_mae(r, it->second, k);
      if (std::isfinite(mae) && (!std::isfinite(cur) || mae < cur)) it->second = m;
    }
  }
  std::vector<PairedComparison> out;
  for (const auto& fam : families) out.push_back(compare_methods(r, reference, best[fam], k, mode));
  return out;
}

// compare_all for every k in the report.
inline std::vector<PairedComparison> compare_grid(const evaluation::EvalReport& r,
                                                  const std::string& reference,
                                                  WilcoxonMode mode = WilcoxonMode::kAuto) {
  std::vector<PairedComparison> out;
  for (int k : r.meta.k_percents) {
    for (auto& c : compare_all(r, reference, k, mode)) out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- tables

inline std::string format_p(double p) {
  if (p < 0.001) return "p<0.001";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p=%.4f", p);
  return buf;
}

inline std::string format_d(const std::optional<double>& d) {
  if (!d) return "d=—";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "d=%.2f", *d);
  return buf;
}

inline std::string format_cell(const PairedComparison& c) {
  const std::string p = c.ok() ? format_p(c.p_value) : "p=n/a";
  return p + ", " + format_d(c.effect_d);
}

inline std::string comparison_label(const std::string& tag) {
  const auto l = attribution::method_label(tag);
  return l.variant == "-" ? l.family : l.family + " (" + l.variant + ")";
}

// CSV: method_a,method_b,k,n,n_effective,w,p,d,error. Undefined d is "—".
inline std::string comparisons_csv(const std::vector<PairedComparison>& cs) {
  std::ostringstream os;
  os << "method_a,method_b,k,n,n_effective,w,p,d,error\n";
  for (const auto& c : cs) {
    char w[32] = "", p[32] = "", d[32] = "—";
    if (c.ok()) {
      std::snprintf(w, sizeof(w), "%.17g", c.w_statistic);
      std::snprintf(p, sizeof(p), "%.17g", c.p_value);
    }
    if (c.effect_d) std::snprintf(d, sizeof(d), "%.17g", *c.effect_d);
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << c.method_a << ',' << c.method_b << ',' << c.k << ',' << c.x.size() << ','
       << c.n_effective << ',' << w << ',' << p << ',' << d << ',' << err << '\n';
  }
  return os.str();
}

// One row per compared method, one column per k, cells "p=..., d=...".
inline std::string comparisons_markdown(const std::vector<PairedComparison>& cs) {
  std::vector<int> ks;
  std::vector<std::string> rows;
  for (const auto& c : cs) {
    if (std::find(ks.begin(), ks.end(), c.k) == ks.end()) ks.push_back(c.k);
    const std::string label = comparison_label(c.method_b);
    if (std::find(rows.begin(), rows.end(), label) == rows.end()) rows.push_back(label);
  }
  std::sort(ks.begin(), ks.end());
  std::sort(rows.begin(), rows.end());
  std::ostringstream os;
  os << "| Method |";
  for (int k : ks) os << " Top-" << k << "% |";
  os << "\n|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& row : rows) {
    os << "| " << row << " |";
    for (int k : ks) {
      std::string cell = "";
      for (const auto& c : cs) {
        if (c.k == k && comparison_label(c.method_b) == row) cell = format_cell(c);
      }
      os << ' ' << cell << " |";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace actif::stats

#endif  // ACTIF_STATS_COMPARE_HPP_
