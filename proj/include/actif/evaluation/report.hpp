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

#ifndef ACTIF_EVALUATION_REPORT_HPP_
#define ACTIF_EVALUATION_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "actif/attribution/attributor.hpp"
#include "actif/bench/profiler.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"
#include "actif/stats/paired.hpp"

namespace actif::evaluation {

struct ReportMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string dataset_fingerprint;
  std::vector<int> k_percents;
  std::size_t repeats = 0;
  std::vector<std::string> methods;
  std::vector<std::string> folds;  // held-out subject ids, sorted
};

// Fingerprints of one LOOCV fold's splits. Attribution for the fold must see
// exactly `train_fingerprint`.
struct FoldInfo {
  std::string subject;
  std::string train_fingerprint;
  std::string test_fingerprint;
};

// Full-feature model of one (fold, repeat).
struct BaselineCell {
  std::string fold;
  std::size_t repeat = 0;
  std::optional<double> mae;
  std::string error;
};

struct EvalCell {
  std::string method;
  int k = 0;
  std::string fold;
  std::size_t repeat = 0;
  std::vector<std::size_t> features;  // selected, in rank order
  std::optional<double> mae;          // empty: failed
  std::string error;

  bool failed() const { return !mae.has_value(); }
};

// Ranking a method produced for one (fold, repeat), with the fingerprint of
// the data it was computed on.
struct RankingRecord {
  std::string method;
  std::string fold;
  std::size_t repeat = 0;
  std::string attribution_fingerprint;
  std::vector<std::size_t> ranking;
};

struct EvalReport {
  ReportMeta meta;
  std::vector<FoldInfo> folds;
  std::vector<BaselineCell> baseline;
  std::vector<EvalCell> cells;
  std::vector<RankingRecord> rankings;
  std::vector<stats::PairedComparison> comparisons;
  std::vector<bench::BenchResult> bench;  // not part of the canonical form

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.failed() ? 1 : 0;
    for (const auto& b : baseline) n += b.mae ? 0 : 1;
    return n;
  }
};

struct Summary {
  std::string method;
  int k = 0;
  double mean = std::nan("");
  double median = std::nan("");
  double std = std::nan("");  // sample std over folds and repeats
  std::size_t n = 0;          // successful cells
  std::size_t failed = 0;
};

namespace detail {
inline void moments(const std::vector<double>& v, Summary& s) {
  s.n = v.size();
  if (v.empty()) return;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.median = bench::median(v);
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  } else {
    s.std = 0.0;
  }
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}
}  // namespace detail

// Per method and k, over all folds and repeats. Methods in report order.
inline std::vector<Summary> summarize(const EvalReport& r) {
  std::vector<Summary> out;
  for (const auto& m : r.meta.methods) {
    for (int k : r.meta.k_percents) {
      Summary s;
      s.method = m;
      s.k = k;
      std::vector<double> values;
      for (const auto& c : r.cells) {
        if (c.method != m || c.k != k) continue;
        if (c.mae) {
          values.push_back(*c.mae);
        } else {
          ++s.failed;
        }
      }
      detail::moments(values, s);
      out.push_back(s);
    }
  }
  return out;
}

inline Summary summarize_baseline(const EvalReport& r) {
  Summary s;
  s.method = "full";
  s.k = 100;
  std::vector<double> values;
  for (const auto& b : r.baseline) {
    if (b.mae) {
      values.push_back(*b.mae);
    } else {
      ++s.failed;
    }
  }
  detail::moments(values, s);
  return s;
}

// Mean MAE over repeats for each fold, in meta.folds order. Folds without a
// successful cell are returned as NaN.
inline std::vector<double> fold_means(const EvalReport& r, const std::string& method, int k) {
  std::vector<double> out;
  for (const auto& fold : r.meta.folds) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : r.cells) {
      if (c.method == method && c.k == k && c.fold == fold && c.mae) {
        sum += *c.mae;
        ++n;
      }
    }
    out.push_back(n > 0 ? sum / static_cast<double>(n) : std::nan(""));
  }
  return out;
}

// ------------------------------------------------------------------ JSON

inline nlohmann::json to_json(const Summary& s) {
  return nlohmann::json{{"method", s.method},
                        {"k", s.k},
                        {"mean", detail::number_or_null(s.mean)},
                        {"median", detail::number_or_null(s.median)},
                        {"std", detail::number_or_null(s.std)},
                        {"n", s.n},
                        {"failed", s.failed}};
}

// Canonical form: a pure function of the inputs (no timings, no clock).
inline nlohmann::json report_to_json(const EvalReport& r, bool canonical = true) {
  nlohmann::json j;
  j["format"] = "actif-eval-report";
  j["version"] = 1;
  j["meta"] = {{"seed", r.meta.seed},
               {"config_hash", r.meta.config_hash},
               {"dataset_fingerprint", r.meta.dataset_fingerprint},
               {"k_percents", r.meta.k_percents},
               {"repeats", r.meta.repeats},
               {"methods", r.meta.methods},
               {"folds", r.meta.folds},
               {"failures", r.failures()}};
  j["fold_info"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    j["fold_info"].push_back({{"subject", f.subject},
                              {"train_fingerprint", f.train_fingerprint},
                              {"test_fingerprint", f.test_fingerprint}});
  }
  j["baseline"] = nlohmann::json::array();
  for (const auto& b : r.baseline) {
    nlohmann::json cell{{"fold", b.fold}, {"repeat", b.repeat}, {"mae", detail::optional_number(b.mae)}};
    if (!b.error.empty()) cell["error"] = b.error;
    j["baseline"].push_back(cell);
  }
  j["grid"] = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cell{{"method", c.method},     {"k", c.k},
                        {"fold", c.fold},         {"repeat", c.repeat},
                        {"features", c.features}, {"mae", detail::optional_number(c.mae)}};
    if (!c.error.empty()) cell["error"] = c.error;
    j["grid"].push_back(cell);
  }
  j["rankings"] = nlohmann::json::array();
  for (const auto& rk : r.rankings) {
    j["rankings"].push_back({{"method", rk.method},
                             {"fold", rk.fold},
                             {"repeat", rk.repeat},
                             {"attribution_fingerprint", rk.attribution_fingerprint},
                             {"ranking", rk.ranking}});
  }
  j["summary"] = nlohmann::json::array();
  j["summary"].push_back(to_json(summarize_baseline(r)));
  for (const auto& s : summarize(r)) j["summary"].push_back(to_json(s));
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : r.comparisons) j["comparisons"].push_back(stats::to_json(c));
  if (!canonical) {
    j["bench"] = nlohmann::json::array();
    for (const auto& b : r.bench) j["bench"].push_back(bench::to_json(b));
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "actif-eval-report") {
    throw DataError("not an actif evaluation report");
  }
  EvalReport r;
  const auto& m = j.at("meta");
  r.meta.seed = m.at("seed").get<std::uint64_t>();
  r.meta.config_hash = m.at("config_hash").get<std::string>();
  r.meta.dataset_fingerprint = m.at("dataset_fingerprint").get<std::string>();
  r.meta.k_percents = m.at("k_percents").get<std::vector<int>>();
  r.meta.repeats = m.at("repeats").get<std::size_t>();
  r.meta.methods = m.at("methods").get<std::vector<std::string>>();
  r.meta.folds = m.at("folds").get<std::vector<std::string>>();
  for (const auto& f : j.at("fold_info")) {
    r.folds.push_back({f.at("subject").get<std::string>(),
                       f.at("train_fingerprint").get<std::string>(),
                       f.at("test_fingerprint").get<std::string>()});
  }
  for (const auto& b : j.at("baseline")) {
    r.baseline.push_back({b.at("fold").get<std::string>(), b.at("repeat").get<std::size_t>(),
                          detail::read_optional(b, "mae"), b.value("error", std::string())});
  }
  for (const auto& c : j.at("grid")) {
    EvalCell cell;
    cell.method = c.at("method").get<std::string>();
    cell.k = c.at("k").get<int>();
    cell.fold = c.at("fold").get<std::string>();
    cell.repeat = c.at("repeat").get<std::size_t>();
    cell.features = c.at("features").get<std::vector<std::size_t>>();
    cell.mae = detail::read_optional(c, "mae");
    cell.error = c.value("error", std::string());
    r.cells.push_back(std::move(cell));
  }
  for (const auto& rk : j.at("rankings")) {
    r.rankings.push_back({rk.at("method").get<std::string>(), rk.at("fold").get<std::string>(),
                          rk.at("repeat").get<std::size_t>(),
                          rk.at("attribution_fingerprint").get<std::string>(),
                          rk.at("ranking").get<std::vector<std::size_t>>()});
  }
  for (const auto& c : j.at("comparisons")) r.comparisons.push_back(stats::comparison_from_json(c));
  if (j.contains("bench")) {
    for (const auto& b : j.at("bench")) r.bench.push_back(bench::bench_from_json(b));
  }
  return r;
}

// --------------------------------------------------------------- assembly

// Merges fidelity slices, attaching benchmark and statistics results. Slices
// must agree on dataset, seed, k grid, repeats and folds; no grid cell may
// appear twice.
inline EvalReport assemble_report(const std::vector<EvalReport>& slices,
                                  std::vector<bench::BenchResult> bench_results = {},
                                  std::vector<stats::PairedComparison> comparisons = {}) {
  if (slices.empty()) throw ConfigError("assemble_report needs at least one slice");
  EvalReport out;
  out.meta = slices.front().meta;
  out.meta.methods.clear();
  out.folds = slices.front().folds;
  std::set<std::tuple<std::string, int, std::string, std::size_t>> seen;
  std::map<std::pair<std::string, std::size_t>, std::optional<double>> baseline_seen;
  std::vector<std::string> hashes;
  for (const auto& s : slices) {
    const ReportMeta& m = s.meta;
    if (m.dataset_fingerprint != out.meta.dataset_fingerprint) {
      throw IntegrityError("dataset fingerprint mismatch between report slices: " +
                           out.meta.dataset_fingerprint + " vs " + m.dataset_fingerprint);
    }
    if (m.seed != out.meta.seed || m.k_percents != out.meta.k_percents ||
        m.repeats != out.meta.repeats || m.folds != out.meta.folds) {
      throw IntegrityError("report slices disagree on seed, k grid, repeats or folds");
    }
    hashes.push_back(m.config_hash);
    for (const auto& method : m.methods) {
      if (std::find(out.meta.methods.begin(), out.meta.methods.end(), method) ==
          out.meta.methods.end()) {
        out.meta.methods.push_back(method);
      }
    }
    for (const auto& c : s.cells) {
      if (!seen.insert({c.method, c.k, c.fold, c.repeat}).second) {
        throw IntegrityError("grid cell (" + c.method + ", k=" + std::to_string(c.k) + ", " +
                             c.fold + ", repeat " + std::to_string(c.repeat) +
                             ") appears in more than one slice");
      }
      out.cells.push_back(c);
    }
    for (const auto& b : s.baseline) {
      const auto key = std::make_pair(b.fold, b.repeat);
      auto it = baseline_seen.find(key);
      if (it == baseline_seen.end()) {
        baseline_seen.emplace(key, b.mae);
        out.baseline.push_back(b);
      } else if (it->second != b.mae) {
        throw IntegrityError("full-feature MAE for fold " + b.fold + " repeat " +
                             std::to_string(b.repeat) + " differs between slices");
      }
    }
    out.rankings.insert(out.rankings.end(), s.rankings.begin(), s.rankings.end());
    out.comparisons.insert(out.comparisons.end(), s.comparisons.begin(), s.comparisons.end());
    out.bench.insert(out.bench.end(), s.bench.begin(), s.bench.end());
  }
  if (slices.size() > 1) {
    Fnv1a h;
    for (const auto& x : hashes) h.update(x);
    out.meta.config_hash = h.hex();
  }
  std::sort(out.baseline.begin(), out.baseline.end(), [](const auto& a, const auto& b) {
    return std::tie(a.fold, a.repeat) < std::tie(b.fold, b.repeat);
  });
  out.bench.insert(out.bench.end(), bench_results.begin(), bench_results.end());
  out.comparisons.insert(out.comparisons.end(), comparisons.begin(), comparisons.end());
  return out;
}

// ---------------------------------------------------------------- tables

namespace detail {
inline std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string shortest(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Report methods ordered by display family, then variant.
inline std::vector<std::string> display_order(const std::vector<std::string>& methods) {
  std::vector<std::string> out = methods;
  std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    const auto la = attribution::method_label(a);
    const auto lb = attribution::method_label(b);
    return std::tie(la.family, la.variant) < std::tie(lb.family, lb.variant);
  });
  return out;
}
}  // namespace detail

// Flat grid: method,k,fold,repeat,mae. Full-feature models appear as method
// "full" with k = 100; failed cells have an empty mae.
inline std::string grid_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "method,k,fold,repeat,mae\n";
  for (const auto& b : r.baseline) {
    os << "full,100," << b.fold << ',' << b.repeat << ','
       << (b.mae ? detail::shortest(*b.mae) : "") << '\n';
  }
  for (const auto& c : r.cells) {
    os << c.method << ',' << c.k << ',' << c.fold << ',' << c.repeat << ','
       << (c.mae ? detail::shortest(*c.mae) : "") << '\n';
  }
  return os.str();
}

// Per-fold MAE averaged over repeats: method,k,fold,mae.
inline std::string fold_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "method,k,fold,mae\n";
  for (const auto& m : r.meta.methods) {
    for (int k : r.meta.k_percents) {
      const std::vector<double> means = fold_means(r, m, k);
      for (std::size_t i = 0; i < means.size(); ++i) {
        os << m << ',' << k << ',' << r.meta.folds[i] << ','
           << (std::isfinite(means[i]) ? detail::shortest(means[i]) : "") << '\n';
      }
    }
  }
  return os.str();
}

// Mean MAE per method and k in the family / variant layout.
inline std::string summary_markdown(const EvalReport& r) {
  const std::vector<Summary> all = summarize(r);
  std::ostringstream os;
  os << "| Method | Baseline |";
  for (int k : r.meta.k_percents) os << ' ' << k << "% MAE |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < r.meta.k_percents.size(); ++i) os << "---:|";
  os << '\n';
  for (const auto& m : detail::display_order(r.meta.methods)) {
    const auto label = attribution::method_label(m);
    os << "| " << label.family << " | " << label.variant << " |";
    for (int k : r.meta.k_percents) {
      for (const auto& s : all) {
        if (s.method == m && s.k == k) {
          os << ' ' << detail::fixed(s.mean, 4) << (s.failed > 0 ? "*" : "") << " |";
        }
      }
    }
    os << '\n';
  }
  const Summary full = summarize_baseline(r);
  os << "\nAll features: mean MAE " << detail::fixed(full.mean, 4) << " over " << full.n
     << " models.";
  if (r.failures() > 0) os << " Cells marked * include failed runs (" << r.failures() << " total).";
  os << '\n';
  return os.str();
}

}  // namespace actif::evaluation

#endif  // ACTIF_EVALUATION_REPORT_HPP_
