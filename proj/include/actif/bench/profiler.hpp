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

#ifndef ACTIF_BENCH_PROFILER_HPP_
#define ACTIF_BENCH_PROFILER_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "actif/attribution/attributor.hpp"
#include "actif/bench/allocation.hpp"
#include "actif/error.hpp"

namespace actif::bench {

struct Environment {
  std::string cpu_model;
  unsigned cores = 0;

  bool operator==(const Environment&) const = default;
};

inline Environment environment() {
  Environment env;
  env.cores = std::thread::hardware_concurrency();
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        env.cpu_model = line.substr(line.find_first_not_of(" \t", colon + 1));
      }
      break;
    }
  }
  if (env.cpu_model.empty()) env.cpu_model = "unknown";
  return env;
}

struct BenchResult {
  std::string method_tag;
  std::vector<double> seconds;
  double median_s = 0.0;
  double mean_s = 0.0;
  std::optional<std::int64_t> peak_bytes;  // empty without the allocation hook
  std::size_t runs = 0;
  Environment env;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw DataError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Runs `warmup` discarded calls, then `runs` timed calls. With the allocation
// hook installed, the reported peak is the largest per-run high-water mark.
template <class Job>
BenchResult time_method(std::string method_tag, Job&& job, std::size_t runs,
                        std::size_t warmup = 2) {
  if (runs < 1) throw ConfigError("bench runs must be >= 1");
  for (std::size_t i = 0; i < warmup; ++i) job();
  BenchResult r;
  r.method_tag = std::move(method_tag);
  r.env = environment();
  const bool track = allocation_hook_installed();
  std::int64_t peak = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    if (track) {
      peak = std::max(peak, peak_allocation(job));
    } else {
      job();
    }
    const auto stop = std::chrono::steady_clock::now();
    r.seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  r.runs = runs;
  r.median_s = median(r.seconds);
  r.mean_s = std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) /
             static_cast<double>(runs);
  if (track) r.peak_bytes = peak;
  return r;
}

inline nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json j{{"method_tag", r.method_tag},
                   {"seconds", r.seconds},
                   {"median_s", r.median_s},
                   {"mean_s", r.mean_s},
                   {"runs", r.runs},
                   {"cpu_model", r.env.cpu_model},
                   {"cores", r.env.cores}};
  j["peak_bytes"] = r.peak_bytes ? nlohmann::json(*r.peak_bytes) : nlohmann::json(nullptr);
  return j;
}

inline BenchResult bench_from_json(const nlohmann::json& j) {
  BenchResult r;
  r.method_tag = j.at("method_tag").get<std::string>();
  r.seconds = j.at("seconds").get<std::vector<double>>();
  r.median_s = j.at("median_s").get<double>();
  r.mean_s = j.at("mean_s").get<double>();
  r.runs = j.at("runs").get<std::size_t>();
  r.env.cpu_model = j.value("cpu_model", std::string("unknown"));
  r.env.cores = j.value("cores", 0u);
  if (j.contains("peak_bytes") && !j["peak_bytes"].is_null()) {
    r.peak_bytes = j["peak_bytes"].get<std::int64_t>();
  }
  return r;
}

namespace detail {
inline std::vector<const BenchResult*> sorted_results(const std::vector<BenchResult>& results) {
  if (results.empty()) throw DataError("efficiency table needs at least one result");
  std::vector<const BenchResult*> rows;
  for (const auto& r : results) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const BenchResult* a, const BenchResult* b) {
    const auto la = attribution::method_label(a->method_tag);
    const auto lb = attribution::method_label(b->method_tag);
    return std::tie(la.family, la.variant) < std::tie(lb.family, lb.variant);
  });
  return rows;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string peak_mb(const BenchResult& r, int digits) {
  return r.peak_bytes ? fixed(static_cast<double>(*r.peak_bytes) / (1024.0 * 1024.0), digits)
                      : "n/a";
}
}  // namespace detail

// CSV: method,variant,mean_s,median_s,peak_mb,runs. Rows sorted by method
// family, then variant.
inline std::string efficiency_csv(const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os << "method,variant,mean_s,median_s,peak_mb,runs\n";
  for (const BenchResult* r : detail::sorted_results(results)) {
    const auto label = attribution::method_label(r->method_tag);
    os << label.family << ',' << label.variant << ',' << detail::fixed(r->mean_s, 6) << ','
       << detail::fixed(r->median_s, 6) << ',' << detail::peak_mb(*r, 3) << ',' << r->runs
       << '\n';
  }
  return os.str();
}

// Markdown table of mean time per call and allocator peak.
inline std::string efficiency_markdown(const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os << "| Method | Baseline | Avg. Exec. Time (s) | Avg. Memory Usage (MB, allocator peak) |\n"
     << "|---|---|---:|---:|\n";
  for (const BenchResult* r : detail::sorted_results(results)) {
    const auto label = attribution::method_label(r->method_tag);
    os << "| " << label.family << " | " << label.variant << " | " << detail::fixed(r->mean_s, 4)
       << " | " << detail::peak_mb(*r, 2) << " |\n";
  }
  return os.str();
}

}  // namespace actif::bench

#endif  // ACTIF_BENCH_PROFILER_HPP_
