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

#ifndef ACTIF_BENCH_WORKLOAD_HPP_
#define ACTIF_BENCH_WORKLOAD_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "actif/attribution/attributor.hpp"
#include "actif/bench/profiler.hpp"
#include "actif/config_json.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/nn/model.hpp"

namespace actif::bench {

struct BenchConfig {
  std::size_t runs = 3;
  std::size_t warmup = 2;
  std::string subject;  // empty: first subject of the dataset
};

inline void to_json(nlohmann::json& j, const BenchConfig& c) {
  j = nlohmann::json{{"runs", c.runs}, {"warmup", c.warmup}, {"subject", c.subject}};
}

inline void from_json(const nlohmann::json& j, BenchConfig& c) {
  check_keys(j, {"runs", "warmup", "subject"}, "bench config");
  c = BenchConfig{};
  c.runs = j.value("runs", c.runs);
  c.warmup = j.value("warmup", c.warmup);
  c.subject = j.value("subject", c.subject);
}

// Windows of one subject: the unit of work timed per method.
inline data::SequenceDataset subject_slice(const data::SequenceDataset& ds,
                                           const std::string& subject) {
  if (ds.empty()) throw DataError("benchmark needs a non-empty dataset");
  const std::string id = subject.empty() ? ds.samples.front().subject : subject;
  data::SequenceDataset out = ds.filtered([&](const data::Sample& s) { return s.subject == id; });
  if (out.empty()) throw ConfigError("benchmark subject '" + id + "' not in the dataset");
  return out;
}

// Times per-subject attribution for each method, one method at a time.
// The whole dataset serves as the reference for baselines and background.
inline std::vector<BenchResult> bench_methods(
    const nn::LstmRegressor& model, const data::SequenceDataset& ds,
    const std::vector<attribution::AttributionConfig>& methods, const BenchConfig& cfg) {
  const data::SequenceDataset slice = subject_slice(ds, cfg.subject);
  for (const auto& m : methods) m.validate(ds.F());
  std::vector<BenchResult> out;
  for (const auto& m : methods) {
    out.push_back(time_method(
        m.method, [&] { attribution::attribute(model, slice, m, &ds); }, cfg.runs, cfg.warmup));
  }
  return out;
}

}  // namespace actif::bench

#endif  // ACTIF_BENCH_WORKLOAD_HPP_
