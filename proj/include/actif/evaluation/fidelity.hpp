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

#ifndef ACTIF_EVALUATION_FIDELITY_HPP_
#define ACTIF_EVALUATION_FIDELITY_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "actif/attribution/attributor.hpp"
#include "actif/data/dataset.hpp"
#include "actif/data/loocv.hpp"
#include "actif/error.hpp"
#include "actif/evaluation/report.hpp"
#include "actif/evaluation/topk.hpp"
#include "actif/hash.hpp"
#include "actif/nn/train.hpp"

namespace actif::evaluation {

struct FidelityOptions {
  TopKConfig topk;
  nn::TrainConfig train;
  nn::HiddenDims dims;
  std::size_t jobs = 1;  // concurrent (fold, repeat) jobs
};

// A ranking method for the fidelity grid: a tag plus a scorer run on the
// fold's full-feature model and train split. `describe` enters the config hash.
struct MethodSpec {
  using Scorer = std::function<attribution::FeatureScores(
      const nn::LstmRegressor&, const data::SequenceDataset& train, std::uint64_t seed)>;
  std::string tag;
  Scorer score;
  nlohmann::json describe;
  std::uint64_t seed = 0;
};

inline MethodSpec method_spec(const attribution::AttributionConfig& cfg) {
  MethodSpec spec;
  spec.tag = cfg.method;
  spec.seed = cfg.seed;
  spec.describe = cfg;
  spec.score = [cfg](const nn::LstmRegressor& model, const data::SequenceDataset& train,
                     std::uint64_t seed) {
    attribution::AttributionConfig c = cfg;
    c.seed = seed;
    return attribution::attribute(model, train, c, &train);
  };
  return spec;
}

// Seed streams derived from (base seed, fold, repeat). The k slot of the
// full-feature model is 0; subset models use k itself (1..100).
inline std::uint64_t model_seed(std::uint64_t base, std::size_t fold, std::size_t repeat, int k) {
  return mix_seed(base, fold, repeat, static_cast<std::uint64_t>(k));
}

inline std::uint64_t attribution_seed(std::uint64_t method_seed, std::size_t fold,
                                      std::size_t repeat) {
  return mix_seed(method_seed, fold, repeat, 0x617474ULL);
}

// Hash of everything that determines a fidelity run besides the data.
inline std::string config_hash(const std::vector<MethodSpec>& methods,
                               const FidelityOptions& opts) {
  nlohmann::json j;
  j["topk"] = opts.topk;
  j["train"] = opts.train;
  j["dims"] = opts.dims;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : methods) j["methods"].push_back({{"tag", m.tag}, {"config", m.describe}});
  Fnv1a h;
  h.update(j.dump());
  return h.hex();
}

namespace detail {

struct JobResult {
  BaselineCell baseline;
  std::vector<EvalCell> cells;
  std::vector<RankingRecord> rankings;
};

inline std::string describe(const std::exception& e) { return e.what(); }

inline JobResult run_fold_repeat(const std::vector<MethodSpec>& methods,
                                 const data::Fold& fold, std::size_t fold_index,
                                 std::size_t repeat, const FidelityOptions& opts,
                                 const std::string& train_fingerprint) {
  JobResult out;
  out.baseline.fold = fold.subject;
  out.baseline.repeat = repeat;

  const auto mark_all_failed = [&](const std::string& method, const std::string& why) {
    for (int k : opts.topk.k_percents) {
      EvalCell c;
      c.method = method;
      c.k = k;
      c.fold = fold.subject;
      c.repeat = repeat;
      c.error = why;
      out.cells.push_back(std::move(c));
    }
  };

  std::optional<nn::LstmRegressor> full;
  try {
    nn::TrainConfig tc = opts.train;
    tc.seed = model_seed(opts.topk.seed, fold_index, repeat, 0);
    full = nn::train(fold.train, opts.dims, tc).model;
    out.baseline.mae = nn::predict_mae(*full, fold.test);
  } catch (const std::exception& e) {
    out.baseline.error = "full-feature training failed: " + describe(e);
    for (const auto& m : methods) mark_all_failed(m.tag, out.baseline.error);
    return out;
  }

  // Subset models depend only on (k, feature set); methods that pick the same
  // set share one retrained model.
  std::map<std::pair<int, std::vector<std::size_t>>, std::pair<std::optional<double>, std::string>>
      cache;
  for (const auto& method : methods) {
    attribution::FeatureScores scores;
    try {
      scores = method.score(*full, fold.train, attribution_seed(method.seed, fold_index, repeat));
      if (scores.F() != fold.train.F()) {
        throw ConfigError("scorer returned " + std::to_string(scores.F()) + " scores for F=" +
                          std::to_string(fold.train.F()));
      }
    } catch (const std::exception& e) {
      mark_all_failed(method.tag, "attribution failed: " + describe(e));
      continue;
    }
    out.rankings.push_back({method.tag, fold.subject, repeat, train_fingerprint, scores.ranking});
    for (int k : opts.topk.k_percents) {
      EvalCell cell;
      cell.method = method.tag;
      cell.k = k;
      cell.fold = fold.subject;
      cell.repeat = repeat;
      cell.features = select_top_k(scores, k);
      std::vector<std::size_t> key = cell.features;
      std::sort(key.begin(), key.end());
      auto it = cache.find({k, key});
      if (it == cache.end()) {
        std::pair<std::optional<double>, std::string> result;
        try {
          const data::SequenceDataset train = subset_dataset(fold.train, key);
          const data::SequenceDataset test = subset_dataset(fold.test, key);
          nn::TrainConfig tc = opts.train;
          tc.seed = model_seed(opts.topk.seed, fold_index, repeat, k);
          const nn::LstmRegressor model = nn::train(train, opts.dims, tc).model;
          result.first = nn::predict_mae(model, test);
        } catch (const std::exception& e) {
          result.second = "retraining failed: " + describe(e);
        }
        it = cache.emplace(std::make_pair(k, key), std::move(result)).first;
      }
      cell.mae = it->second.first;
      cell.error = it->second.second;
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace detail

// Retrain-and-score fidelity grid under leave-one-subject-out. For every
// (fold, repeat): train a full-feature model on the fold's train split, score
// features with each method on that split only, then retrain on the top-k
// subsets and record test MAE. Seeds depend on (fold, repeat, k) only, so all
// methods see identical splits and seeds. A failing cell is recorded and the
// run continues. Results are merged in (fold, repeat, method, k) order
// regardless of `jobs`.
inline EvalReport fidelity_eval(const std::vector<MethodSpec>& methods,
                                const data::SequenceDataset& ds, const FidelityOptions& opts) {
  opts.topk.validate();
  opts.train.validate();
  if (methods.empty()) throw ConfigError("fidelity evaluation needs at least one method");
  std::set<std::string> tags;
  for (const auto& m : methods) {
    if (!m.score) throw ConfigError("method '" + m.tag + "' has no scorer");
    if (!tags.insert(m.tag).second) {
      throw ConfigError("method '" + m.tag + "' listed more than once");
    }
  }
  ds.validate();
  const std::vector<data::Fold> folds = data::loocv_splits(ds);

  EvalReport report;
  report.meta.seed = opts.topk.seed;
  report.meta.config_hash = config_hash(methods, opts);
  report.meta.dataset_fingerprint = data::fingerprint(ds);
  report.meta.k_percents = opts.topk.k_percents;
  report.meta.repeats = opts.topk.repeats;
  for (const auto& m : methods) report.meta.methods.push_back(m.tag);
  for (const auto& f : folds) {
    report.meta.folds.push_back(f.subject);
    report.folds.push_back({f.subject, data::fingerprint(f.train), data::fingerprint(f.test)});
  }

  const std::size_t n_jobs = folds.size() * opts.topk.repeats;
  std::vector<detail::JobResult> results(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1)) {
      const std::size_t f = j / opts.topk.repeats;
      const std::size_t r = j % opts.topk.repeats;
      try {
        results[j] = detail::run_fold_repeat(methods, folds[f], f, r, opts,
                                             report.folds[f].train_fingerprint);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.jobs, n_jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& res : results) {
    report.baseline.push_back(std::move(res.baseline));
    for (auto& c : res.cells) report.cells.push_back(std::move(c));
    for (auto& rk : res.rankings) report.rankings.push_back(std::move(rk));
  }
  // Stable (method, k, fold, repeat) order, independent of scheduling.
  std::map<std::string, std::size_t> method_pos;
  for (std::size_t i = 0; i < methods.size(); ++i) method_pos[methods[i].tag] = i;
  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [&](const EvalCell& a, const EvalCell& b) {
                     return std::make_tuple(method_pos[a.method], a.k, a.fold, a.repeat) <
                            std::make_tuple(method_pos[b.method], b.k, b.fold, b.repeat);
                   });
  std::stable_sort(report.rankings.begin(), report.rankings.end(),
                   [&](const RankingRecord& a, const RankingRecord& b) {
                     return std::make_tuple(method_pos[a.method], a.fold, a.repeat) <
                            std::make_tuple(method_pos[b.method], b.fold, b.repeat);
                   });
  return report;
}

inline EvalReport fidelity_eval(const std::vector<attribution::AttributionConfig>& methods,
                                const data::SequenceDataset& ds, const FidelityOptions& opts) {
  std::vector<MethodSpec> specs;
  for (const auto& m : methods) {
    m.validate(ds.F());
    specs.push_back(method_spec(m));
  }
  return fidelity_eval(specs, ds, opts);
}

// Single-method slice.
inline EvalReport fidelity_eval(const attribution::AttributionConfig& method,
                                const data::SequenceDataset& ds, const FidelityOptions& opts) {
  return fidelity_eval(std::vector<attribution::AttributionConfig>{method}, ds, opts);
}

}  // namespace actif::evaluation

#endif  // ACTIF_EVALUATION_FIDELITY_HPP_
