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

#ifndef ACTIF_ATTRIBUTION_PERTURBATION_HPP_
#define ACTIF_ATTRIBUTION_PERTURBATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "actif/attribution/scores.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"
#include "actif/nn/model.hpp"
#include "actif/nn/train.hpp"

namespace actif::attribution {

// MAE increase when feature f is set to 0 at every timestep of every sample.
// On subject-normalised data 0 is the subject mean. No retraining.
inline FeatureScores ablation_importance(const nn::LstmRegressor& model,
                                         const data::SequenceDataset& ds) {
  const double base = nn::predict_mae(model, ds);
  const auto F = static_cast<Eigen::Index>(ds.F());
  Eigen::VectorXd importance(F);
  data::SequenceDataset ablated = ds;
  for (Eigen::Index f = 0; f < F; ++f) {
    for (std::size_t i = 0; i < ds.N(); ++i) ablated.samples[i].x.col(f).setZero();
    importance(f) = nn::predict_mae(model, ablated) - base;
    for (std::size_t i = 0; i < ds.N(); ++i) ablated.samples[i].x.col(f) = ds.samples[i].x.col(f);
  }
  return make_scores("ablation", ds.feature_names, importance, importance,
                     Eigen::VectorXd::Zero(F), 0.0);
}

// MAE change after giving sample i the feature-f sequence of sample
// permutation[i]. Temporal order inside each sequence is kept.
inline double shuffle_delta_mae(const nn::LstmRegressor& model, const data::SequenceDataset& ds,
                                std::size_t feature, const std::vector<std::size_t>& permutation,
                                double base_mae) {
  if (permutation.size() != ds.N()) throw ConfigError("permutation length must equal N");
  data::SequenceDataset shuffled = ds;
  const auto f = static_cast<Eigen::Index>(feature);
  for (std::size_t i = 0; i < ds.N(); ++i) {
    shuffled.samples[i].x.col(f) = ds.samples[permutation[i]].x.col(f);
  }
  return nn::predict_mae(model, shuffled) - base_mae;
}

// Mean MAE increase over `repeats` seeded whole-sequence permutations per
// feature. sigma holds the sample std of the per-repeat increases.
inline FeatureScores shuffle_importance(const nn::LstmRegressor& model,
                                        const data::SequenceDataset& ds, std::size_t repeats,
                                        std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("shuffle repeats must be >= 1");
  if (ds.N() < 2) throw DataError("shuffle importance needs at least 2 samples");
  const double base = nn::predict_mae(model, ds);
  const auto F = static_cast<Eigen::Index>(ds.F());
  Eigen::VectorXd mean(F), spread(F);
  std::vector<std::size_t> perm(ds.N());
  std::vector<double> deltas(repeats);
  for (Eigen::Index f = 0; f < F; ++f) {
    for (std::size_t r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(f), r));
      std::shuffle(perm.begin(), perm.end(), rng);
      deltas[r] = shuffle_delta_mae(model, ds, static_cast<std::size_t>(f), perm, base);
    }
    const double m = std::accumulate(deltas.begin(), deltas.end(), 0.0) / static_cast<double>(repeats);
    double ss = 0.0;
    for (double d : deltas) ss += (d - m) * (d - m);
    mean(f) = m;
    spread(f) = repeats > 1 ? std::sqrt(ss / static_cast<double>(repeats - 1)) : 0.0;
  }
  return make_scores("shuffle", ds.feature_names, mean, mean, spread, 0.0);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_PERTURBATION_HPP_
