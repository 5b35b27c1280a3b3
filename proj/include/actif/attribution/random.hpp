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

#ifndef ACTIF_ATTRIBUTION_RANDOM_HPP_
#define ACTIF_ATTRIBUTION_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actif/attribution/scores.hpp"
#include "actif/error.hpp"

namespace actif::attribution {

// Null-control ranking: i.i.d. uniform scores from a seeded generator.
inline FeatureScores random_scores(std::size_t F, std::uint64_t seed,
                                   std::vector<std::string> names = {}) {
  if (F < 1) throw ConfigError("random scores need F >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd s(static_cast<Eigen::Index>(F));
  for (Eigen::Index f = 0; f < s.size(); ++f) s(f) = unit(rng);
  return make_scores("random", std::move(names), s, s, Eigen::VectorXd::Zero(s.size()), 0.0);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_RANDOM_HPP_
