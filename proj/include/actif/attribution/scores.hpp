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

#ifndef ACTIF_ATTRIBUTION_SCORES_HPP_
#define ACTIF_ATTRIBUTION_SCORES_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "actif/error.hpp"

namespace actif::attribution {

// Global per-feature importances produced by any attribution method.
//
// For the inverse-weighted methods `mu` and `sigma` are the activation mean
// and population std behind each score. Other methods store their own
// location/dispersion summaries there (see each method).
struct FeatureScores {
  std::string method_tag;
  std::vector<std::string> feature_names;
  Eigen::VectorXd scores;
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  double epsilon = 0.0;
  std::vector<std::size_t> ranking;  // descending score, ties by ascending index

  std::size_t F() const { return static_cast<std::size_t>(scores.size()); }

  bool operator==(const FeatureScores& o) const {
    return method_tag == o.method_tag && feature_names == o.feature_names &&
           scores == o.scores && mu == o.mu && sigma == o.sigma && epsilon == o.epsilon &&
           ranking == o.ranking;
  }
};

inline std::vector<std::size_t> rank_descending(const Eigen::VectorXd& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

inline FeatureScores make_scores(std::string tag, std::vector<std::string> names,
                                 Eigen::VectorXd scores, Eigen::VectorXd mu,
                                 Eigen::VectorXd sigma, double epsilon) {
  if (!scores.allFinite()) throw NumericError(tag + ": non-finite feature score");
  if (names.size() != static_cast<std::size_t>(scores.size())) {
    names.clear();
    for (Eigen::Index f = 0; f < scores.size(); ++f) names.push_back("f" + std::to_string(f));
  }
  FeatureScores out;
  out.method_tag = std::move(tag);
  out.feature_names = std::move(names);
  out.ranking = rank_descending(scores);
  out.scores = std::move(scores);
  out.mu = std::move(mu);
  out.sigma = std::move(sigma);
  out.epsilon = epsilon;
  return out;
}

inline nlohmann::json to_json(const FeatureScores& s) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f = 0; f < s.F(); ++f) {
    const auto i = static_cast<Eigen::Index>(f);
    features.push_back({{"name", s.feature_names[f]},
                        {"mu", s.mu(i)},
                        {"sigma", s.sigma(i)},
                        {"score", s.scores(i)}});
  }
  return nlohmann::json{{"method_tag", s.method_tag},
                        {"epsilon", s.epsilon},
                        {"features", std::move(features)},
                        {"ranking", s.ranking}};
}

inline FeatureScores scores_from_json(const nlohmann::json& j) {
  const auto& features = j.at("features");
  const auto F = static_cast<Eigen::Index>(features.size());
  std::vector<std::string> names;
  Eigen::VectorXd scores(F), mu(F), sigma(F);
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto& e = features[static_cast<std::size_t>(f)];
    names.push_back(e.at("name").get<std::string>());
    scores(f) = e.at("score").get<double>();
    mu(f) = e.at("mu").get<double>();
    sigma(f) = e.at("sigma").get<double>();
  }
  FeatureScores out = make_scores(j.at("method_tag").get<std::string>(), std::move(names),
                                  std::move(scores), std::move(mu), std::move(sigma),
                                  j.at("epsilon").get<double>());
  if (j.contains("ranking") && j.at("ranking").get<std::vector<std::size_t>>() != out.ranking) {
    throw ConfigError("scores JSON ranking is inconsistent with the scores");
  }
  return out;
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_SCORES_HPP_
