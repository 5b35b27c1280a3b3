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

#ifndef ACTIF_ATTRIBUTION_SHAPLEY_HPP_
#define ACTIF_ATTRIBUTION_SHAPLEY_HPP_

#include <algorithm>
#include <bit>
#include <numeric>
#include <span>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "actif/attribution/scores.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/model.hpp"

namespace actif::attribution {

// Largest F for which all 2^F coalitions are enumerated.
inline constexpr std::size_t kMaxEnumerationFeatures = 12;

// A coalition is a bitmask over features; bit f set means feature f keeps its
// observed values, cleared means it is replaced by the background value.
using Coalition = std::uint32_t;

// Builds the masked sequence for a coalition.
inline Eigen::MatrixXd mask_sample(const Eigen::MatrixXd& sample,
                                   const Eigen::RowVectorXd& background, Coalition coalition) {
  Eigen::MatrixXd out = sample;
  for (Eigen::Index f = 0; f < sample.cols(); ++f) {
    if (!(coalition >> f & 1u)) out.col(f).setConstant(background(f));
  }
  return out;
}

// Evaluates v(S) for every coalition through `predict`, a callable taking a
// span of sequence pointers and returning one prediction per sequence.
template <class BatchPredict>
std::vector<double> coalition_values(BatchPredict&& predict, const Eigen::MatrixXd& sample,
                                     const Eigen::RowVectorXd& background,
                                     const std::vector<Coalition>& coalitions,
                                     std::size_t chunk = 256) {
  std::vector<double> values;
  values.reserve(coalitions.size());
  std::vector<Eigen::MatrixXd> masked;
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (std::size_t start = 0; start < coalitions.size(); start += chunk) {
    const std::size_t end = std::min(coalitions.size(), start + chunk);
    masked.clear();
    ptrs.clear();
    for (std::size_t c = start; c < end; ++c) masked.push_back(mask_sample(sample, background, coalitions[c]));
    for (const auto& m : masked) ptrs.push_back(&m);
    const Eigen::RowVectorXd pred = predict(std::span<const Eigen::MatrixXd* const>(ptrs));
    for (Eigen::Index b = 0; b < pred.size(); ++b) values.push_back(pred(b));
  }
  return values;
}

inline auto lstm_predictor(const nn::LstmRegressor& model) {
  return [&model](std::span<const Eigen::MatrixXd* const> xs) {
    return nn::predict_batch(model, nn::pack_batch(xs));
  };
}

namespace detail {
inline void check_shapley_inputs(const Eigen::MatrixXd& sample, const Eigen::RowVectorXd& background) {
  if (sample.cols() != background.size()) {
    throw ConfigError("background has " + std::to_string(background.size()) +
                      " features but the sample has " + std::to_string(sample.cols()));
  }
  if (sample.cols() < 1) throw ConfigError("Shapley values need at least one feature");
}

inline double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}
}  // namespace detail

// Exact Shapley values by enumerating all 2^F coalitions. Refused for
// F > kMaxEnumerationFeatures.
template <class BatchPredict>
Eigen::VectorXd exact_shapley(BatchPredict&& predict, const Eigen::MatrixXd& sample,
                              const Eigen::RowVectorXd& background) {
  detail::check_shapley_inputs(sample, background);
  const auto F = static_cast<std::size_t>(sample.cols());
  if (F > kMaxEnumerationFeatures) {
    throw ConfigError("exact Shapley enumeration refused for F=" + std::to_string(F) +
                      " (limit " + std::to_string(kMaxEnumerationFeatures) + ")");
  }
  const Coalition count = Coalition{1} << F;
  std::vector<Coalition> all(count);
  for (Coalition c = 0; c < count; ++c) all[c] = c;
  const std::vector<double> v = coalition_values(predict, sample, background, all);
  // |S|! (F - |S| - 1)! / F!
  std::vector<double> weight(F);
  for (std::size_t s = 0; s < F; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(F - s)) -
                         std::lgamma(static_cast<double>(F) + 1.0));
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F));
  for (Coalition c = 0; c < count; ++c) {
    const auto size = static_cast<std::size_t>(std::popcount(c));
    for (std::size_t f = 0; f < F; ++f) {
      if (c >> f & 1u) continue;
      phi(static_cast<Eigen::Index>(f)) += weight[size] * (v[c | (Coalition{1} << f)] - v[c]);
    }
  }
  return phi;
}

inline Eigen::VectorXd exact_shapley(const nn::LstmRegressor& model, const Eigen::MatrixXd& sample,
                                     const Eigen::RowVectorXd& background) {
  return exact_shapley(lstm_predictor(model), sample, background);
}

struct KernelShapOptions {
  std::size_t n_coalitions = 2048;
  std::uint64_t seed = 0;
  // Enumerate every proper coalition instead of sampling. Chosen
  // automatically when F <= kMaxEnumerationFeatures and the budget covers
  // all 2^F - 2 proper coalitions.
  bool full_enumeration = false;
};

struct KernelShapResult {
  Eigen::VectorXd phi;
  double base_value = 0.0;  // v(empty)
  double full_value = 0.0;  // v(all features)
  std::size_t evaluations = 0;
  bool enumerated = false;
};

// KernelSHAP: weighted least squares over coalitions with the Shapley kernel
// pi(s) = (F - 1) / (C(F, s) s (F - s)). v(empty) and v(full) enter as exact
// constraints; the efficiency constraint sum(phi) = v(full) - v(empty) is
// imposed by eliminating the last coefficient.
//
// Sampling mode draws coalition sizes with probability proportional to
// pi(s) C(F, s) and members uniformly; repeated draws accumulate weight.
template <class BatchPredict>
KernelShapResult kernel_shap(BatchPredict&& predict, const Eigen::MatrixXd& sample,
                             const Eigen::RowVectorXd& background, const KernelShapOptions& opts) {
  detail::check_shapley_inputs(sample, background);
  const auto F = static_cast<std::size_t>(sample.cols());
  const Coalition full = F >= 32 ? ~Coalition{0} : (Coalition{1} << F) - 1;
  if (F > 31) throw ConfigError("KernelSHAP supports at most 31 features");

  KernelShapResult result;
  {
    const std::vector<double> ends =
        coalition_values(predict, sample, background, std::vector<Coalition>{0, full});
    result.base_value = ends[0];
    result.full_value = ends[1];
  }
  const double delta = result.full_value - result.base_value;
  if (F == 1) {
    result.phi = Eigen::VectorXd::Constant(1, delta);
    result.evaluations = 2;
    return result;
  }

  const bool can_enumerate = F <= kMaxEnumerationFeatures;
  const std::size_t proper = can_enumerate ? (std::size_t{1} << F) - 2 : 0;
  const bool enumerate =
      opts.full_enumeration || (can_enumerate && opts.n_coalitions >= proper);
  if (opts.full_enumeration && !can_enumerate) {
    throw ConfigError("full enumeration needs F <= " + std::to_string(kMaxEnumerationFeatures));
  }
  if (!enumerate && opts.n_coalitions < 2 * F) {
    throw ConfigError("KernelSHAP needs at least 2F = " + std::to_string(2 * F) +
                      " coalitions, got " + std::to_string(opts.n_coalitions));
  }

  std::vector<Coalition> coalitions;
  std::vector<double> weights;
  if (enumerate) {
    for (Coalition c = 1; c < full; ++c) {
      const auto s = static_cast<std::size_t>(std::popcount(c));
      coalitions.push_back(c);
      weights.push_back(static_cast<double>(F - 1) /
                        (std::exp(detail::log_binomial(F, s)) * static_cast<double>(s) *
                         static_cast<double>(F - s)));
    }
  } else {
    std::vector<double> size_mass(F - 1);
    for (std::size_t s = 1; s < F; ++s) {
      size_mass[s - 1] = 1.0 / (static_cast<double>(s) * static_cast<double>(F - s));
    }
    std::mt19937_64 rng(opts.seed);
    std::discrete_distribution<std::size_t> size_dist(size_mass.begin(), size_mass.end());
    std::vector<std::size_t> members(F);
    std::map<Coalition, double> counts;
    for (std::size_t k = 0; k < opts.n_coalitions; ++k) {
      const std::size_t s = size_dist(rng) + 1;
      std::iota(members.begin(), members.end(), std::size_t{0});
      // Partial Fisher-Yates: the first s entries are a uniform s-subset.
      for (std::size_t j = 0; j < s; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, F - 1);
        std::swap(members[j], members[pick(rng)]);
      }
      Coalition c = 0;
      for (std::size_t j = 0; j < s; ++j) c |= Coalition{1} << members[j];
      counts[c] += 1.0;
    }
    for (const auto& [c, w] : counts) {
      coalitions.push_back(c);
      weights.push_back(w);
    }
  }

  const std::vector<double> values = coalition_values(predict, sample, background, coalitions);
  result.evaluations = values.size() + 2;
  result.enumerated = enumerate;

  // Eliminate phi_{F-1} = delta - sum_{j < F-1} phi_j.
  const auto K = static_cast<Eigen::Index>(F - 1);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd row(K);
  for (std::size_t r = 0; r < coalitions.size(); ++r) {
    const Coalition c = coalitions[r];
    const double last = (c >> (F - 1) & 1u) ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < K; ++j) row(j) = ((c >> j & 1u) ? 1.0 : 0.0) - last;
    const double y = values[r] - result.base_value - last * delta;
    normal.noalias() += weights[r] * row * row.transpose();
    rhs.noalias() += weights[r] * y * row;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  qr.setThreshold(1e-12);
  if (qr.rank() < K) {
    throw SolverError("KernelSHAP regression is singular (rank " + std::to_string(qr.rank()) +
                      " < " + std::to_string(K) + "); increase the number of coalitions");
  }
  const Eigen::VectorXd beta = qr.solve(rhs);
  result.phi.resize(static_cast<Eigen::Index>(F));
  result.phi.head(K) = beta;
  result.phi(K) = delta - beta.sum();
  if (!result.phi.allFinite()) throw NumericError("non-finite KernelSHAP solution");
  return result;
}

inline KernelShapResult kernel_shap(const nn::LstmRegressor& model, const Eigen::MatrixXd& sample,
                                    const Eigen::RowVectorXd& background,
                                    const KernelShapOptions& opts) {
  return kernel_shap(lstm_predictor(model), sample, background, opts);
}

// Global KernelSHAP ranking: score_f is the mean |phi_f| over samples, with the
// per-feature means of `reference` (or the dataset itself) as background.
inline FeatureScores kernel_shap_scores(const nn::LstmRegressor& model,
                                        const data::SequenceDataset& ds,
                                        const KernelShapOptions& opts,
                                        const data::SequenceDataset* reference = nullptr) {
  if (ds.empty()) throw DataError("KernelSHAP needs a non-empty dataset");
  const Eigen::RowVectorXd background = data::feature_means(reference ? *reference : ds);
  const auto F = static_cast<Eigen::Index>(ds.F());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(F), sum_sq = Eigen::VectorXd::Zero(F);
  for (std::size_t i = 0; i < ds.N(); ++i) {
    KernelShapOptions o = opts;
    o.seed = mix_seed(opts.seed, i);
    const Eigen::VectorXd mag = kernel_shap(model, ds.samples[i].x, background, o).phi.cwiseAbs();
    sum += mag;
    sum_sq += mag.cwiseProduct(mag);
  }
  const double n = static_cast<double>(ds.N());
  const Eigen::VectorXd mu = sum / n;
  const Eigen::VectorXd sigma = (sum_sq / n - mu.cwiseProduct(mu)).cwiseMax(0.0).cwiseSqrt();
  return make_scores("kernelshap", ds.feature_names, mu, mu, sigma, 0.0);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_SHAPLEY_HPP_
