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

#ifndef ACTIF_ATTRIBUTION_INTEGRATED_GRADIENTS_HPP_
#define ACTIF_ATTRIBUTION_INTEGRATED_GRADIENTS_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actif/attribution/scores.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/model.hpp"

namespace actif::attribution {

// Trapezoidal path integral of a gradient field along the straight line from
// `baseline` to `x`:
//
//   (x - b) * sum_k w_k grad(b + alpha_k (x - b)),   alpha_k = k / steps,
//
// with w_0 = w_steps = 1 / (2 steps) and w_k = 1 / steps otherwise.
// `batch_grad` receives all steps + 1 path points at once and returns one
// gradient per point.
template <class Point, class BatchGrad>
Point integrate_path(const Point& x, const Point& baseline, std::size_t steps,
                     BatchGrad&& batch_grad) {
  if (steps < 1) throw ConfigError("integrated gradients needs steps >= 1");
  if (x.rows() != baseline.rows() || x.cols() != baseline.cols()) {
    throw ConfigError("baseline shape does not match the input");
  }
  const Point delta = x - baseline;
  std::vector<Point> path;
  path.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps);
    path.push_back(baseline + alpha * delta);
  }
  const std::vector<Point> grads = batch_grad(path);
  if (grads.size() != path.size()) throw ConfigError("gradient callback returned wrong count");
  Point avg = Point::Zero(x.rows(), x.cols());
  const double w = 1.0 / static_cast<double>(steps);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double weight = (k == 0 || k == steps) ? 0.5 * w : w;
    avg += weight * grads[k];
  }
  Point attribution = delta.cwiseProduct(avg);
  if (!attribution.allFinite()) throw NumericError("non-finite integrated-gradients attribution");
  return attribution;
}

// Input gradients of the model's prediction for a batch of sequences, from a
// single batched forward and reverse pass.
inline std::vector<Eigen::MatrixXd> prediction_input_gradients(
    const nn::LstmRegressor& model, const std::vector<Eigen::MatrixXd>& xs) {
  std::vector<const Eigen::MatrixXd*> ptrs;
  ptrs.reserve(xs.size());
  for (const auto& x : xs) ptrs.push_back(&x);
  const nn::BatchCache cache = nn::forward_batch(model, nn::pack_batch(ptrs));
  nn::PackedBatch d_inputs;
  const auto B = static_cast<Eigen::Index>(xs.size());
  nn::backward_batch(model, cache, Eigen::RowVectorXd::Ones(B), nullptr, &d_inputs);
  std::vector<Eigen::MatrixXd> out(xs.size(), Eigen::MatrixXd(xs.front().rows(), xs.front().cols()));
  for (std::size_t t = 0; t < d_inputs.size(); ++t) {
    for (Eigen::Index b = 0; b < B; ++b) {
      out[static_cast<std::size_t>(b)].row(static_cast<Eigen::Index>(t)) = d_inputs[t].col(b).transpose();
    }
  }
  for (const auto& g : out) {
    if (!g.allFinite()) throw NumericError("non-finite input gradient in integrated gradients");
  }
  return out;
}

// T x F integrated-gradients attribution of one sample.
inline Eigen::MatrixXd integrated_gradients(const nn::LstmRegressor& model,
                                            const Eigen::MatrixXd& sample,
                                            const Eigen::MatrixXd& baseline, std::size_t steps) {
  return integrate_path(sample, baseline, steps, [&](const std::vector<Eigen::MatrixXd>& path) {
    return prediction_input_gradients(model, path);
  });
}

enum class BaselineKind { kZero, kMean, kRandom };

inline std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kZero:
      return "zero";
    case BaselineKind::kMean:
      return "mean";
    case BaselineKind::kRandom:
      return "random";
  }
  return "?";
}

inline BaselineKind parse_baseline(std::string_view name) {
  if (name == "zero") return BaselineKind::kZero;
  if (name == "mean") return BaselineKind::kMean;
  if (name == "random") return BaselineKind::kRandom;
  throw ConfigError("unknown IG baseline '" + std::string(name) + "' (expected zero, mean, random)");
}

struct IgOptions {
  std::size_t steps = 50;
  std::size_t random_baseline_draws = 5;
  std::uint64_t seed = 0;
};

// Global IG ranking: score_f is the mean of |attribution[t, f]| over every
// sample and timestep; sigma is the population std of those magnitudes.
//
// Baselines: zero sequence; per-feature means of `reference` repeated over T;
// or the average attribution over `random_baseline_draws` standard-normal
// sequences seeded per sample and draw.
inline FeatureScores ig_feature_scores(const nn::LstmRegressor& model,
                                       const data::SequenceDataset& ds, BaselineKind kind,
                                       const IgOptions& opts,
                                       const data::SequenceDataset* reference = nullptr) {
  if (ds.empty()) throw DataError("integrated gradients needs a non-empty dataset");
  if (kind == BaselineKind::kRandom && opts.random_baseline_draws < 1) {
    throw ConfigError("random_baseline_draws must be >= 1");
  }
  const auto T = static_cast<Eigen::Index>(ds.T());
  const auto F = static_cast<Eigen::Index>(ds.F());
  Eigen::MatrixXd mean_baseline;
  if (kind == BaselineKind::kMean) {
    const Eigen::RowVectorXd means = data::feature_means(reference ? *reference : ds);
    mean_baseline = means.replicate(T, 1);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(F);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(F);
  for (std::size_t i = 0; i < ds.N(); ++i) {
    const Eigen::MatrixXd& x = ds.samples[i].x;
    Eigen::MatrixXd attr;
    switch (kind) {
      case BaselineKind::kZero:
        attr = integrated_gradients(model, x, Eigen::MatrixXd::Zero(T, F), opts.steps);
        break;
      case BaselineKind::kMean:
        attr = integrated_gradients(model, x, mean_baseline, opts.steps);
        break;
      case BaselineKind::kRandom: {
        attr = Eigen::MatrixXd::Zero(T, F);
        for (std::size_t d = 0; d < opts.random_baseline_draws; ++d) {
          std::mt19937_64 rng(mix_seed(opts.seed, i, d));
          std::normal_distribution<double> normal(0.0, 1.0);
          Eigen::MatrixXd baseline(T, F);
          for (Eigen::Index k = 0; k < baseline.size(); ++k) baseline.data()[k] = normal(rng);
          attr += integrated_gradients(model, x, baseline, opts.steps);
        }
        attr /= static_cast<double>(opts.random_baseline_draws);
        break;
      }
    }
    const Eigen::MatrixXd mag = attr.cwiseAbs();
    sum += mag.colwise().sum().transpose();
    sum_sq += mag.array().square().colwise().sum().matrix().transpose();
  }
  const double n = static_cast<double>(ds.N()) * static_cast<double>(T);
  const Eigen::VectorXd mu = sum / n;
  const Eigen::VectorXd sigma =
      (sum_sq / n - mu.cwiseProduct(mu)).cwiseMax(0.0).cwiseSqrt();
  return make_scores("ig-" + std::string(baseline_name(kind)), ds.feature_names, mu, mu, sigma,
                     0.0);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_INTEGRATED_GRADIENTS_HPP_
