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

#ifndef ACTIF_ATTRIBUTION_DEEPACTIF_HPP_
#define ACTIF_ATTRIBUTION_DEEPACTIF_HPP_

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actif/attribution/scores.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/model.hpp"

namespace actif::attribution {

// Layer whose activations are captured.
enum class Tap { kInput, kLstm, kPenultimate };

inline std::string_view tap_name(Tap tap) {
  switch (tap) {
    case Tap::kInput:
      return "input";
    case Tap::kLstm:
      return "lstm";
    case Tap::kPenultimate:
      return "penultimate";
  }
  return "?";
}

inline Tap parse_tap(std::string_view name) {
  if (name == "input") return Tap::kInput;
  if (name == "lstm") return Tap::kLstm;
  if (name == "penultimate") return Tap::kPenultimate;
  throw ConfigError("unknown tap '" + std::string(name) + "' (expected input, lstm, penultimate)");
}

// Activations of one sample at one tap: T x F (input), T x H (lstm) or
// 1 x P (penultimate).
struct ActivationTrace {
  Tap tap = Tap::kInput;
  Eigen::MatrixXd values;
  std::size_t sample_index = 0;
};

// Forward passes only. Samples are pushed through in chunks.
inline std::vector<ActivationTrace> capture_activations(const nn::LstmRegressor& model,
                                                        const data::SequenceDataset& ds, Tap tap,
                                                        std::size_t chunk = 64) {
  if (model.dims().input != ds.F()) {
    throw ConfigError("model expects F=" + std::to_string(model.dims().input) +
                      " but dataset has F=" + std::to_string(ds.F()));
  }
  std::vector<ActivationTrace> traces;
  traces.reserve(ds.N());
  if (tap == Tap::kInput) {
    for (std::size_t i = 0; i < ds.N(); ++i) traces.push_back({tap, ds.samples[i].x, i});
    return traces;
  }
  const auto H = static_cast<Eigen::Index>(model.dims().hidden);
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (std::size_t start = 0; start < ds.N(); start += chunk) {
    const std::size_t end = std::min(ds.N(), start + chunk);
    ptrs.clear();
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&ds.samples[i].x);
    const bool keep = tap == Tap::kLstm;
    const nn::BatchCache cache = nn::forward_batch(model, nn::pack_batch(ptrs), keep);
    for (std::size_t i = start; i < end; ++i) {
      const auto b = static_cast<Eigen::Index>(i - start);
      ActivationTrace tr{tap, {}, i};
      if (keep) {
        const std::size_t T = cache.gates.size();
        tr.values.resize(static_cast<Eigen::Index>(T), H);
        for (std::size_t t = 0; t < T; ++t) {
          tr.values.row(static_cast<Eigen::Index>(t)) = cache.hidden[t + 1].col(b).transpose();
        }
      } else {
        tr.values = cache.penult.col(b).transpose();
      }
      traces.push_back(std::move(tr));
    }
  }
  return traces;
}

// Connection-proportional projection from hidden units back to input features.
//
// unit_to_feature(h, f) is unit h's absolute input-weight mass on feature f
// (summed over the four gates) divided by its total mass, so every row sums
// to one. penult_to_unit does the same for the penultimate layer over the LSTM
// units. Units without any incoming weight get a uniform row and are listed in
// the corresponding `*_uniform` vector.
struct FeatureMapping {
  Eigen::MatrixXd unit_to_feature;   // H x F
  Eigen::MatrixXd penult_to_unit;    // P x H
  std::vector<std::size_t> lstm_uniform;
  std::vector<std::size_t> penult_uniform;
};

namespace detail {
inline Eigen::MatrixXd row_normalize_abs(const Eigen::MatrixXd& mass,
                                         std::vector<std::size_t>& uniform_rows) {
  Eigen::MatrixXd out = mass.cwiseAbs();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double total = out.row(r).sum();
    if (total > 0.0) {
      out.row(r) /= total;
    } else {
      out.row(r).setConstant(1.0 / static_cast<double>(out.cols()));
      uniform_rows.push_back(static_cast<std::size_t>(r));
    }
  }
  return out;
}
}  // namespace detail

inline FeatureMapping feature_mapping(const nn::LstmRegressor& model) {
  const auto& p = model.params();
  const auto H = static_cast<Eigen::Index>(model.dims().hidden);
  const auto F = static_cast<Eigen::Index>(model.dims().input);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(H, F);
  for (Eigen::Index gate = 0; gate < 4; ++gate) {
    mass += p.input_weights.middleRows(gate * H, H).cwiseAbs();
  }
  FeatureMapping m;
  m.unit_to_feature = detail::row_normalize_abs(mass, m.lstm_uniform);
  m.penult_to_unit = detail::row_normalize_abs(p.penult_weights, m.penult_uniform);
  return m;
}

// Feature-space activations for one trace: T x F for the input and LSTM taps,
// 1 x F for the penultimate tap. All values are non-negative.
inline Eigen::MatrixXd map_to_features(const ActivationTrace& trace, const FeatureMapping& mapping,
                                       Tap tap) {
  if (trace.tap != tap) throw ConfigError("activation trace was captured at a different tap");
  switch (tap) {
    case Tap::kInput:
      return trace.values.cwiseAbs();
    case Tap::kLstm:
      if (trace.values.cols() != mapping.unit_to_feature.rows()) {
        throw ConfigError("LSTM trace width does not match the model's hidden size");
      }
      return trace.values.cwiseAbs() * mapping.unit_to_feature;
    case Tap::kPenultimate:
      if (trace.values.cols() != mapping.penult_to_unit.rows()) {
        throw ConfigError("penultimate trace width does not match the model");
      }
      return trace.values.cwiseAbs() * mapping.penult_to_unit * mapping.unit_to_feature;
  }
  return {};
}

inline Eigen::MatrixXd map_to_features(const ActivationTrace& trace,
                                       const nn::LstmRegressor& model, Tap tap) {
  return map_to_features(trace, feature_mapping(model), tap);
}

inline constexpr double kDefaultEpsilon = 1e-8;

// Inverse-weighted aggregation over the rows of `stacked` (one row per
// sample and timestep): s_f = mu_f / (sigma_f + epsilon) with population std.
inline FeatureScores inv_aggregate(const Eigen::MatrixXd& stacked, double epsilon,
                                   std::string tag = "inv",
                                   std::vector<std::string> names = {}) {
  if (stacked.rows() == 0 || stacked.cols() == 0) {
    throw DataError("inverse-weighted aggregation needs a non-empty activation stack");
  }
  const double n = static_cast<double>(stacked.rows());
  const Eigen::VectorXd mu = stacked.colwise().sum().transpose() / n;
  Eigen::VectorXd sigma(stacked.cols());
  for (Eigen::Index f = 0; f < stacked.cols(); ++f) {
    sigma(f) = std::sqrt((stacked.col(f).array() - mu(f)).square().sum() / n);
  }
  Eigen::VectorXd s = (mu.array() / (sigma.array() + epsilon)).matrix();
  // 0/0 with epsilon = 0 (an all-zero column) scores 0.
  for (Eigen::Index f = 0; f < s.size(); ++f) {
    if (mu(f) == 0.0 && sigma(f) == 0.0) s(f) = 0.0;
  }
  return make_scores(std::move(tag), std::move(names), std::move(s), mu, sigma, epsilon);
}

inline std::string deepactif_tag(Tap tap) { return "deepactif-" + std::string(tap_name(tap)); }

// Activation capture, feature mapping, and inverse-weighted aggregation.
// Uses forward passes only.
inline FeatureScores deepactif(const nn::LstmRegressor& model, const data::SequenceDataset& ds,
                               Tap tap, double epsilon = kDefaultEpsilon) {
  if (ds.empty()) throw DataError("deepactif needs a non-empty dataset");
  const std::vector<ActivationTrace> traces = capture_activations(model, ds, tap);
  const FeatureMapping mapping = feature_mapping(model);
  const Eigen::Index rows_per = tap == Tap::kPenultimate ? 1 : static_cast<Eigen::Index>(ds.T());
  Eigen::MatrixXd stacked(rows_per * static_cast<Eigen::Index>(traces.size()),
                          static_cast<Eigen::Index>(ds.F()));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    stacked.middleRows(static_cast<Eigen::Index>(i) * rows_per, rows_per) =
        map_to_features(traces[i], mapping, tap);
  }
  return inv_aggregate(stacked, epsilon, deepactif_tag(tap), ds.feature_names);
}

}  // namespace actif::attribution

#endif  // ACTIF_ATTRIBUTION_DEEPACTIF_HPP_
