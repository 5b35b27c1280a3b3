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

#ifndef ACTIF_NN_TRAIN_HPP_
#define ACTIF_NN_TRAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "actif/config_json.hpp"
#include "actif/data/dataset.hpp"
#include "actif/error.hpp"
#include "actif/hash.hpp"
#include "actif/nn/adamw.hpp"
#include "actif/nn/gradients.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/model.hpp"

namespace actif::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 460;  // windows per optimizer step
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double smooth_l1_beta = 1.0;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double validation_fraction = 0.2;  // trailing share of each subject's windows
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (!(smooth_l1_beta > 0.0)) throw ConfigError("smooth_l1_beta must be > 0");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation_fraction must lie in [0, 1)");
    }
  }

  AdamWConfig optimizer() const {
    return AdamWConfig{learning_rate, adam_beta1, adam_beta2, adam_eps, weight_decay};
  }
};

// Hidden widths; the input width comes from the dataset.
struct HiddenDims {
  std::size_t hidden = 32;
  std::size_t penult = 16;
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"patience", c.patience},
                     {"smooth_l1_beta", c.smooth_l1_beta},
                     {"weight_decay", c.weight_decay},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"validation_fraction", c.validation_fraction},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  check_keys(j,
             {"learning_rate", "batch_size", "max_epochs", "patience", "smooth_l1_beta",
              "weight_decay", "adam_beta1", "adam_beta2", "adam_eps", "validation_fraction",
              "seed"},
             "train config");
  c = TrainConfig{};
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.smooth_l1_beta = j.value("smooth_l1_beta", c.smooth_l1_beta);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
  c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json& j, const HiddenDims& h) {
  j = nlohmann::json{{"hidden", h.hidden}, {"penult", h.penult}};
}

inline void from_json(const nlohmann::json& j, HiddenDims& h) {
  check_keys(j, {"hidden", "penult"}, "model dims");
  h = HiddenDims{};
  h.hidden = j.value("hidden", h.hidden);
  h.penult = j.value("penult", h.penult);
}

struct TrainResult {
  LstmRegressor model;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based
  double best_validation_mae = 0.0;
  std::vector<double> train_loss;      // per epoch
  std::vector<double> validation_mae;  // per epoch
};

inline void check_model_matches(const LstmRegressor& model, const data::SequenceDataset& ds) {
  if (model.dims().input != ds.F()) {
    throw ConfigError("model expects F=" + std::to_string(model.dims().input) +
                      " features but dataset has F=" + std::to_string(ds.F()));
  }
}

// Predictions for every sample, in dataset order.
inline std::vector<double> predict_all(const LstmRegressor& model, const data::SequenceDataset& ds,
                                       std::size_t chunk = 256) {
  check_model_matches(model, ds);
  std::vector<double> out;
  out.reserve(ds.N());
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (std::size_t start = 0; start < ds.N(); start += chunk) {
    ptrs.clear();
    for (std::size_t i = start; i < std::min(ds.N(), start + chunk); ++i) {
      ptrs.push_back(&ds.samples[i].x);
    }
    const Eigen::RowVectorXd pred = predict_batch(model, pack_batch(ptrs));
    for (Eigen::Index b = 0; b < pred.size(); ++b) out.push_back(pred(b));
  }
  return out;
}

inline double predict_mae(const LstmRegressor& model, const data::SequenceDataset& ds) {
  if (ds.empty()) throw DataError("cannot compute MAE of an empty dataset");
  const std::vector<double> pred = predict_all(model, ds);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - ds.samples[i].target);
  return sum / static_cast<double>(pred.size());
}

// Chronological split: the trailing `fraction` of each subject's windows
// (in dataset order) is held out for early stopping.
inline std::pair<data::SequenceDataset, data::SequenceDataset> chronological_split(
    const data::SequenceDataset& ds, double fraction) {
  std::map<std::string, std::size_t> total;
  for (const auto& s : ds.samples) ++total[s.subject];
  std::map<std::string, std::size_t> seen;
  data::SequenceDataset train = ds.filtered([](const data::Sample&) { return false; });
  data::SequenceDataset val = train;
  for (const auto& s : ds.samples) {
    const std::size_t n = total[s.subject];
    const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    const std::size_t pos = seen[s.subject]++;
    (pos >= n - n_val ? val : train).samples.push_back(s);
  }
  return {std::move(train), std::move(val)};
}

// Mini-batch AdamW on mean smooth-L1 loss with early stopping on validation
// MAE. Returns the snapshot with the lowest validation MAE. If the
// validation split is empty the training MAE is monitored instead.
inline TrainResult train(const data::SequenceDataset& ds, const HiddenDims& hidden,
                         const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  auto [train_set, val_set] = chronological_split(ds, cfg.validation_fraction);
  if (train_set.empty()) throw DataError("training split is empty");
  const data::SequenceDataset& monitor = val_set.empty() ? train_set : val_set;

  const ModelDims dims{ds.F(), hidden.hidden, hidden.penult};
  LstmRegressor model = LstmRegressor::initialized(dims, mix_seed(cfg.seed, 1));
  AdamWState state = AdamWState::for_model(model);
  const AdamWConfig opt = cfg.optimizer();
  std::mt19937_64 rng(mix_seed(cfg.seed, 2));

  TrainResult result{model, 0, 0, std::numeric_limits<double>::infinity(), {}, {}};
  std::vector<std::size_t> order(train_set.N());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t since_best = 0;
  Batch batch;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.inputs.clear();
      batch.targets.clear();
      for (std::size_t j = start; j < end; ++j) {
        batch.inputs.push_back(&train_set.samples[order[j]].x);
        batch.targets.push_back(train_set.samples[order[j]].target);
      }
      GradientBundle g = backward(model, batch, cfg.smooth_l1_beta);
      loss_sum += g.loss * static_cast<double>(end - start);
      adamw_step(model, g.params, state, opt);
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    const double mae = predict_mae(model, monitor);
    result.validation_mae.push_back(mae);
    result.epochs_run = epoch;
    if (mae < result.best_validation_mae) {
      result.best_validation_mae = mae;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace actif::nn

#endif  // ACTIF_NN_TRAIN_HPP_
