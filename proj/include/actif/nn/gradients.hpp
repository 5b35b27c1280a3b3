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

#ifndef ACTIF_NN_GRADIENTS_HPP_
#define ACTIF_NN_GRADIENTS_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "actif/error.hpp"
#include "actif/nn/loss.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/model.hpp"

namespace actif::nn {

// A mini-batch of (sequence, target) pairs. Sequences are borrowed.
struct Batch {
  std::vector<const Eigen::MatrixXd*> inputs;
  std::vector<double> targets;

  std::size_t size() const { return inputs.size(); }
};

struct GradientBundle {
  LstmParameters params;                    // same shapes as the model
  std::vector<Eigen::MatrixXd> input_grads; // per sample, T x F; empty unless requested
  double loss = 0.0;                        // mean smooth-L1 over the batch
};

// Exact reverse-mode gradients of the mean smooth-L1 loss over `batch`.
inline GradientBundle backward(const LstmRegressor& model, const Batch& batch, double beta = 1.0,
                               bool with_inputs = false) {
  if (batch.size() == 0) throw DataError("backward needs a non-empty batch");
  if (batch.targets.size() != batch.inputs.size()) {
    throw ConfigError("batch has mismatched input and target counts");
  }
  const BatchCache cache = forward_batch(model, pack_batch(batch.inputs));
  const auto B = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(B);

  GradientBundle out;
  out.params = LstmParameters::zeros(model.dims());
  Eigen::RowVectorXd d_pred(B);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const double y = batch.targets[static_cast<std::size_t>(b)];
    loss += smooth_l1(cache.prediction(b), y, beta);
    d_pred(b) = smooth_l1_grad(cache.prediction(b), y, beta) * inv_b;
  }
  out.loss = loss * inv_b;

  PackedBatch d_inputs;
  backward_batch(model, cache, d_pred, &out.params, with_inputs ? &d_inputs : nullptr);
  if (with_inputs) {
    const Eigen::Index T = batch.inputs.front()->rows();
    const Eigen::Index F = batch.inputs.front()->cols();
    out.input_grads.assign(batch.size(), Eigen::MatrixXd(T, F));
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index t = 0; t < T; ++t) {
        out.input_grads[static_cast<std::size_t>(b)].row(t) =
            d_inputs[static_cast<std::size_t>(t)].col(b).transpose();
      }
    }
  }
  return out;
}

}  // namespace actif::nn

#endif  // ACTIF_NN_GRADIENTS_HPP_
