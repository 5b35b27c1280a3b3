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

#ifndef ACTIF_NN_LSTM_HPP_
#define ACTIF_NN_LSTM_HPP_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actif/error.hpp"
#include "actif/nn/model.hpp"

namespace actif::nn {

// Counts calls into the reverse pass. Attribution methods that promise to be
// forward-only are checked against this counter.
inline std::atomic<std::uint64_t> backward_invocations{0};

// Result of running one sequence through the network.
struct ForwardTrace {
  Eigen::MatrixXd hidden;  // T x H, post-nonlinearity h_t
  Eigen::VectorXd penult;  // P, post-tanh
  double prediction = 0.0;
};

// Time-major batch: element t is an F x B matrix holding timestep t of every
// sequence in the batch.
using PackedBatch = std::vector<Eigen::MatrixXd>;

inline PackedBatch pack_batch(std::span<const Eigen::MatrixXd* const> sequences) {
  if (sequences.empty()) return {};
  const Eigen::Index T = sequences.front()->rows();
  const Eigen::Index F = sequences.front()->cols();
  const auto B = static_cast<Eigen::Index>(sequences.size());
  PackedBatch packed(static_cast<std::size_t>(T), Eigen::MatrixXd(F, B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const Eigen::MatrixXd& x = *sequences[static_cast<std::size_t>(b)];
    if (x.rows() != T || x.cols() != F) {
      throw ConfigError("batch sequences have inconsistent shapes");
    }
    for (Eigen::Index t = 0; t < T; ++t) packed[static_cast<std::size_t>(t)].col(b) = x.row(t).transpose();
  }
  return packed;
}

inline PackedBatch pack_batch(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd* one = &x;
  return pack_batch(std::span<const Eigen::MatrixXd* const>(&one, 1));
}

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline void check_input(const LstmRegressor& model, const PackedBatch& batch) {
  if (batch.empty()) throw ConfigError("sequence must have at least one timestep");
  const auto F = static_cast<Eigen::Index>(model.dims().input);
  for (const auto& xt : batch) {
    if (xt.rows() != F) {
      throw ConfigError("input has " + std::to_string(xt.rows()) + " features but model expects " +
                        std::to_string(F));
    }
  }
}

}  // namespace detail

// Everything the reverse pass needs from a batched forward pass.
struct BatchCache {
  PackedBatch inputs;                  // T of F x B
  std::vector<Eigen::MatrixXd> gates;  // T of 4H x B, post-activation
  std::vector<Eigen::MatrixXd> cells;  // T+1 of H x B, cells[0] = c_0
  std::vector<Eigen::MatrixXd> hidden; // T+1 of H x B, hidden[0] = h_0
  Eigen::MatrixXd penult;              // P x B, post-tanh
  Eigen::RowVectorXd prediction;       // B
};

// Batched forward pass. When `keep` is false only the final states are
// retained, which is what prediction-only callers need.
inline BatchCache forward_batch(const LstmRegressor& model, PackedBatch batch, bool keep = true) {
  detail::check_input(model, batch);
  const auto& p = model.params();
  const auto H = static_cast<Eigen::Index>(model.dims().hidden);
  const Eigen::Index B = batch.front().cols();
  const std::size_t T = batch.size();

  BatchCache cache;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(H, B);
  if (keep) {
    cache.gates.reserve(T);
    cache.cells.reserve(T + 1);
    cache.hidden.reserve(T + 1);
    cache.cells.push_back(c);
    cache.hidden.push_back(h);
  }
  Eigen::MatrixXd z(4 * H, B);
  for (std::size_t t = 0; t < T; ++t) {
    z.noalias() = p.input_weights * batch[t];
    z.noalias() += p.recurrent_weights * h;
    z.colwise() += p.gate_bias;
    auto i = z.middleRows(kInputGate * H, H);
    auto f = z.middleRows(kForgetGate * H, H);
    auto g = z.middleRows(kCellGate * H, H);
    auto o = z.middleRows(kOutputGate * H, H);
    i = i.unaryExpr(&detail::sigmoid);
    f = f.unaryExpr(&detail::sigmoid);
    g = g.array().tanh().matrix();
    o = o.unaryExpr(&detail::sigmoid);
    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    h = (o.array() * c.array().tanh()).matrix();
    if (keep) {
      cache.gates.push_back(z);
      cache.cells.push_back(c);
      cache.hidden.push_back(h);
    }
  }
  cache.penult = ((p.penult_weights * h).colwise() + p.penult_bias).array().tanh().matrix();
  cache.prediction = (p.output_weights.transpose() * cache.penult).array() + p.output_bias;
  if (!cache.prediction.allFinite()) throw NumericError("non-finite prediction in forward pass");
  if (keep) {
    cache.inputs = std::move(batch);
  } else {
    cache.hidden.push_back(std::move(h));
  }
  return cache;
}

// Predictions for a batch of sequences, forward pass only.
inline Eigen::RowVectorXd predict_batch(const LstmRegressor& model, PackedBatch batch) {
  return forward_batch(model, std::move(batch), /*keep=*/false).prediction;
}

inline double predict(const LstmRegressor& model, const Eigen::MatrixXd& x) {
  return predict_batch(model, pack_batch(x))(0);
}

// Single-sequence forward pass exposing the hidden-state and penultimate taps.
inline ForwardTrace lstm_forward(const LstmRegressor& model, const Eigen::MatrixXd& x) {
  if (!x.allFinite()) throw NumericError("non-finite value in input sequence");
  BatchCache cache = forward_batch(model, pack_batch(x));
  const auto H = static_cast<Eigen::Index>(model.dims().hidden);
  ForwardTrace trace;
  trace.hidden.resize(x.rows(), H);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    trace.hidden.row(t) = cache.hidden[static_cast<std::size_t>(t) + 1].col(0).transpose();
  }
  trace.penult = cache.penult.col(0);
  trace.prediction = cache.prediction(0);
  return trace;
}

// Reverse pass through a cached forward pass. `d_prediction` holds dL/dy for
// each batch column. Parameter gradients are accumulated into `grads` when it
// is non-null; per-timestep input gradients (T of F x B) are written to
// `d_inputs` when it is non-null.
inline void backward_batch(const LstmRegressor& model, const BatchCache& cache,
                           const Eigen::RowVectorXd& d_prediction, LstmParameters* grads,
                           PackedBatch* d_inputs) {
  backward_invocations.fetch_add(1, std::memory_order_relaxed);
  const auto& p = model.params();
  const auto H = static_cast<Eigen::Index>(model.dims().hidden);
  const std::size_t T = cache.gates.size();
  if (T == 0 || cache.inputs.size() != T) {
    throw ConfigError("backward pass needs a forward cache with stored activations");
  }

  // Head: y = w_out . pen + b_out, pen = tanh(W_pen h_T + b_pen).
  Eigen::MatrixXd d_pen = p.output_weights * d_prediction;  // P x B
  Eigen::MatrixXd d_pen_pre =
      (d_pen.array() * (1.0 - cache.penult.array().square())).matrix();
  if (grads) {
    grads->output_weights.noalias() += cache.penult * d_prediction.transpose();
    grads->output_bias += d_prediction.sum();
    grads->penult_weights.noalias() += d_pen_pre * cache.hidden[T].transpose();
    grads->penult_bias += d_pen_pre.rowwise().sum();
  }
  Eigen::MatrixXd dh = p.penult_weights.transpose() * d_pen_pre;  // H x B
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(dh.rows(), dh.cols());
  Eigen::MatrixXd dz(4 * H, dh.cols());
  if (d_inputs) d_inputs->assign(T, Eigen::MatrixXd());

  for (std::size_t step = T; step-- > 0;) {
    const Eigen::MatrixXd& gate = cache.gates[step];
    const auto i = gate.middleRows(kInputGate * H, H).array();
    const auto f = gate.middleRows(kForgetGate * H, H).array();
    const auto g = gate.middleRows(kCellGate * H, H).array();
    const auto o = gate.middleRows(kOutputGate * H, H).array();
    const Eigen::ArrayXXd tanh_c = cache.cells[step + 1].array().tanh();
    const auto c_prev = cache.cells[step].array();

    const Eigen::ArrayXXd d_o = dh.array() * tanh_c;
    dc.array() += dh.array() * o * (1.0 - tanh_c.square());
    dz.middleRows(kInputGate * H, H) = (dc.array() * g * i * (1.0 - i)).matrix();
    dz.middleRows(kForgetGate * H, H) = (dc.array() * c_prev * f * (1.0 - f)).matrix();
    dz.middleRows(kCellGate * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    dz.middleRows(kOutputGate * H, H) = (d_o * o * (1.0 - o)).matrix();
    dc.array() *= f;

    if (grads) {
      grads->input_weights.noalias() += dz * cache.inputs[step].transpose();
      grads->recurrent_weights.noalias() += dz * cache.hidden[step].transpose();
      grads->gate_bias += dz.rowwise().sum();
    }
    if (d_inputs) (*d_inputs)[step].noalias() = p.input_weights.transpose() * dz;
    dh.noalias() = p.recurrent_weights.transpose() * dz;
  }
  if (grads) {
    if (auto bad = first_non_finite(*grads); !bad.empty()) {
      throw NumericError("non-finite gradient in tensor " + std::string(bad));
    }
  }
}

// Gradient of the scalar prediction with respect to every input entry (T x F).
inline Eigen::MatrixXd input_gradient(const LstmRegressor& model, const Eigen::MatrixXd& x) {
  BatchCache cache = forward_batch(model, pack_batch(x));
  PackedBatch d_inputs;
  backward_batch(model, cache, Eigen::RowVectorXd::Ones(1), nullptr, &d_inputs);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    out.row(t) = d_inputs[static_cast<std::size_t>(t)].col(0).transpose();
  }
  if (!out.allFinite()) throw NumericError("non-finite input gradient");
  return out;
}

}  // namespace actif::nn

#endif  // ACTIF_NN_LSTM_HPP_
