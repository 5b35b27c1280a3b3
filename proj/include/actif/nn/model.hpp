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

#ifndef ACTIF_NN_MODEL_HPP_
#define ACTIF_NN_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "actif/error.hpp"

namespace actif::nn {

// Layer widths of the regressor: F inputs, H LSTM units, P penultimate units.
struct ModelDims {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t penult = 0;

  bool operator==(const ModelDims&) const = default;
};

// Gate blocks are stacked in the order input, forget, cell-candidate, output
// ("ifgo") along the rows of the 4H-row matrices.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };
inline constexpr std::string_view kGateOrder = "ifgo";

struct LstmParameters {
  Eigen::MatrixXd input_weights;      // 4H x F
  Eigen::MatrixXd recurrent_weights;  // 4H x H
  Eigen::VectorXd gate_bias;          // 4H
  Eigen::MatrixXd penult_weights;     // P x H
  Eigen::VectorXd penult_bias;        // P
  Eigen::VectorXd output_weights;     // P
  double output_bias = 0.0;

  static LstmParameters zeros(const ModelDims& d) {
    const auto F = static_cast<Eigen::Index>(d.input);
    const auto H = static_cast<Eigen::Index>(d.hidden);
    const auto P = static_cast<Eigen::Index>(d.penult);
    LstmParameters p;
    p.input_weights = Eigen::MatrixXd::Zero(4 * H, F);
    p.recurrent_weights = Eigen::MatrixXd::Zero(4 * H, H);
    p.gate_bias = Eigen::VectorXd::Zero(4 * H);
    p.penult_weights = Eigen::MatrixXd::Zero(P, H);
    p.penult_bias = Eigen::VectorXd::Zero(P);
    p.output_weights = Eigen::VectorXd::Zero(P);
    return p;
  }

  bool operator==(const LstmParameters& o) const {
    return input_weights == o.input_weights && recurrent_weights == o.recurrent_weights &&
           gate_bias == o.gate_bias && penult_weights == o.penult_weights &&
           penult_bias == o.penult_bias && output_weights == o.output_weights &&
           output_bias == o.output_bias;
  }
};

// Visits every tensor in a fixed order as (name, flat storage). Eigen storage
// is column-major; code that needs row-major order (the weight file) handles
// that itself.
template <class Params, class Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  using Span = std::conditional_t<std::is_const_v<Params>, std::span<const double>,
                                  std::span<double>>;
  fn(std::string_view("W_ih"), Span(p.input_weights.data(), p.input_weights.size()));
  fn(std::string_view("W_hh"), Span(p.recurrent_weights.data(), p.recurrent_weights.size()));
  fn(std::string_view("b_gates"), Span(p.gate_bias.data(), p.gate_bias.size()));
  fn(std::string_view("W_pen"), Span(p.penult_weights.data(), p.penult_weights.size()));
  fn(std::string_view("b_pen"), Span(p.penult_bias.data(), p.penult_bias.size()));
  fn(std::string_view("W_out"), Span(p.output_weights.data(), p.output_weights.size()));
  fn(std::string_view("b_out"), Span(&p.output_bias, 1));
}

inline std::size_t parameter_count(const LstmParameters& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](std::string_view, std::span<const double> s) { n += s.size(); });
  return n;
}

// Names the first tensor holding a NaN/Inf, or returns an empty view.
inline std::string_view first_non_finite(const LstmParameters& p) {
  std::string_view bad;
  for_each_tensor(p, [&](std::string_view name, std::span<const double> s) {
    if (!bad.empty()) return;
    for (double v : s) {
      if (!std::isfinite(v)) {
        bad = name;
        return;
      }
    }
  });
  return bad;
}

// Single-layer LSTM, tanh penultimate dense layer, linear scalar head.
class LstmRegressor {
 public:
  LstmRegressor(const ModelDims& dims, LstmParameters params)
      : dims_(dims), params_(std::move(params)) {
    validate();
  }

  static LstmRegressor zeros(const ModelDims& dims) {
    check_dims(dims);
    return LstmRegressor(dims, LstmParameters::zeros(dims));
  }

  // Uniform fan-in initialisation: LSTM tensors in [-1/sqrt(H), 1/sqrt(H)],
  // each dense layer in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static LstmRegressor initialized(const ModelDims& dims, std::uint64_t seed) {
    check_dims(dims);
    LstmParameters p = LstmParameters::zeros(dims);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](double* data, Eigen::Index n, double bound) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index i = 0; i < n; ++i) data[i] = u(rng);
    };
    const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(dims.penult));
    fill(p.input_weights.data(), p.input_weights.size(), lstm_bound);
    fill(p.recurrent_weights.data(), p.recurrent_weights.size(), lstm_bound);
    fill(p.gate_bias.data(), p.gate_bias.size(), lstm_bound);
    fill(p.penult_weights.data(), p.penult_weights.size(), lstm_bound);
    fill(p.penult_bias.data(), p.penult_bias.size(), lstm_bound);
    fill(p.output_weights.data(), p.output_weights.size(), out_bound);
    fill(&p.output_bias, 1, out_bound);
    return LstmRegressor(dims, std::move(p));
  }

  const ModelDims& dims() const { return dims_; }
  const LstmParameters& params() const { return params_; }

  // Replaces the parameters; shapes and finiteness are re-checked.
  void set_params(LstmParameters p) {
    params_ = std::move(p);
    validate();
  }

  bool operator==(const LstmRegressor& o) const {
    return dims_ == o.dims_ && params_ == o.params_;
  }

 private:
  static void check_dims(const ModelDims& d) {
    if (d.input == 0 || d.hidden == 0 || d.penult == 0) {
      throw ConfigError("model dimensions must be positive (F=" + std::to_string(d.input) +
                        ", H=" + std::to_string(d.hidden) + ", P=" + std::to_string(d.penult) +
                        ")");
    }
  }

  void validate() const {
    check_dims(dims_);
    const auto F = static_cast<Eigen::Index>(dims_.input);
    const auto H = static_cast<Eigen::Index>(dims_.hidden);
    const auto P = static_cast<Eigen::Index>(dims_.penult);
    auto expect = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("inconsistent tensor shape: ") + what);
    };
    const auto& p = params_;
    expect(p.input_weights.rows() == 4 * H && p.input_weights.cols() == F, "W_ih");
    expect(p.recurrent_weights.rows() == 4 * H && p.recurrent_weights.cols() == H, "W_hh");
    expect(p.gate_bias.size() == 4 * H, "b_gates");
    expect(p.penult_weights.rows() == P && p.penult_weights.cols() == H, "W_pen");
    expect(p.penult_bias.size() == P, "b_pen");
    expect(p.output_weights.size() == P, "W_out");
    if (auto bad = first_non_finite(p); !bad.empty()) {
      throw NumericError("non-finite value in parameter tensor " + std::string(bad));
    }
  }

  ModelDims dims_;
  LstmParameters params_;
};

}  // namespace actif::nn

#endif  // ACTIF_NN_MODEL_HPP_
