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

#ifndef ACTIF_NN_LOSS_HPP_
#define ACTIF_NN_LOSS_HPP_

#include <cmath>

#include "actif/error.hpp"

namespace actif::nn {

// Huber-style smooth L1: quadratic inside |d| < beta, linear outside.
inline double smooth_l1(double prediction, double target, double beta) {
  if (!(beta > 0.0)) throw ConfigError("smooth_l1 beta must be positive");
  const double d = prediction - target;
  const double a = std::abs(d);
  return a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

// d smooth_l1 / d prediction.
inline double smooth_l1_grad(double prediction, double target, double beta) {
  if (!(beta > 0.0)) throw ConfigError("smooth_l1 beta must be positive");
  const double d = prediction - target;
  if (std::abs(d) < beta) return d / beta;
  return d > 0.0 ? 1.0 : -1.0;
}

}  // namespace actif::nn

#endif  // ACTIF_NN_LOSS_HPP_
