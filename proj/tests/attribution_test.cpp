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

#include <algorithm>
#include <functional>
#include <map>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "actif/attribution/attributor.hpp"
#include "actif/attribution/deepactif.hpp"
#include "actif/attribution/integrated_gradients.hpp"
#include "actif/attribution/perturbation.hpp"
#include "actif/attribution/random.hpp"
#include "actif/attribution/scores.hpp"
#include "actif/attribution/shapley.hpp"
#include "actif/data/synth.hpp"
#include "actif/nn/lstm.hpp"
#include "actif/nn/train.hpp"
#include "test_util.hpp"

namespace actif::attribution {
namespace {

using ::actif::testing::linear_model;
using ::actif::testing::random_dataset;
using ::actif::testing::random_matrix;
using ::actif::testing::random_model;

void expect_valid_ranking(const FeatureScores& s) {
  std::vector<std::size_t> sorted = s.ranking;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
  for (std::size_t i = 0; i + 1 < s.ranking.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(s.ranking[i]);
    const auto b = static_cast<Eigen::Index>(s.ranking[i + 1]);
    EXPECT_GE(s.scores(a), s.scores(b));
    if (s.scores(a) == s.scores(b)) {
      EXPECT_LT(a, b);
    }
  }
  EXPECT_TRUE((s.sigma.array() >= 0.0).all());
}

// Synthetic dataset plus a model trained on it for 20 epochs.
struct TrainedFixture {
  data::SequenceDataset ds;
  nn::LstmRegressor model = nn::LstmRegressor::zeros({1, 1, 1});
};

const TrainedFixture& trained_fixture() {
  static const TrainedFixture fx = [] {
    data::SynthConfig cfg;
    cfg.n_subjects = 4;
    cfg.windows_per_subject = 30;
    cfg.window = 10;
    cfg.features = 5;
    cfg.relevant = {1, 3};
    cfg.weights = {1.0, 1.0};
    cfg.seed = 11;
    TrainedFixture out;
    out.ds = data::synth_generate(cfg).dataset;
    nn::TrainConfig tc;
    tc.max_epochs = 20;
    tc.patience = 20;
    tc.batch_size = 32;
    tc.learning_rate = 1e-2;
    out.model = nn::train(out.ds, {8, 4}, tc).model;
    return out;
  }();
  return fx;
}

// ---------------------------------------------------------------- scores

TEST(ScoresTest, RankingDescendingWithIndexTieBreak) {
  Eigen::VectorXd s(5);
  s << 0.5, 2.0, 0.5, 3.0, 2.0;
  const FeatureScores fs = make_scores("t", {}, s, s, Eigen::VectorXd::Zero(5), 0.0);
  EXPECT_EQ(fs.ranking, (std::vector<std::size_t>{3, 1, 4, 0, 2}));
  EXPECT_EQ(fs.feature_names[4], "f4");
  expect_valid_ranking(fs);
}

TEST(ScoresTest, JsonRoundTrip) {
  Eigen::VectorXd s(3);
  s << 0.1, 0.3, 0.2;
  const FeatureScores fs = make_scores("deepactif-lstm", {"a", "b", "c"}, s, s * 2.0,
                                       Eigen::VectorXd::Constant(3, 0.5), 1e-8);
  EXPECT_EQ(scores_from_json(to_json(fs)), fs);
}

TEST(ScoresTest, RejectsNonFinite) {
  Eigen::VectorXd s(2);
  s << 1.0, std::nan("");
  EXPECT_THROW(make_scores("t", {}, s, s, Eigen::VectorXd::Zero(2), 0.0), NumericError);
}

// ------------------------------------------------------------- deepactif

TEST(DeepActifTest, InputTapTraceIsTheInput) {
  const data::SequenceDataset ds = random_dataset(2, 3, 4, 3, 1);
  const nn::LstmRegressor model = random_model({3, 4, 2}, 2);
  const auto traces = capture_activations(model, ds, Tap::kInput);
  ASSERT_EQ(traces.size(), ds.N());
  for (std::size_t i = 0; i < ds.N(); ++i) {
    EXPECT_EQ(traces[i].values, ds.samples[i].x);
    EXPECT_EQ(traces[i].sample_index, i);
  }
}

TEST(DeepActifTest, InputTapMapsToAbsoluteValue) {
  ActivationTrace tr{Tap::kInput, Eigen::MatrixXd(1, 2), 0};
  tr.values << -2.0, 3.0;
  const Eigen::MatrixXd m = map_to_features(tr, FeatureMapping{}, Tap::kInput);
  EXPECT_EQ(m(0, 0), 2.0);
  EXPECT_EQ(m(0, 1), 3.0);
}

TEST(DeepActifTest, LstmTapWeightMassExample) {
  const nn::ModelDims dims{2, 1, 1};
  nn::LstmParameters p = nn::LstmParameters::zeros(dims);
  // Feature masses 3 and 1 summed over the four gates.
  p.input_weights.col(0) << 1.0, -1.0, 0.5, -0.5;
  p.input_weights.col(1) << 0.25, 0.25, -0.25, 0.25;
  const nn::LstmRegressor model(dims, p);
  const FeatureMapping m = feature_mapping(model);
  EXPECT_DOUBLE_EQ(m.unit_to_feature(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(m.unit_to_feature(0, 1), 0.25);
  ActivationTrace tr{Tap::kLstm, Eigen::MatrixXd::Constant(1, 1, 0.8), 0};
  const Eigen::MatrixXd a = map_to_features(tr, m, Tap::kLstm);
  EXPECT_NEAR(a(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(a(0, 1), 0.2, 1e-15);
}

TEST(DeepActifTest, MassConservation) {
  const data::SequenceDataset ds = random_dataset(2, 4, 6, 5, 3);
  const nn::LstmRegressor model = random_model({5, 7, 3}, 4, 0.8);
  const FeatureMapping mapping = feature_mapping(model);
  EXPECT_TRUE(mapping.lstm_uniform.empty());
  for (Eigen::Index h = 0; h < mapping.unit_to_feature.rows(); ++h) {
    EXPECT_NEAR(mapping.unit_to_feature.row(h).sum(), 1.0, 1e-12);
  }
  for (const auto& tr : capture_activations(model, ds, Tap::kLstm)) {
    const Eigen::MatrixXd a = map_to_features(tr, mapping, Tap::kLstm);
    for (Eigen::Index t = 0; t < a.rows(); ++t) {
      EXPECT_NEAR(a.row(t).sum(), tr.values.row(t).cwiseAbs().sum(), 1e-9);
    }
  }
  for (const auto& tr : capture_activations(model, ds, Tap::kPenultimate)) {
    ASSERT_EQ(tr.values.rows(), 1);
    ASSERT_EQ(tr.values.cols(), 3);
    EXPECT_NEAR(map_to_features(tr, mapping, Tap::kPenultimate).sum(),
                tr.values.cwiseAbs().sum(), 1e-9);
  }
}

TEST(DeepActifTest, ZeroWeightUnitGetsUniformRow) {
  nn::LstmParameters p = nn::LstmParameters::zeros({4, 2, 1});
  p.input_weights(0, 1) = 1.0;  // unit 0 only
  const FeatureMapping m = feature_mapping(nn::LstmRegressor({4, 2, 1}, p));
  EXPECT_EQ(m.lstm_uniform, (std::vector<std::size_t>{1}));
  EXPECT_EQ(m.unit_to_feature.row(1), Eigen::RowVectorXd::Constant(4, 0.25));
  EXPECT_EQ(m.penult_uniform, (std::vector<std::size_t>{0}));
}

TEST(DeepActifTest, InvAggregateExamples) {
  Eigen::MatrixXd stack(4, 3);
  stack << 1, 7, 0, 2, 7, 0, 3, 7, 0, 4, 7, 0;
  const FeatureScores s = inv_aggregate(stack, 1e-8);
  EXPECT_DOUBLE_EQ(s.mu(0), 2.5);
  EXPECT_NEAR(s.sigma(0), std::sqrt(1.25), 1e-15);
  EXPECT_NEAR(s.sigma(0), 1.118034, 1e-6);
  EXPECT_NEAR(s.scores(0), 2.5 / (std::sqrt(1.25) + 1e-8), 1e-12);
  EXPECT_NEAR(s.scores(0), 2.23607, 1e-5);
  EXPECT_NEAR(s.scores(1), 7.0 * 1e8, 1e-6 * 7e8);
  EXPECT_EQ(s.scores(2), 0.0);
  EXPECT_EQ(s.ranking, (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(inv_aggregate(Eigen::MatrixXd::Zero(3, 2), 0.0).scores, Eigen::VectorXd::Zero(2));
  EXPECT_THROW(inv_aggregate(Eigen::MatrixXd(0, 2), 1e-8), DataError);
}

TEST(DeepActifTest, ScaleProperty) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd stack = random_matrix(200, 6, rng).cwiseAbs();
  const FeatureScores base0 = inv_aggregate(stack, 0.0);
  for (double c : {0.125, 0.5, 2.0, 8.0}) {
    EXPECT_EQ(inv_aggregate(stack * c, 0.0).scores, base0.scores) << c;
  }
  const FeatureScores base = inv_aggregate(stack, 1e-8);
  for (double c : {0.1, 0.3, 1.7, 4.0, 10.0}) {
    const FeatureScores scaled = inv_aggregate(stack * c, 1e-8);
    for (Eigen::Index f = 0; f < 6; ++f) {
      ASSERT_GE(base.sigma(f), 1e-4);
      EXPECT_LT(std::abs(scaled.scores(f) - base.scores(f)) / base.scores(f), 1e-3);
    }
    EXPECT_EQ(scaled.ranking, base.ranking);
  }
}

TEST(DeepActifTest, DuplicationInvariance) {
  const data::SequenceDataset one = random_dataset(1, 1, 8, 4, 6);
  data::SequenceDataset five = one;
  for (int i = 0; i < 4; ++i) five.samples.push_back(one.samples[0]);
  const nn::LstmRegressor model = random_model({4, 5, 3}, 7);
  for (Tap tap : {Tap::kInput, Tap::kLstm}) {
    const FeatureScores a = deepactif(model, one, tap);
    const FeatureScores b = deepactif(model, five, tap);
    for (Eigen::Index f = 0; f < 4; ++f) {
      EXPECT_NEAR(a.mu(f), b.mu(f), 1e-12);
      EXPECT_NEAR(a.sigma(f), b.sigma(f), 1e-12);
      EXPECT_NEAR(a.scores(f), b.scores(f), 1e-9 * std::max(1.0, std::abs(a.scores(f))));
    }
    EXPECT_EQ(a.ranking, b.ranking);
  }
}

TEST(DeepActifTest, ZeroWeightsLstmTapGivesZeroScoresIdentityRanking) {
  const data::SequenceDataset ds = random_dataset(2, 3, 5, 4, 8);
  const nn::LstmRegressor model = nn::LstmRegressor::zeros({4, 3, 2});
  for (const auto& tr : capture_activations(model, ds, Tap::kLstm)) {
    EXPECT_TRUE(tr.values.isZero(0.0));
  }
  const FeatureScores s = deepactif(model, ds, Tap::kLstm);
  EXPECT_TRUE(s.scores.isZero(0.0));
  EXPECT_EQ(s.ranking, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(s.method_tag, "deepactif-lstm");
}

TEST(DeepActifTest, InputTapRanksConsistentlyLargeFeatureFirst) {
  data::SequenceDataset ds = random_dataset(3, 10, 12, 5, 9);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  // |x| of a standard normal has mu/sigma near 1.3; feature 3 gets about 10x.
  for (auto& s : ds.samples) {
    for (Eigen::Index t = 0; t < s.x.rows(); ++t) s.x(t, 3) = 5.0 + 0.4 * n(rng);
  }
  const FeatureScores scores = deepactif(nn::LstmRegressor::initialized({5, 4, 3}, 1), ds,
                                         Tap::kInput);
  EXPECT_EQ(scores.ranking.front(), 3u);
  EXPECT_GT(scores.scores(3), 8.0 * scores.scores(0));
}

TEST(DeepActifTest, ForwardOnly) {
  const TrainedFixture& fx = trained_fixture();
  const std::uint64_t before = nn::backward_invocations.load();
  for (Tap tap : {Tap::kInput, Tap::kLstm, Tap::kPenultimate}) deepactif(fx.model, fx.ds, tap);
  EXPECT_EQ(nn::backward_invocations.load(), before);
  nn::input_gradient(fx.model, fx.ds.samples[0].x);
  EXPECT_EQ(nn::backward_invocations.load(), before + 1);
}

TEST(DeepActifTest, DimensionMismatchIsConfigError) {
  const data::SequenceDataset ds = random_dataset(1, 2, 4, 3, 1);
  EXPECT_THROW(capture_activations(nn::LstmRegressor::zeros({4, 2, 2}), ds, Tap::kLstm),
               ConfigError);
  EXPECT_THROW(parse_tap("hidden"), ConfigError);
}

// -------------------------------------------------------------------- IG

TEST(IntegratedGradientsTest, QuadraticPathIsExactUnderTrapezoid) {
  using Scalar1 = Eigen::Matrix<double, 1, 1>;
  const auto grad = [](const std::vector<Scalar1>& path) {
    std::vector<Scalar1> g;
    for (const auto& p : path) g.push_back(2.0 * p);
    return g;
  };
  for (std::size_t steps : {1, 2, 7, 50}) {
    const Scalar1 a = integrate_path(Scalar1(Scalar1::Constant(1.0)), Scalar1(Scalar1::Zero()), steps, grad);
    EXPECT_DOUBLE_EQ(a(0, 0), 1.0) << steps;
  }
}

TEST(IntegratedGradientsTest, LinearModelIsExactAtOneStep) {
  const std::vector<double> w = {0.7, -1.3, 2.0};
  const nn::LstmRegressor model = linear_model(w, 0.25);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd x = random_matrix(4, 3, rng);
    const Eigen::MatrixXd b = random_matrix(4, 3, rng);
    for (std::size_t steps : {1, 3}) {
      const Eigen::MatrixXd attr = integrated_gradients(model, x, b, steps);
      for (Eigen::Index t = 0; t < 4; ++t) {
        for (Eigen::Index f = 0; f < 3; ++f) {
          EXPECT_NEAR(attr(t, f), w[static_cast<std::size_t>(f)] * (x(t, f) - b(t, f)), 1e-10);
        }
      }
    }
  }
}

TEST(IntegratedGradientsTest, CompletenessOnTrainedModel) {
  const TrainedFixture& fx = trained_fixture();
  const Eigen::MatrixXd baseline = Eigen::MatrixXd::Zero(10, 5);
  const double f0 = nn::predict(fx.model, baseline);
  for (std::size_t i = 0; i < 20; ++i) {
    const Eigen::MatrixXd& x = fx.ds.samples[i * 5].x;
    const Eigen::MatrixXd attr = integrated_gradients(fx.model, x, baseline, 200);
    EXPECT_LT(std::abs(attr.sum() - (nn::predict(fx.model, x) - f0)), 1e-3);
  }
}

TEST(IntegratedGradientsTest, ConstantModelGivesZeroAttribution) {
  nn::LstmParameters p = nn::LstmParameters::zeros({3, 2, 2});
  p.output_bias = 4.0;
  const nn::LstmRegressor model({3, 2, 2}, p);
  std::mt19937_64 rng(3);
  EXPECT_TRUE(integrated_gradients(model, random_matrix(5, 3, rng), Eigen::MatrixXd::Zero(5, 3), 10)
                  .isZero(0.0));
}

TEST(IntegratedGradientsTest, IgnoredFeatureScoresZero) {
  const nn::LstmRegressor model = linear_model({1.0, 0.0, -0.5});
  const data::SequenceDataset ds = random_dataset(2, 4, 4, 3, 13);
  for (BaselineKind kind : {BaselineKind::kZero, BaselineKind::kMean, BaselineKind::kRandom}) {
    const FeatureScores s = ig_feature_scores(model, ds, kind, IgOptions{});
    EXPECT_LT(s.scores(1), 1e-10) << baseline_name(kind);
    EXPECT_GT(s.scores(0), 0.1);
    EXPECT_EQ(s.method_tag, "ig-" + std::string(baseline_name(kind)));
  }
}

TEST(IntegratedGradientsTest, ZeroBaselineMatchesMeanBaselineOnZeroMeanData) {
  const TrainedFixture& fx = trained_fixture();
  const data::SequenceDataset src =
      fx.ds.filtered([](const data::Sample& s) { return s.subject == "s0"; });
  // Each sample followed by its mirror image: per-feature means are exactly 0.
  data::SequenceDataset ds = src;
  ds.samples.clear();
  for (const auto& s : src.samples) {
    ds.samples.push_back(s);
    ds.samples.push_back(s);
    ds.samples.back().x = -s.x;
  }
  ASSERT_TRUE(data::feature_means(ds).isZero(0.0));
  const FeatureScores z = ig_feature_scores(fx.model, ds, BaselineKind::kZero, IgOptions{});
  const FeatureScores m = ig_feature_scores(fx.model, ds, BaselineKind::kMean, IgOptions{});
  EXPECT_LT((z.scores - m.scores).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(IntegratedGradientsTest, RandomBaselineIsSeeded) {
  const TrainedFixture& fx = trained_fixture();
  const data::SequenceDataset ds =
      fx.ds.filtered([](const data::Sample& s) { return s.subject == "s1"; });
  IgOptions opts;
  opts.steps = 10;
  opts.seed = 4;
  const FeatureScores a = ig_feature_scores(fx.model, ds, BaselineKind::kRandom, opts);
  const FeatureScores b = ig_feature_scores(fx.model, ds, BaselineKind::kRandom, opts);
  EXPECT_EQ(a, b);
  opts.seed = 5;
  EXPECT_NE(ig_feature_scores(fx.model, ds, BaselineKind::kRandom, opts).scores, a.scores);
}

TEST(IntegratedGradientsTest, RejectsBadArguments) {
  const nn::LstmRegressor model = linear_model({1.0});
  EXPECT_THROW(integrated_gradients(model, Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(2, 1), 5),
               ConfigError);
  EXPECT_THROW(integrated_gradients(model, Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1), 0),
               ConfigError);
  EXPECT_THROW(parse_baseline("ones"), ConfigError);
}

// --------------------------------------------------------------- Shapley

// Prediction from the temporal means of each feature.
template <class Fn>
auto mean_feature_model(Fn fn) {
  return [fn](std::span<const Eigen::MatrixXd* const> xs) {
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = fn(Eigen::RowVectorXd(xs[i]->colwise().mean()));
    }
    return out;
  };
}

// Brute-force Shapley oracle over feature permutations.
Eigen::VectorXd permutation_shapley(const std::function<double(Coalition)>& v, std::size_t F) {
  std::vector<std::size_t> order(F);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(F));
  double count = 0.0;
  do {
    Coalition c = 0;
    for (std::size_t f : order) {
      const double before = v(c);
      c |= Coalition{1} << f;
      phi(static_cast<Eigen::Index>(f)) += v(c) - before;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  return phi / count;
}

TEST(ShapleyTest, AdditiveModelExample) {
  const nn::LstmRegressor model = linear_model({0.25, 0.5}, 0.3);  // T = 4: x1 + 2 x2 in means
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 2);
  const Eigen::RowVectorXd bg = Eigen::RowVectorXd::Zero(2);
  const Eigen::VectorXd exact = exact_shapley(model, x, bg);
  EXPECT_NEAR(exact(0), 1.0, 1e-10);
  EXPECT_NEAR(exact(1), 2.0, 1e-10);
  const KernelShapResult ks = kernel_shap(model, x, bg, KernelShapOptions{});
  EXPECT_TRUE(ks.enumerated);
  EXPECT_NEAR(ks.phi(0), 1.0, 1e-10);
  EXPECT_NEAR(ks.phi(1), 2.0, 1e-10);
}

TEST(ShapleyTest, SymmetricAndProductModels) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  const Eigen::RowVectorXd bg = Eigen::RowVectorXd::Zero(2);
  const auto sum = mean_feature_model([](const Eigen::RowVectorXd& m) { return m(0) + m(1); });
  const KernelShapResult s = kernel_shap(sum, x, bg, KernelShapOptions{});
  EXPECT_NEAR(s.phi(0), 0.5 * (s.full_value - s.base_value), 1e-12);
  EXPECT_NEAR(s.phi(1), s.phi(0), 1e-12);
  const auto prod = mean_feature_model([](const Eigen::RowVectorXd& m) { return m(0) * m(1); });
  const KernelShapResult p = kernel_shap(prod, x, bg, KernelShapOptions{});
  EXPECT_NEAR(p.phi(0), 0.5, 1e-12);
  EXPECT_NEAR(p.phi(1), 0.5, 1e-12);
  const Eigen::VectorXd pe = exact_shapley(prod, x, bg);
  EXPECT_NEAR(pe(0), 0.5, 1e-12);
  EXPECT_NEAR(pe(1), 0.5, 1e-12);
}

TEST(ShapleyTest, ExactMatchesPermutationOracle) {
  const nn::LstmRegressor model = random_model({5, 3, 2}, 14, 0.8);
  std::mt19937_64 rng(15);
  const Eigen::MatrixXd x = random_matrix(4, 5, rng);
  const Eigen::RowVectorXd bg = random_matrix(1, 5, rng);
  const auto v = [&](Coalition c) { return nn::predict(model, mask_sample(x, bg, c)); };
  const Eigen::VectorXd oracle = permutation_shapley(v, 5);
  EXPECT_LT((exact_shapley(model, x, bg) - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ShapleyTest, FullEnumerationMatchesExactAtF8) {
  const nn::LstmRegressor model = random_model({8, 4, 3}, 16, 0.6);
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd x = random_matrix(5, 8, rng);
  const Eigen::RowVectorXd bg = random_matrix(1, 8, rng, 0.3);
  KernelShapOptions opts;
  opts.full_enumeration = true;
  const KernelShapResult ks = kernel_shap(model, x, bg, opts);
  const Eigen::VectorXd exact = exact_shapley(model, x, bg);
  EXPECT_LT((ks.phi - exact).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(ks.evaluations, 256u);
  EXPECT_NEAR(exact.sum(), ks.full_value - ks.base_value, 1e-12);
}

TEST(ShapleyTest, EfficiencyHoldsWhenSampling) {
  std::mt19937_64 rng(18);
  for (std::size_t F : {2, 5, 13, 20}) {
    const nn::LstmRegressor model = random_model({F, 4, 3}, 19 + F, 0.5);
    const Eigen::MatrixXd x = random_matrix(3, static_cast<Eigen::Index>(F), rng);
    const Eigen::RowVectorXd bg = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(F));
    KernelShapOptions opts;
    opts.n_coalitions = 4 * F + 40;
    opts.seed = F;
    const KernelShapResult ks = kernel_shap(model, x, bg, opts);
    EXPECT_NEAR(ks.phi.sum(), ks.full_value - ks.base_value, 1e-12) << F;
    EXPECT_EQ(ks.enumerated, F == 2 || F == 5);
  }
}

TEST(ShapleyTest, SamplingApproachesExact) {
  const nn::LstmRegressor model = random_model({10, 4, 3}, 20, 0.6);
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd x = random_matrix(4, 10, rng);
  const Eigen::RowVectorXd bg = Eigen::RowVectorXd::Zero(10);
  KernelShapOptions opts;
  opts.n_coalitions = 600;
  const KernelShapResult ks = kernel_shap(model, x, bg, opts);
  EXPECT_FALSE(ks.enumerated);
  const Eigen::VectorXd exact = exact_shapley(model, x, bg);
  EXPECT_LT((ks.phi - exact).cwiseAbs().maxCoeff(), 0.1 * exact.cwiseAbs().maxCoeff() + 1e-6);
  KernelShapOptions again = opts;
  EXPECT_EQ(kernel_shap(model, x, bg, again).phi, ks.phi);
}

TEST(ShapleyTest, DummyFeatureGetsZero) {
  const nn::LstmRegressor model = linear_model({1.0, 0.0, -2.0, 0.5});
  std::mt19937_64 rng(22);
  const Eigen::MatrixXd x = random_matrix(4, 4, rng);
  const Eigen::RowVectorXd bg = random_matrix(1, 4, rng);
  EXPECT_EQ(exact_shapley(model, x, bg)(1), 0.0);
  EXPECT_NEAR(kernel_shap(model, x, bg, KernelShapOptions{}).phi(1), 0.0, 1e-12);
}

TEST(ShapleyTest, Refusals) {
  const nn::LstmRegressor big = nn::LstmRegressor::zeros({13, 2, 2});
  EXPECT_THROW(exact_shapley(big, Eigen::MatrixXd::Zero(2, 13), Eigen::RowVectorXd::Zero(13)),
               ConfigError);
  KernelShapOptions opts;
  opts.n_coalitions = 20;
  EXPECT_THROW(kernel_shap(big, Eigen::MatrixXd::Zero(2, 13), Eigen::RowVectorXd::Zero(13), opts),
               ConfigError);
}

TEST(ShapleyTest, SingularSystemIsSolverError) {
  // With the minimum 2F budget at F = 13 some seeds leave a feature that never
  // varies independently of the eliminated one.
  const auto fn = mean_feature_model([](const Eigen::RowVectorXd& m) { return m.sum(); });
  bool saw_singular = false;
  for (std::uint64_t seed = 0; seed < 200 && !saw_singular; ++seed) {
    KernelShapOptions opts;
    opts.n_coalitions = 26;
    opts.seed = seed;
    try {
      kernel_shap(fn, Eigen::MatrixXd::Ones(2, 13), Eigen::RowVectorXd::Zero(13), opts);
    } catch (const SolverError&) {
      saw_singular = true;
    }
  }
  EXPECT_TRUE(saw_singular);
}

TEST(ShapleyTest, GlobalScoresAreMeanAbsolutePhi) {
  const nn::LstmRegressor model = linear_model({1.0, 0.0, -0.5});
  const data::SequenceDataset ds = random_dataset(2, 3, 4, 3, 23);
  const FeatureScores s = kernel_shap_scores(model, ds, KernelShapOptions{});
  const Eigen::RowVectorXd bg = data::feature_means(ds);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(3);
  for (const auto& smp : ds.samples) expected += exact_shapley(model, smp.x, bg).cwiseAbs();
  expected /= static_cast<double>(ds.N());
  EXPECT_LT((s.scores - expected).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(s.method_tag, "kernelshap");
  EXPECT_LT(s.scores(1), 1e-12);
}

// ----------------------------------------------------------- perturbation

TEST(PerturbationTest, AblationOnConstructedModel) {
  const nn::LstmRegressor model = linear_model({0.5, 0.0});
  data::SequenceDataset ds = random_dataset(2, 10, 4, 2, 24);
  for (auto& s : ds.samples) s.target = nn::predict(model, s.x);
  const FeatureScores s = ablation_importance(model, ds);
  EXPECT_GT(s.scores(0), 0.1);
  EXPECT_EQ(s.scores(1), 0.0);
  EXPECT_EQ(s.ranking.front(), 0u);
  const FeatureScores z = ablation_importance(nn::LstmRegressor::zeros({2, 3, 2}), ds);
  EXPECT_TRUE(z.scores.isZero(0.0));
}

TEST(PerturbationTest, ShuffleIdentityPermutationContributesZero) {
  const TrainedFixture& fx = trained_fixture();
  std::vector<std::size_t> id(fx.ds.N());
  std::iota(id.begin(), id.end(), std::size_t{0});
  const double base = nn::predict_mae(fx.model, fx.ds);
  EXPECT_EQ(shuffle_delta_mae(fx.model, fx.ds, 2, id, base), 0.0);
}

TEST(PerturbationTest, ShuffleIrrelevantFeatureNearZero) {
  const nn::LstmRegressor model = linear_model({0.5, 0.0, 0.3});
  data::SequenceDataset ds = random_dataset(3, 20, 4, 3, 25);
  for (auto& s : ds.samples) s.target = nn::predict(model, s.x);
  const FeatureScores s = shuffle_importance(model, ds, 10, 3);
  EXPECT_LE(std::abs(s.scores(1)), 3.0 * s.sigma(1) / std::sqrt(10.0) + 1e-12);
  EXPECT_GT(s.scores(0), 0.1);
  EXPECT_EQ(s, shuffle_importance(model, ds, 10, 3));
  EXPECT_THROW(shuffle_importance(model, random_dataset(1, 1, 4, 3, 1), 5, 0), DataError);
  EXPECT_THROW(shuffle_importance(model, ds, 0, 0), ConfigError);
}

// ----------------------------------------------------------------- random

TEST(RandomScoresTest, SeededAndUniformOverPermutations) {
  EXPECT_EQ(random_scores(6, 9), random_scores(6, 9));
  EXPECT_EQ(random_scores(1, 4).ranking, (std::vector<std::size_t>{0}));
  EXPECT_THROW(random_scores(0, 1), ConfigError);
  std::map<std::vector<std::size_t>, int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) ++counts[random_scores(4, seed).ranking];
  const double expected = 1000.0 / 24.0;
  double chi2 = 0.0;
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  do {
    const double o = counts.count(perm) ? counts[perm] : 0.0;
    chi2 += (o - expected) * (o - expected) / expected;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const boost::math::chi_squared dist(23.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}

// -------------------------------------------------------------- dispatch

TEST(AttributorTest, DispatchesEveryTag) {
  const TrainedFixture& fx = trained_fixture();
  const data::SequenceDataset ds =
      fx.ds.filtered([](const data::Sample& s) { return s.subject == "s2"; });
  for (const auto& tag : method_tags()) {
    AttributionConfig cfg;
    cfg.method = tag;
    cfg.ig_steps = 8;
    cfg.shap_coalitions = 64;
    cfg.shuffle_repeats = 3;
    cfg.random_baseline_draws = 2;
    const FeatureScores s = attribute(fx.model, ds, cfg);
    EXPECT_EQ(s.method_tag, tag);
    EXPECT_EQ(s.F(), 5u);
    EXPECT_EQ(s.feature_names, ds.feature_names);
    expect_valid_ranking(s);
  }
}

TEST(AttributorTest, UnknownMethodListsValidTags) {
  const TrainedFixture& fx = trained_fixture();
  AttributionConfig cfg;
  cfg.method = "lime";
  try {
    attribute(fx.model, fx.ds, cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("deepactif-lstm"), std::string::npos);
  }
  cfg.method = "kernelshap";
  cfg.shap_coalitions = 9;
  EXPECT_THROW(attribute(fx.model, fx.ds, cfg), ConfigError);
  cfg.method = "ig-zero";
  cfg.ig_steps = 0;
  EXPECT_THROW(attribute(fx.model, fx.ds, cfg), ConfigError);
  EXPECT_EQ(method_family("ig-zero"), "ig");
  EXPECT_EQ(method_family("random"), "random");
}

TEST(AttributorTest, FeaturePermutationEquivariance) {
  const TrainedFixture& fx = trained_fixture();
  const data::SequenceDataset ds =
      fx.ds.filtered([](const data::Sample& s) { return s.subject == "s3"; });
  const std::vector<Eigen::Index> perm = {3, 0, 4, 1, 2};
  data::SequenceDataset pds = ds;
  nn::LstmParameters pp = fx.model.params();
  for (std::size_t j = 0; j < perm.size(); ++j) {
    pds.feature_names[j] = ds.feature_names[static_cast<std::size_t>(perm[j])];
    pp.input_weights.col(static_cast<Eigen::Index>(j)) = fx.model.params().input_weights.col(perm[j]);
  }
  for (std::size_t i = 0; i < ds.N(); ++i) {
    for (std::size_t j = 0; j < perm.size(); ++j) {
      pds.samples[i].x.col(static_cast<Eigen::Index>(j)) = ds.samples[i].x.col(perm[j]);
    }
  }
  const nn::LstmRegressor pmodel(fx.model.dims(), pp);
  for (const std::string tag : {"deepactif-input", "deepactif-lstm", "deepactif-penultimate",
                                "ablation", "ig-zero", "ig-mean", "kernelshap"}) {
    AttributionConfig cfg;
    cfg.method = tag;
    cfg.ig_steps = 8;
    const FeatureScores a = attribute(fx.model, ds, cfg);
    const FeatureScores b = attribute(pmodel, pds, cfg);
    for (std::size_t j = 0; j < perm.size(); ++j) {
      EXPECT_NEAR(b.scores(static_cast<Eigen::Index>(j)), a.scores(perm[j]),
                  1e-9 * std::max(1.0, std::abs(a.scores(perm[j]))))
          << tag;
    }
  }
}

}  // namespace
}  // namespace actif::attribution
