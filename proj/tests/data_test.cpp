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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "actif/data/dataset.hpp"
#include "actif/data/loocv.hpp"
#include "actif/data/preprocess.hpp"
#include "actif/data/records.hpp"
#include "actif/data/synth.hpp"
#include "actif/error.hpp"
#include "test_util.hpp"

namespace actif::data {
namespace {

RawRecords parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

RawRecords ramp_records(const std::vector<std::pair<std::string, std::size_t>>& subjects,
                        std::size_t F = 2) {
  RawRecords rec;
  for (std::size_t f = 0; f < F; ++f) rec.feature_names.push_back("f" + std::to_string(f));
  double v = 0.0;
  for (const auto& [id, rows] : subjects) {
    SubjectTrace t;
    t.id = id;
    t.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(F));
    for (std::size_t r = 0; r < rows; ++r) {
      t.timestamps.push_back(static_cast<double>(r));
      t.targets.push_back(v);
      for (std::size_t f = 0; f < F; ++f) {
        t.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
            v * static_cast<double>(f + 1);
      }
      v += 1.0;
    }
    rec.subjects.push_back(std::move(t));
  }
  return rec;
}

// ------------------------------------------------------------------- CSV

TEST(CsvTest, ThreeRowsTwoFeatures) {
  const RawRecords rec = parse(
      "subject_id,timestamp,target,gaze_x,gaze_y\n"
      "a,0,1.5,0.1,0.2\n"
      "a,1,2.5,0.3,-0.4\n"
      "b,0,3.5,1e-3,7\n");
  EXPECT_EQ(rec.F(), 2u);
  EXPECT_EQ(rec.total_rows(), 3u);
  EXPECT_EQ(rec.feature_names, (std::vector<std::string>{"gaze_x", "gaze_y"}));
  ASSERT_EQ(rec.subjects.size(), 2u);
  EXPECT_EQ(rec.subjects[0].id, "a");
  EXPECT_EQ(rec.subjects[0].features(1, 1), -0.4);
  EXPECT_EQ(rec.subjects[1].targets[0], 3.5);
  EXPECT_EQ(rec.subjects[1].features(0, 0), 1e-3);
}

TEST(CsvTest, ColumnsMayAppearInAnyOrderAndTimestampIsOptional) {
  const RawRecords rec = parse("g,target,subject_id\n1,2,s\n3,4,s\n");
  EXPECT_EQ(rec.feature_names, (std::vector<std::string>{"g"}));
  EXPECT_EQ(rec.subjects[0].features(1, 0), 3.0);
  EXPECT_EQ(rec.subjects[0].targets[1], 4.0);
}

TEST(CsvTest, MissingTargetIsSchemaErrorNamingColumn) {
  try {
    parse("subject_id,timestamp,x\na,0,1\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("target"), std::string::npos);
  }
  EXPECT_THROW(parse("timestamp,target,x\n0,1,2\n"), SchemaError);
  EXPECT_THROW(parse("subject_id,target\na,1\n"), SchemaError);
}

TEST(CsvTest, NanCellIsParseErrorAtItsRow) {
  try {
    parse("subject_id,timestamp,target,x\na,0,1,2\na,1,NaN,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("subject_id,timestamp,target,x\na,0,1,abc\n"), ParseError);
  EXPECT_THROW(parse("subject_id,timestamp,target,x\na,0,1\n"), ParseError);
}

TEST(CsvTest, WriteThenParseRoundTrips) {
  const RawRecords rec = synth_generate(SynthConfig{2, 3, 4, 3, {0}, {1.0}, 0.1, 0.9, 5}).records;
  std::ostringstream out;
  write_csv(out, rec);
  const RawRecords back = parse(out.str());
  ASSERT_EQ(back.subjects.size(), rec.subjects.size());
  for (std::size_t s = 0; s < rec.subjects.size(); ++s) {
    EXPECT_EQ(back.subjects[s].features, rec.subjects[s].features);
    EXPECT_EQ(back.subjects[s].targets, rec.subjects[s].targets);
    EXPECT_EQ(back.subjects[s].timestamps, rec.subjects[s].timestamps);
  }
}

TEST(CsvTest, MissingFileIsDataError) {
  EXPECT_THROW(load_csv("/nonexistent/actif.csv"), DataError);
}

// --------------------------------------------------------- normalization

TEST(NormalizeTest, TwoValueExample) {
  RawRecords rec = parse("subject_id,target,x\na,0,1\na,0,3\n");
  rec = subject_normalize(std::move(rec));
  EXPECT_DOUBLE_EQ(rec.subjects[0].features(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(rec.subjects[0].features(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(rec.norm_stats.at("a")[0].mean, 2.0);
  EXPECT_DOUBLE_EQ(rec.norm_stats.at("a")[0].std, 1.0);
}

TEST(NormalizeTest, ConstantFeatureIsZeroedAndFlagged) {
  RawRecords rec = parse("subject_id,target,x,y\na,0,5,1\na,0,5,2\na,0,5,3\n");
  rec = subject_normalize(std::move(rec));
  EXPECT_TRUE(rec.subjects[0].features.col(0).isZero(0.0));
  EXPECT_TRUE(rec.norm_stats.at("a")[0].constant);
  EXPECT_FALSE(rec.norm_stats.at("a")[1].constant);
}

TEST(NormalizeTest, SubjectsAreNormalizedIndependently) {
  RawRecords rec = ramp_records({{"a", 7}, {"b", 12}}, 3);
  rec.subjects[1].features *= 1000.0;
  rec = subject_normalize(std::move(rec));
  for (const auto& s : rec.subjects) {
    const double n = static_cast<double>(s.rows());
    for (Eigen::Index f = 0; f < 3; ++f) {
      const double mean = s.features.col(f).mean();
      const double sd = std::sqrt((s.features.col(f).array() - mean).square().sum() / n);
      EXPECT_NEAR(mean, 0.0, 1e-6);
      EXPECT_NEAR(sd, 1.0, 1e-6);
    }
  }
}

TEST(NormalizeTest, Idempotent) {
  const RawRecords once =
      subject_normalize(synth_generate(SynthConfig{3, 4, 5, 4, {1}, {2.0}, 0.1, 0.9, 9}).records);
  const RawRecords twice = subject_normalize(once);
  for (std::size_t s = 0; s < once.subjects.size(); ++s) {
    EXPECT_LT((once.subjects[s].features - twice.subjects[s].features).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(NormalizeTest, SingleRowSubjectIsDataError) {
  EXPECT_THROW(subject_normalize(ramp_records({{"a", 3}, {"b", 1}})), DataError);
}

// ------------------------------------------------------------- windowing

TEST(WindowTest, CountsAndTargets) {
  const RawRecords rec = ramp_records({{"a", 10}});
  std::vector<std::string> warnings;
  EXPECT_EQ(window(rec, 5, 5, warnings).N(), 2u);
  const SequenceDataset ds = window(rec, 5, 1, warnings);
  EXPECT_EQ(ds.N(), 6u);
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(ds.T(), 5u);
  EXPECT_EQ(ds.samples[2].target, 6.0);  // rows 2..6, last row target 6
  EXPECT_EQ(ds.samples[2].x(0, 1), 4.0);
  ds.validate();
}

TEST(WindowTest, ShortSubjectSkippedWithWarning) {
  const RawRecords rec = ramp_records({{"a", 4}, {"b", 6}});
  std::vector<std::string> warnings;
  const SequenceDataset ds = window(rec, 5, 1, warnings);
  EXPECT_EQ(ds.N(), 2u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("'a'"), std::string::npos);
  EXPECT_THROW(window(rec, 0, 1, warnings), ConfigError);
  EXPECT_THROW(window(rec, 3, 0, warnings), ConfigError);
}

TEST(WindowTest, NeverCrossesSubjects) {
  const RawRecords rec = ramp_records({{"a", 9}, {"b", 9}, {"c", 9}});
  std::vector<std::string> warnings;
  const SequenceDataset ds = window(rec, 4, 1, warnings);
  EXPECT_EQ(ds.N(), 18u);
  for (const auto& s : ds.samples) {
    // Every row of the window must come from the sample's own subject.
    const double first = s.x(0, 0);
    const double lo = s.subject == "a" ? 0.0 : s.subject == "b" ? 9.0 : 18.0;
    EXPECT_GE(first, lo);
    EXPECT_LE(first + 3.0, lo + 8.0);
  }
}

// ------------------------------------------------------------- synthetic

TEST(SynthTest, SameSeedIsBitIdentical) {
  const SynthConfig cfg{4, 6, 8, 5, {0, 3}, {1.0, -0.5}, 0.2, 0.9, 42};
  const SynthOutput a = synth_generate(cfg);
  const SynthOutput b = synth_generate(cfg);
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(fingerprint(a.dataset), fingerprint(b.dataset));
  SynthConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(fingerprint(synth_generate(other).dataset), fingerprint(a.dataset));
  EXPECT_EQ(a.relevant, (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(a.dataset.N(), 24u);
  EXPECT_EQ(a.dataset.subjects(), (std::vector<std::string>{"s0", "s1", "s2", "s3"}));
}

TEST(SynthTest, NoiseFreeTargetIsTemporalMean) {
  const SynthOutput out = synth_generate(SynthConfig{3, 5, 7, 4, {2}, {1.0}, 0.0, 0.9, 1});
  for (const auto& s : out.dataset.samples) {
    EXPECT_NEAR(s.target, s.x.col(2).mean(), 1e-12);
  }
}

TEST(SynthTest, PureNoiseTargetMatchesFoldedNormalMean) {
  const double noise = 0.7;
  const SynthOutput out = synth_generate(SynthConfig{10, 250, 4, 3, {}, {}, noise, 0.9, 2});
  ASSERT_GE(out.dataset.N(), 2000u);
  double mean_abs = 0.0;
  for (const auto& s : out.dataset.samples) mean_abs += std::abs(s.target);
  mean_abs /= static_cast<double>(out.dataset.N());
  const double expected = noise * std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(mean_abs, expected, 0.1 * expected);
}

TEST(SynthTest, IrrelevantFeaturesUncorrelatedWithTarget) {
  const SynthOutput out = synth_generate(SynthConfig{8, 150, 10, 4, {1}, {1.0}, 0.1, 0.9, 3});
  const auto n = static_cast<double>(out.dataset.N());
  for (Eigen::Index f = 0; f < 4; ++f) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (const auto& s : out.dataset.samples) {
      const double x = s.x.col(f).mean();
      sx += x;
      sy += s.target;
      sxx += x * x;
      syy += s.target * s.target;
      sxy += x * s.target;
    }
    const double r = (sxy - sx * sy / n) /
                     std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
    if (f == 1) {
      EXPECT_GT(r, 0.9);
    } else {
      EXPECT_LT(std::abs(r), 4.0 / std::sqrt(n));
    }
  }
}

TEST(SynthTest, ConfigValidationAndJson) {
  SynthConfig bad{2, 2, 3, 3, {5}, {1.0}, 0.1, 0.9, 0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.relevant = {1};
  bad.noise_std = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  const SynthConfig cfg{3, 4, 5, 6, {1, 2}, {0.5, 2.0}, 0.3, 0.8, 77};
  nlohmann::json j = cfg;
  const SynthConfig back = j.get<SynthConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  const SynthConfig defaults = nlohmann::json::parse(R"({"relevant":[0,1]})").get<SynthConfig>();
  EXPECT_EQ(defaults.weights, (std::vector<double>{1.0, 1.0}));
}

// ----------------------------------------------------------------- LOOCV

TEST(LoocvTest, PartitionIsolationAndOrder) {
  SequenceDataset ds = testing::random_dataset(3, 4, 3, 2, 5);
  // Reorder so first-appearance order differs from sorted order.
  std::reverse(ds.samples.begin(), ds.samples.end());
  const std::vector<Fold> folds = loocv_splits(ds);
  ASSERT_EQ(folds.size(), 3u);
  std::multiset<double> all_targets, test_targets;
  for (const auto& s : ds.samples) all_targets.insert(s.target);
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const Fold& fold = folds[k];
    EXPECT_EQ(fold.subject, "s" + std::to_string(k));
    EXPECT_EQ(fold.train.N() + fold.test.N(), ds.N());
    for (const auto& s : fold.train.samples) EXPECT_NE(s.subject, fold.subject);
    for (const auto& s : fold.test.samples) {
      EXPECT_EQ(s.subject, fold.subject);
      test_targets.insert(s.target);
    }
    EXPECT_EQ(fold.test.N(), 4u);
  }
  EXPECT_EQ(test_targets, all_targets);
}

TEST(LoocvTest, SingleSubjectIsDataError) {
  EXPECT_THROW(loocv_splits(testing::random_dataset(1, 5, 3, 2, 1)), DataError);
}

TEST(DatasetTest, FingerprintAndMeans) {
  const SequenceDataset ds = testing::random_dataset(2, 3, 4, 2, 6);
  SequenceDataset changed = ds;
  changed.samples[1].x(2, 1) += 1e-12;
  EXPECT_NE(fingerprint(ds), fingerprint(changed));
  Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(2);
  for (const auto& s : ds.samples) expected += s.x.colwise().sum();
  expected /= 24.0;
  EXPECT_LT((feature_means(ds) - expected).cwiseAbs().maxCoeff(), 1e-15);
  SequenceDataset bad = ds;
  bad.samples[0].x.resize(3, 2);
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace actif::data
