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

#ifndef ACTIF_CLI_COMMANDS_HPP_
#define ACTIF_CLI_COMMANDS_HPP_

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "actif/attribution/attributor.hpp"
#include "actif/bench/profiler.hpp"
#include "actif/bench/workload.hpp"
#include "actif/config_json.hpp"
#include "actif/data/preprocess.hpp"
#include "actif/data/records.hpp"
#include "actif/data/synth.hpp"
#include "actif/error.hpp"
#include "actif/evaluation/fidelity.hpp"
#include "actif/evaluation/report.hpp"
#include "actif/nn/train.hpp"
#include "actif/nn/weights_io.hpp"
#include "actif/stats/compare.hpp"

namespace actif::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kPartial = 1, kUsage = 2 };

// Where the windows come from: a CSV trace file or a synth config.
struct DatasetSource {
  std::string csv;
  std::optional<data::SynthConfig> synth;
  std::size_t window = 30;
  std::size_t stride = 0;  // 0: non-overlapping
  bool normalize = true;   // CSV only
};

struct RunConfig {
  DatasetSource dataset;
  nn::HiddenDims dims;
  nn::TrainConfig train;
  std::vector<attribution::AttributionConfig> methods;
  evaluation::TopKConfig topk;
  std::string reference = "deepactif-lstm";
  std::optional<bench::BenchConfig> bench;
  std::uint64_t seed = 0;
};

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

inline DatasetSource parse_source(const nlohmann::json& j, const fs::path& base) {
  check_keys(j, {"csv", "synth", "window", "stride", "normalize"}, "dataset");
  DatasetSource src;
  if (j.contains("csv") == j.contains("synth")) {
    throw ConfigError("dataset needs exactly one of 'csv' or 'synth'");
  }
  if (j.contains("csv")) src.csv = resolve(base, j.at("csv").get<std::string>());
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    src.synth = (s.is_string() ? read_json(resolve(base, s.get<std::string>())) : s)
                    .get<data::SynthConfig>();
    src.synth->validate();
  }
  src.window = j.value("window", src.window);
  src.stride = j.value("stride", src.stride);
  src.normalize = j.value("normalize", src.normalize);
  if (src.window < 1) throw ConfigError("dataset window must be >= 1");
  return src;
}

// Top-level "seed" seeds training, the top-k grid and every method that does
// not carry its own.
inline RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base = ".") {
  check_keys(j, {"dataset", "model", "train", "methods", "topk", "reference", "bench", "seed"},
             "run config");
  RunConfig c;
  if (!j.contains("dataset")) throw ConfigError("run config: missing 'dataset'");
  c.dataset = parse_source(j.at("dataset"), base);
  c.seed = j.value("seed", c.seed);
  if (j.contains("model")) c.dims = j.at("model").get<nn::HiddenDims>();
  if (j.contains("train")) c.train = j.at("train").get<nn::TrainConfig>();
  if (!j.contains("train") || !j.at("train").contains("seed")) c.train.seed = c.seed;
  if (j.contains("topk")) c.topk = j.at("topk").get<evaluation::TopKConfig>();
  if (!j.contains("topk") || !j.at("topk").contains("seed")) c.topk.seed = c.seed;
  for (const auto& m : j.value("methods", nlohmann::json::array())) {
    attribution::AttributionConfig a;
    if (m.is_string()) {
      a.method = m.get<std::string>();
    } else {
      a = m.get<attribution::AttributionConfig>();
    }
    if (!m.is_object() || !m.contains("seed")) a.seed = c.seed;
    attribution::check_method(a.method);
    c.methods.push_back(a);
  }
  c.reference = j.value("reference", c.reference);
  if (j.contains("bench")) c.bench = j.at("bench").get<bench::BenchConfig>();
  c.train.validate();
  c.topk.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_json(path), fs::path(path).parent_path());
}

inline data::SequenceDataset load_csv_dataset(const std::string& path, std::size_t window,
                                              std::size_t stride, bool normalize) {
  data::RawRecords rec = data::load_csv(path);
  if (normalize) rec = data::subject_normalize(std::move(rec));
  data::SequenceDataset ds = data::window(rec, window, stride == 0 ? window : stride);
  if (ds.empty()) throw DataError("'" + path + "' yields no windows of length " + std::to_string(window));
  return ds;
}

inline data::SequenceDataset load_dataset(const DatasetSource& src) {
  if (src.synth) return data::synth_generate(*src.synth).dataset;
  return load_csv_dataset(src.csv, src.window, src.stride, src.normalize);
}

inline fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

inline void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << contents;
}

// Environment default for --jobs.
inline std::size_t default_jobs() {
  const char* v = std::getenv("ACTIF_JOBS");
  if (v == nullptr || *v == '\0') return 1;
  try {
    const long n = std::stol(v);
    return n < 1 ? 1 : static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError(std::string("ACTIF_JOBS is not a number: ") + v);
  }
}

// ------------------------------------------------------------- commands

inline int cmd_synth(const std::string& config, const std::string& out_dir, std::ostream& log) {
  const auto cfg = read_json(config).get<data::SynthConfig>();
  const data::SynthOutput out = data::synth_generate(cfg);
  const fs::path dir = prepare_out(out_dir);
  std::ostringstream csv;
  data::write_csv(csv, out.records);
  write_file(dir / "dataset.csv", csv.str());
  nlohmann::json truth{{"relevant", out.relevant},
                       {"weights", cfg.weights},
                       {"features", out.records.feature_names},
                       {"fingerprint", data::fingerprint(out.dataset)},
                       {"config", cfg}};
  write_file(dir / "ground_truth.json", truth.dump(2) + "\n");
  log << "fingerprint " << data::fingerprint(out.dataset) << "\n";
  return kOk;
}

inline int cmd_train(const std::string& config, const std::string& out_dir, std::ostream& log) {
  const RunConfig cfg = load_run_config(config);
  const data::SequenceDataset ds = load_dataset(cfg.dataset);
  const nn::TrainResult res = nn::train(ds, cfg.dims, cfg.train);
  const fs::path dir = prepare_out(out_dir);
  nn::save_weights((dir / "model.bin").string(), res.model);
  nlohmann::json history{{"dataset_fingerprint", data::fingerprint(ds)},
                         {"epochs_run", res.epochs_run},
                         {"best_epoch", res.best_epoch},
                         {"best_validation_mae", res.best_validation_mae},
                         {"train_loss", res.train_loss},
                         {"validation_mae", res.validation_mae},
                         {"model", cfg.dims},
                         {"train", cfg.train}};
  write_file(dir / "training.json", history.dump(2) + "\n");
  log << "trained " << res.epochs_run << " epochs, best validation MAE "
      << res.best_validation_mae << " at epoch " << res.best_epoch << "\n";
  return kOk;
}

struct AttributeArgs {
  std::string weights;
  std::string dataset;
  std::string method = "deepactif-lstm";
  std::string config;  // optional AttributionConfig JSON
  std::string out_dir;
  std::size_t window = 30;
  std::size_t stride = 0;
  bool normalize = false;
};

inline int cmd_attribute(const AttributeArgs& a, std::ostream& log) {
  attribution::AttributionConfig cfg;
  if (!a.config.empty()) cfg = read_json(a.config).get<attribution::AttributionConfig>();
  if (!a.method.empty()) cfg.method = a.method;
  attribution::check_method(cfg.method);
  const nn::LstmRegressor model = nn::load_weights(a.weights);
  const data::SequenceDataset ds = load_csv_dataset(a.dataset, a.window, a.stride, a.normalize);
  if (model.dims().input != ds.F()) {
    throw ConfigError("weights expect F=" + std::to_string(model.dims().input) +
                      " but the dataset has F=" + std::to_string(ds.F()));
  }
  const attribution::FeatureScores s = attribution::attribute(model, ds, cfg);
  const fs::path dir = prepare_out(a.out_dir);
  write_file(dir / "scores.json", attribution::to_json(s).dump(2) + "\n");
  const std::size_t n = std::min<std::size_t>(10, s.ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = s.ranking[i];
    log << i + 1 << ". " << s.feature_names[f] << " " << s.scores(static_cast<Eigen::Index>(f)) << "\n";
  }
  return kOk;
}

inline std::vector<stats::PairedComparison> comparisons_for(const evaluation::EvalReport& r,
                                                            const std::string& reference) {
  if (std::find(r.meta.methods.begin(), r.meta.methods.end(), reference) == r.meta.methods.end()) {
    return {};
  }
  return stats::compare_grid(r, reference);
}

inline void write_stats(const fs::path& dir, const std::vector<stats::PairedComparison>& cs) {
  write_file(dir / "stats.csv", stats::comparisons_csv(cs));
  if (!cs.empty()) write_file(dir / "stats.md", stats::comparisons_markdown(cs));
}

inline void write_bench(const fs::path& dir, const std::vector<bench::BenchResult>& rs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rs) j.push_back(bench::to_json(r));
  write_file(dir / "bench.json", j.dump(2) + "\n");
  write_file(dir / "bench.csv", bench::efficiency_csv(rs));
  write_file(dir / "bench.md", bench::efficiency_markdown(rs));
}

inline std::vector<bench::BenchResult> run_bench(const RunConfig& cfg,
                                                 const data::SequenceDataset& ds) {
  const nn::TrainResult res = nn::train(ds, cfg.dims, cfg.train);
  return bench::bench_methods(res.model, ds, cfg.methods, cfg.bench.value_or(bench::BenchConfig{}));
}

// Full grid plus comparisons against the reference method. report.json is
// the canonical, timing-free form; report_full.json adds benchmark timings.
inline int cmd_evaluate(const std::string& config, const std::string& out_dir, std::size_t jobs,
                        std::ostream& log) {
  const RunConfig cfg = load_run_config(config);
  if (cfg.methods.empty()) throw ConfigError("run config lists no methods");
  const data::SequenceDataset ds = load_dataset(cfg.dataset);
  const fs::path dir = prepare_out(out_dir);
  evaluation::FidelityOptions opts{cfg.topk, cfg.train, cfg.dims, jobs};
  evaluation::EvalReport report = evaluation::fidelity_eval(cfg.methods, ds, opts);
  report.comparisons = comparisons_for(report, cfg.reference);
  if (cfg.bench) {
    report.bench = run_bench(cfg, ds);
    write_bench(dir, report.bench);
  }
  write_file(dir / "report.json", evaluation::report_to_json(report).dump(2) + "\n");
  write_file(dir / "report_full.json", evaluation::report_to_json(report, false).dump(2) + "\n");
  write_file(dir / "grid.csv", evaluation::grid_csv(report));
  write_file(dir / "folds.csv", evaluation::fold_csv(report));
  write_file(dir / "summary.md", evaluation::summary_markdown(report));
  write_stats(dir, report.comparisons);
  log << "config " << report.meta.config_hash << ", dataset " << report.meta.dataset_fingerprint
      << ", " << report.cells.size() << " cells, " << report.failures() << " failed\n";
  return report.failures() == 0 ? kOk : kPartial;
}

// Recomputes comparisons from an existing report. The config names the report
// (relative to the config file) and optionally the reference method.
inline int cmd_stats(const std::string& config, const std::string& out_dir, std::ostream& log) {
  const nlohmann::json j = read_json(config);
  check_keys(j, {"report", "reference", "k"}, "stats config");
  if (!j.contains("report")) throw ConfigError("stats config: missing 'report'");
  const std::string path = resolve(fs::path(config).parent_path(), j.at("report").get<std::string>());
  const evaluation::EvalReport report = evaluation::report_from_json(read_json(path));
  const std::string reference = j.value("reference", std::string("deepactif-lstm"));
  std::vector<stats::PairedComparison> cs;
  if (j.contains("k")) {
    for (int k : j.at("k").get<std::vector<int>>()) {
      for (auto& c : stats::compare_all(report, reference, k)) cs.push_back(std::move(c));
    }
  } else {
    cs = stats::compare_grid(report, reference);
  }
  write_stats(prepare_out(out_dir), cs);
  for (const auto& c : cs) {
    log << stats::comparison_label(c.method_b) << " k=" << c.k << " " << stats::format_cell(c)
        << "\n";
  }
  return kOk;
}

inline int cmd_bench(const std::string& config, const std::string& out_dir, std::ostream& log) {
  const RunConfig cfg = load_run_config(config);
  if (cfg.methods.empty()) throw ConfigError("run config lists no methods");
  const data::SequenceDataset ds = load_dataset(cfg.dataset);
  const fs::path dir = prepare_out(out_dir);
  const auto results = run_bench(cfg, ds);
  write_bench(dir, results);
  log << bench::efficiency_markdown(results);
  return kOk;
}

// Maps library errors to the exit-code contract.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartial;
  }
}

}  // namespace actif::cli

#endif  // ACTIF_CLI_COMMANDS_HPP_
