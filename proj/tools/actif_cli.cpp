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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "actif/bench/allocation.hpp"
#include "actif/cli/commands.hpp"

ACTIF_DEFINE_ALLOCATION_HOOK();

int main(int argc, char** argv) {
  namespace cli = actif::cli;
  CLI::App app{"actif: activation-based feature attribution toolkit"};
  app.require_subcommand(1);

  std::string config, out;
  std::size_t jobs = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted features");
  synth->add_option("--config", config, "SynthConfig JSON")->required();
  synth->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model on the configured dataset");
  train->add_option("--config", config, "run config JSON")->required();
  train->add_option("--out", out, "output directory")->required();

  cli::AttributeArgs attr;
  auto* attribute = app.add_subcommand("attribute", "score features with one method");
  attribute->add_option("--weights", attr.weights, "weight file (binary or JSON)")->required();
  attribute->add_option("--dataset", attr.dataset, "CSV trace file")->required();
  attribute->add_option("--method", attr.method, "method tag");
  attribute->add_option("--config", attr.config, "AttributionConfig JSON");
  attribute->add_option("--out", attr.out_dir, "output directory")->required();
  attribute->add_option("--window", attr.window, "window length T");
  attribute->add_option("--stride", attr.stride, "window stride (0: T)");
  attribute->add_flag("--normalize", attr.normalize, "z-score each subject");

  auto* evaluate = app.add_subcommand("evaluate", "run the top-k fidelity grid");
  evaluate->add_option("--config", config, "run config JSON")->required();
  evaluate->add_option("--out", out, "output directory")->required();
  evaluate->add_option("--jobs", jobs, "concurrent fold jobs (default $ACTIF_JOBS or 1)");

  auto* stats = app.add_subcommand("stats", "paired comparisons from a report");
  stats->add_option("--config", config, "stats config JSON")->required();
  stats->add_option("--out", out, "output directory")->required();

  auto* bench = app.add_subcommand("bench", "time per-subject attribution");
  bench->add_option("--config", config, "run config JSON")->required();
  bench->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kUsage;
  }

  return cli::guarded(
      [&] {
        if (*synth) return cli::cmd_synth(config, out, std::cout);
        if (*train) return cli::cmd_train(config, out, std::cout);
        if (*attribute) return cli::cmd_attribute(attr, std::cout);
        if (*evaluate) {
          return cli::cmd_evaluate(config, out, jobs == 0 ? cli::default_jobs() : jobs, std::cout);
        }
        if (*stats) return cli::cmd_stats(config, out, std::cout);
        return cli::cmd_bench(config, out, std::cout);
      },
      std::cerr);
}
