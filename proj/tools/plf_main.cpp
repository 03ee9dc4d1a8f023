/* Copyright 2026 The plf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// plf: command-line front end for the permutohedral filtering library.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "plf/cli.hpp"

namespace {

using plf::cli::RunConfig;

void add_run_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--n", cfg.n, "number of points")->check(CLI::PositiveNumber);
  cmd->add_option("--d", cfg.d, "feature dimension")->check(CLI::Range(1, 64));
  cmd->add_option("--channels", cfg.channels, "descriptor channels")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--bandwidth", cfg.bandwidth, "1 or d bandwidths")->expected(1, 64);
  cmd->add_option("--normalize", cfg.normalize, "normalize by the filtered ones channel");
  cmd->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", cfg.out, "output path");
  cmd->add_option("--cap", cfg.cap, "largest n the dense oracle accepts")->check(CLI::PositiveNumber);
  cmd->add_option("--refinement", cfg.refinement, "lattice refinement")
      ->check(CLI::Range(1, plf::kMaxRefinement));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permutohedral lattice filtering and attention tools"};
  app.require_subcommand(1);

  plf::cli::BilateralConfig bilateral;
  auto* bil = app.add_subcommand("bilateral", "edge-preserving filter of a PGM/PPM image");
  bil->add_option("input", bilateral.input, "input image")->required()->check(CLI::ExistingFile);
  bil->add_option("--out", bilateral.output, "output image")->required();
  bil->add_option("--spatial", bilateral.spatial, "spatial bandwidth in pixels")
      ->check(CLI::PositiveNumber);
  bil->add_option("--range", bilateral.range, "range bandwidth in sample units (default maxval/10)")
      ->check(CLI::PositiveNumber);
  bil->add_option("--threads", bilateral.threads)->check(CLI::PositiveNumber);

  RunConfig oracle;
  oracle.channels = 3;
  auto* orc = app.add_subcommand("oracle-compare", "lattice against the dense Gaussian oracle");
  add_run_flags(orc, oracle);

  RunConfig grad;
  grad.n = 20;
  grad.channels = 2;
  bool inject_fault = false;
  auto* gc = app.add_subcommand("gradcheck", "analytic gradients against central differences");
  add_run_flags(gc, grad);
  gc->add_flag("--inject-fault", inject_fault)->group("");

  plf::cli::BenchConfig bench;
  bench.run.d = 5;
  bench.run.n = 0;
  std::string workload = "tube";
  auto* bn = app.add_subcommand("bench", "runtime scaling benchmark");
  add_run_flags(bn, bench.run);
  bn->add_option("--sizes", bench.sizes, "point counts")->expected(1, 32);
  bn->add_option("--methods", bench.methods, "lattice and/or dense")->expected(1, 2);
  bn->add_option("--reps", bench.repetitions, "timed repetitions")->check(CLI::Range(5, 1000));
  bn->add_option("--workload", workload, "tube, uniform or gaussian")
      ->check(CLI::IsMember({"tube", "uniform", "gaussian"}));
  bn->add_option("--density", bench.density, "points per unit length (tube) or volume (uniform)")
      ->check(CLI::PositiveNumber);
  bn->add_option("--tube-width", bench.tube_width, "tube cross-section side")
      ->check(CLI::PositiveNumber);

  plf::cli::TrainCommand train;
  double min_gain = -1.0;
  auto* tr = app.add_subcommand("train", "ordered-blobs toy training");
  tr->add_option("--steps", train.options.steps)->check(CLI::NonNegativeNumber);
  tr->add_option("--lr", train.options.lr)->check(CLI::NonNegativeNumber);
  tr->add_option("--seed", train.options.seed);
  tr->add_option("--eval-every", train.options.eval_every)->check(CLI::PositiveNumber);
  tr->add_option("--eval-samples", train.options.eval_samples)->check(CLI::PositiveNumber);
  tr->add_option("--length", train.task.length)->check(CLI::PositiveNumber);
  tr->add_option("--blobs", train.task.blobs)->check(CLI::PositiveNumber);
  tr->add_option("--width", train.task.blob_width)->check(CLI::PositiveNumber);
  tr->add_option("--spacing", train.task.spacing)->check(CLI::PositiveNumber);
  tr->add_option("--features", train.feature_channels)->check(CLI::PositiveNumber);
  tr->add_option("--descriptors", train.descriptor_channels)->check(CLI::PositiveNumber);
  tr->add_flag("--concat-input", train.concat_input);
  tr->add_flag("--baseline", train.baseline, "replace the PAM by the identity");
  tr->add_option("--min-gain", min_gain, "also train the baseline; fail below this accuracy gain");
  tr->add_option("--out", train.out, "directory for trace.csv and checkpoint/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return plf::cli::kUsageError;
  }

  try {
    if (*bil) return plf::cli::cmd_bilateral(bilateral, std::cout);
    if (*orc) return plf::cli::cmd_oracle_compare(oracle, std::cout);
    if (*gc) return plf::cli::cmd_gradcheck(grad, inject_fault, std::cout);
    if (*bn) {
      bench.workload = workload == "tube"      ? plf::cli::Workload::kTube
                       : workload == "uniform" ? plf::cli::Workload::kUniform
                                               : plf::cli::Workload::kGaussian;
      if (bench.run.n > 0) bench.sizes = {bench.run.n};
      return plf::cli::cmd_bench(bench, std::cout);
    }
    if (*tr) {
      if (min_gain >= 0.0) train.min_gain = min_gain;
      return plf::cli::cmd_train(train, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return plf::cli::kUsageError;
  }
  return plf::cli::kUsageError;
}
