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

#ifndef PLF_CLI_HPP_
#define PLF_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "plf/bench_csv.hpp"
#include "plf/dense_oracle.hpp"
#include "plf/image_io.hpp"
#include "plf/matrix.hpp"
#include "plf/toy.hpp"

namespace plf::cli {

enum ExitCode : int { kPass = 0, kViolation = 1, kUsageError = 2 };

/// Flags shared by the numeric subcommands.
struct RunConfig {
  std::size_t n = 500;
  int d = 3;
  std::size_t channels = 1;
  std::uint64_t seed = 1;
  std::vector<double> bandwidth{1.0};
  bool normalize = true;
  int threads = 1;
  std::filesystem::path out;
  std::size_t cap = kDefaultDenseCap;
  int refinement = 2;
};

// n x cols standard normal entries.
Matrix gaussian_matrix(std::size_t n, std::size_t cols, std::mt19937_64& rng);

// ---- bilateral ----

struct BilateralConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  double spatial = 4.0;
  // Defaults to a tenth of the image's maxval.
  std::optional<double> range;
  int threads = 1;
  int refinement = 2;
};

// Features (x/spatial, y/spatial, I_c/range), descriptors I_c, normalized.
// Results are clamped to [0, maxval] and rounded half to even.
Image bilateral_filter(const Image& img, double spatial, double range, int threads = 1,
                       int refinement = 2);
int cmd_bilateral(const BilateralConfig& cfg, std::ostream& log);

// ---- oracle comparison ----

struct OracleThresholds {
  double max_mean_rel_l2 = 0.15;
  double min_correlation = 0.99;
};

struct OracleRow {
  std::size_t n = 0;
  int d = 0;
  std::size_t channels = 0;
  std::uint64_t seed = 0;
  CompareMetrics metrics;
  bool passed = false;
};

OracleRow run_oracle_compare(const RunConfig& cfg, const OracleThresholds& thresholds = {});
void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows);
int cmd_oracle_compare(const RunConfig& cfg, std::ostream& log);

// ---- gradient check ----

int cmd_gradcheck(const RunConfig& cfg, bool inject_fault, std::ostream& log);

// ---- benchmark ----

enum class Workload {
  // A long narrow tube: feature 0 uniform over a length proportional to n,
  // the others uniform in [0, width). The lattice grows linearly with n.
  kTube,
  // Uniform in a cube whose volume grows with n.
  kUniform,
  // Unit Gaussian features; the occupied lattice saturates as n grows.
  kGaussian,
};

struct BenchConfig {
  RunConfig run;
  std::vector<std::size_t> sizes{1000, 10000, 100000};
  std::vector<std::string> methods{"lattice"};
  int repetitions = 5;
  Workload workload = Workload::kTube;
  // Points per unit length (kTube) or per unit volume (kUniform).
  double density = 200.0;
  double tube_width = 0.5;
  // Each timed repetition loops until at least this long.
  double min_rep_seconds = 0.02;
};

std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* progress = nullptr);

// Least-squares slope of log(seconds) against log(n) over rows of method.
// NaN with fewer than two distinct sizes.
double loglog_slope(const std::vector<BenchRecord>& rows, const std::string& method);

int cmd_bench(const BenchConfig& cfg, std::ostream& log);

// ---- toy training ----

struct TrainCommand {
  ToyTask task;
  TrainOptions options;
  std::size_t feature_channels = 8;
  std::size_t descriptor_channels = 8;
  bool concat_input = false;
  bool baseline = false;
  // Also train the local-only baseline and fail below this accuracy gain.
  std::optional<double> min_gain;
  std::filesystem::path out;  // directory for trace.csv and the checkpoint
};

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);
int cmd_train(const TrainCommand& cfg, std::ostream& log);

}  // namespace plf::cli

#endif  // PLF_CLI_HPP_
