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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "plf/cli.hpp"

namespace plf::cli {
namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double region_variance(const Image& img, int x0, int x1) {
  double sum = 0.0, sq = 0.0;
  int count = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double v = img.at(x, y);
      sum += v;
      sq += v * v;
      ++count;
    }
  }
  const double mean = sum / count;
  return sq / count - mean * mean;
}

TEST(Bilateral, ConstantImageIsFixedPoint) {
  for (int channels : {1, 3}) {
    auto img = make_image(17, 11, channels, 255);
    for (auto& s : img.samples) s = 137;
    EXPECT_EQ(bilateral_filter(img, 3.0, 10.0), img);
  }
}

TEST(Bilateral, TinyRangeKeepsEdges) {
  auto img = make_image(20, 8, 1, 255);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 20; ++x) img.at(x, y) = x < 10 ? 20 : 220;
  const auto out = bilateral_filter(img, 4.0, 1e-3);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    EXPECT_LE(std::abs(int(out.samples[i]) - int(img.samples[i])), 1);
  }
}

TEST(Bilateral, NoisyStepVarianceDecreases) {
  auto img = make_image(40, 20, 1, 255);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 8.0);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      const double base = x < 20 ? 60.0 : 190.0;
      img.at(x, y) = static_cast<std::uint16_t>(std::clamp(std::nearbyint(base + noise(rng)), 0.0, 255.0));
    }
  }
  const auto out = bilateral_filter(img, 3.0, 25.5);
  EXPECT_LT(region_variance(out, 0, 20), region_variance(img, 0, 20));
  EXPECT_LT(region_variance(out, 20, 40), region_variance(img, 20, 40));
}

TEST(Bilateral, CommandWritesImage) {
  const auto dir = temp_dir("plf_test_bilateral");
  auto img = make_image(6, 5, 3, 65535);
  std::mt19937_64 rng(1);
  for (auto& s : img.samples) s = static_cast<std::uint16_t>(rng() % 65536);
  write_image(img, dir / "in.ppm");
  BilateralConfig cfg;
  cfg.input = dir / "in.ppm";
  cfg.output = dir / "out.ppm";
  std::ostringstream log;
  EXPECT_EQ(cmd_bilateral(cfg, log), kPass);
  const auto out = read_image(cfg.output);
  EXPECT_EQ(out.width, 6);
  EXPECT_EQ(out.channels, 3);
  EXPECT_EQ(out.maxval, 65535);
  cfg.input = dir / "missing.ppm";
  EXPECT_THROW(cmd_bilateral(cfg, log), std::exception);
  std::filesystem::remove_all(dir);
}

TEST(OracleCompare, SinglePointIsExact) {
  RunConfig cfg;
  cfg.n = 1;
  const auto row = run_oracle_compare(cfg);
  EXPECT_EQ(row.metrics.mean_rel_l2, 0.0);
}

TEST(OracleCompare, DefaultRunPasses) {
  RunConfig cfg;
  cfg.n = 500;
  cfg.d = 3;
  cfg.channels = 3;
  const auto row = run_oracle_compare(cfg);
  EXPECT_TRUE(row.passed);
  EXPECT_LT(row.metrics.mean_rel_l2, 0.15);
  EXPECT_GT(row.metrics.correlation, 0.99);
}

TEST(OracleCompare, CapIsEnforced) {
  RunConfig cfg;
  cfg.n = 101;
  cfg.cap = 100;
  EXPECT_THROW(run_oracle_compare(cfg), CapExceeded);
}

TEST(OracleCompare, CsvHeader) {
  std::ostringstream out;
  OracleRow row;
  row.n = 5;
  write_oracle_csv(out, {row});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "n,d,channels,seed,mean_rel_l2,max_rel_l2,correlation");
}

TEST(Gradcheck, ExitCodes) {
  RunConfig cfg;
  cfg.n = 20;
  cfg.channels = 2;
  std::ostringstream a, b, c;
  EXPECT_EQ(cmd_gradcheck(cfg, false, a), kPass);
  EXPECT_EQ(cmd_gradcheck(cfg, true, b), kViolation);
  cmd_gradcheck(cfg, false, c);
  EXPECT_EQ(a.str(), c.str());
}

TEST(Bench, CsvReparses) {
  BenchConfig cfg;
  cfg.run.d = 3;
  cfg.sizes = {200, 400};
  cfg.methods = {"lattice", "dense"};
  cfg.repetitions = 1;
  cfg.min_rep_seconds = 0.0;
  const auto rows = run_bench(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_GT(r.seconds, 0.0);
    if (r.method == "lattice") {
      EXPECT_LT(r.rel_error, 0.5);
    }
  }
  std::stringstream csv;
  write_bench_csv(csv, rows);
  const auto back = read_bench_csv(csv);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].n, rows[i].n);
    EXPECT_EQ(back[i].method, rows[i].method);
  }
}

TEST(Bench, RejectsBadConfig) {
  BenchConfig cfg;
  cfg.sizes = {0};
  EXPECT_ANY_THROW(run_bench(cfg));
  cfg.sizes = {10};
  cfg.methods = {"nope"};
  EXPECT_ANY_THROW(run_bench(cfg));
}

TEST(Bench, LoglogSlope) {
  std::vector<BenchRecord> rows;
  for (std::size_t n : {100, 1000, 10000}) {
    rows.push_back({n, 2, 1, "a", 1e-6 * std::pow(double(n), 1.5), NAN});
    rows.push_back({n, 2, 1, "b", 3.0, NAN});
  }
  EXPECT_NEAR(loglog_slope(rows, "a"), 1.5, 1e-12);
  EXPECT_NEAR(loglog_slope(rows, "b"), 0.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope(rows, "c")));
}

TEST(Train, WritesTraceAndCheckpoint) {
  const auto dir = temp_dir("plf_test_train");
  TrainCommand cfg;
  cfg.options.steps = 10;
  cfg.options.eval_every = 5;
  cfg.options.eval_samples = 4;
  cfg.out = dir;
  std::ostringstream log;
  EXPECT_EQ(cmd_train(cfg, log), kPass);
  std::ifstream trace(dir / "trace.csv");
  std::string header;
  std::getline(trace, header);
  EXPECT_EQ(header, "step,loss,accuracy,eval_accuracy");
  int lines = 0;
  for (std::string line; std::getline(trace, line);) ++lines;
  EXPECT_EQ(lines, 10);
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint" / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST(Train, MinGainViolation) {
  TrainCommand cfg;
  cfg.options.steps = 1;
  cfg.options.eval_samples = 4;
  cfg.min_gain = 0.99;
  std::ostringstream log;
  EXPECT_EQ(cmd_train(cfg, log), kViolation);
}

}  // namespace
}  // namespace plf::cli
