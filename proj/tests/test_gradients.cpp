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
#include <numeric>
#include <random>

#include "plf/gradients.hpp"

namespace plf {
namespace {

Matrix random_matrix(std::size_t n, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, cols);
  for (auto& x : m.data()) x = g(rng);
  return m;
}

double dot(const Matrix& a, const Matrix& b) {
  return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

double max_abs(const Matrix& a) {
  double e = 0.0;
  for (double x : a.data()) e = std::max(e, std::abs(x));
  return e;
}

TEST(VjpDescriptors, ZeroGradientGivesZero) {
  std::mt19937_64 rng(1);
  const auto f = random_matrix(30, 3, rng);
  const auto v = random_matrix(30, 2, rng);
  for (bool normalize : {false, true}) {
    FilterOptions opts;
    opts.normalize = normalize;
    const auto fwd = permutohedral_filter_with_tape(make_embedding(3), f, v, opts);
    const DescriptorMatrix zero(30, 2);
    EXPECT_EQ(max_abs(vjp_descriptors(fwd.tape, zero)), 0.0);
    EXPECT_EQ(max_abs(vjp_features(fwd.tape, v, zero)), 0.0);
  }
}

TEST(VjpDescriptors, AdjointIdentity) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 6;
    const std::size_t n = 1 + rng() % 200, c = 1 + rng() % 4;
    const auto f = random_matrix(n, d, rng);
    const auto v = random_matrix(n, c, rng);
    const auto u = random_matrix(n, c, rng);
    FilterOptions opts;
    opts.normalize = false;
    opts.blur_order = trial % 2 ? BlurOrder::kReverse : BlurOrder::kForward;
    const auto fwd = permutohedral_filter_with_tape(make_embedding(d), f, v, opts);
    const double lhs = dot(fwd.output, u);
    const double rhs = dot(v, vjp_descriptors(fwd.tape, u));
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs))) << "trial " << trial;
  }
}

TEST(VjpDescriptors, RejectsWrongShape) {
  std::mt19937_64 rng(3);
  const auto f = random_matrix(10, 2, rng);
  const auto v = random_matrix(10, 2, rng);
  const auto fwd = permutohedral_filter_with_tape(make_embedding(2), f, v);
  EXPECT_THROW(vjp_descriptors(fwd.tape, DescriptorMatrix(10, 3)), FilterError);
  EXPECT_THROW(vjp_features(fwd.tape, v, DescriptorMatrix(9, 2)), FilterError);
}

TEST(VjpFeatures, LonePointHasZeroGradient) {
  std::mt19937_64 rng(4);
  const auto f = random_matrix(1, 3, rng);
  const auto v = random_matrix(1, 2, rng);
  const auto g = random_matrix(1, 2, rng);
  const auto fwd = permutohedral_filter_with_tape(make_embedding(3), f, v);
  EXPECT_LT(max_abs(vjp_features(fwd.tape, v, g)), 1e-12);
}

TEST(VjpFeatures, ZeroDescriptorsUnnormalizedGiveZero) {
  std::mt19937_64 rng(5);
  const auto f = random_matrix(40, 3, rng);
  const DescriptorMatrix v(40, 2);
  const auto g = random_matrix(40, 2, rng);
  FilterOptions opts;
  opts.normalize = false;
  const auto fwd = permutohedral_filter_with_tape(make_embedding(3), f, v, opts);
  EXPECT_EQ(max_abs(vjp_features(fwd.tape, v, g)), 0.0);
}

struct CheckCase {
  bool normalize;
  int refinement;
  BlurOrder order;
};

class FiniteDifference : public ::testing::TestWithParam<CheckCase> {};

TEST_P(FiniteDifference, AnalyticMatchesCentralDifferences) {
  const auto p = GetParam();
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 1 + trial % 4;
    const auto f = random_matrix(50, d, rng);
    const auto v = random_matrix(50, 2, rng);
    FilterOptions opts;
    opts.normalize = p.normalize;
    opts.refinement = p.refinement;
    opts.blur_order = p.order;
    const auto report = finite_difference_check(make_embedding(d, 0.8), f, v, opts, 100 + trial);
    EXPECT_TRUE(report.passed) << report.to_string();
    EXPECT_LT(report.descriptor_max_rel, 1e-8);
    EXPECT_LT(report.feature_max_rel, 1e-4);
    EXPECT_GT(report.feature_points, 25u);
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, FiniteDifference,
                         ::testing::Values(CheckCase{true, 2, BlurOrder::kForward},
                                           CheckCase{false, 2, BlurOrder::kForward},
                                           CheckCase{true, 1, BlurOrder::kForward},
                                           CheckCase{true, 3, BlurOrder::kReverse},
                                           CheckCase{false, 1, BlurOrder::kReverse}));

TEST(FiniteDifference, ReportIsDeterministic) {
  std::mt19937_64 rng(7);
  const auto f = random_matrix(20, 3, rng);
  const auto v = random_matrix(20, 2, rng);
  const auto a = finite_difference_check(make_embedding(3), f, v, {}, 9);
  const auto b = finite_difference_check(make_embedding(3), f, v, {}, 9);
  EXPECT_EQ(a.to_string(), b.to_string());
}

TEST(FiniteDifference, DetectsSignFlip) {
  std::mt19937_64 rng(8);
  const auto f = random_matrix(20, 3, rng);
  const auto v = random_matrix(20, 2, rng);
  GradCheckOptions check;
  check.inject_feature_sign_flip = true;
  const auto report = finite_difference_check(make_embedding(3), f, v, {}, 9, check);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.feature_max_rel, 1.0);
}

TEST(VjpFeatures, OnlyNearbyPointsGetGradient) {
  // Two clusters far apart: a loss on cluster A has no feature gradient on B.
  std::mt19937_64 rng(9);
  auto f = random_matrix(40, 2, rng);
  for (std::size_t i = 20; i < 40; ++i) f(i, 0) += 100.0;
  const auto v = random_matrix(40, 1, rng);
  DescriptorMatrix g(40, 1);
  for (std::size_t i = 0; i < 20; ++i) g(i, 0) = 1.0;
  const auto fwd = permutohedral_filter_with_tape(make_embedding(2), f, v);
  const auto gf = vjp_features(fwd.tape, v, g);
  double near = 0.0;
  for (std::size_t i = 0; i < 20; ++i) near = std::max(near, std::abs(gf(i, 0)) + std::abs(gf(i, 1)));
  EXPECT_GT(near, 0.0);
  for (std::size_t i = 20; i < 40; ++i) {
    EXPECT_EQ(gf(i, 0), 0.0);
    EXPECT_EQ(gf(i, 1), 0.0);
  }
}

}  // namespace
}  // namespace plf
