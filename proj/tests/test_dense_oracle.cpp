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
#include <random>

#include "plf/dense_oracle.hpp"

namespace plf {
namespace {

TEST(Kernel, Values) {
  EXPECT_NEAR(kernel_value(Kernel::kGaussian, 2.0), 0.367879441, 1e-9);
  EXPECT_NEAR(kernel_value(Kernel::kExpL2, 1.0), 0.367879441, 1e-9);
  EXPECT_EQ(kernel_value(Kernel::kGaussian, 0.0), 1.0);
  EXPECT_EQ(kernel_value(Kernel::kExpL2, 0.0), 1.0);
}

TEST(AttentionDense, SymmetricWithUnitDiagonal) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  FeatureMatrix f(12, 3);
  for (auto& x : f.data()) x = g(rng);
  const auto k = attention_dense(f, Kernel::kGaussian);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(k(i, i), 1.0);
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(k(i, j), k(j, i));
  }
}

TEST(NlmDense, TwoPointClosedForm) {
  FeatureMatrix f(2, 1);
  f(1, 0) = 1.0;
  DescriptorMatrix v(2, 1);
  v(0, 0) = 2.0;
  v(1, 0) = -1.0;
  const double e = std::exp(-0.5);
  const auto raw = nlm_dense(f, v, Kernel::kGaussian, false);
  EXPECT_NEAR(raw(0, 0), 2.0 - e, 1e-15);
  EXPECT_NEAR(raw(1, 0), -1.0 + 2.0 * e, 1e-15);
  const auto norm = nlm_dense(f, v, Kernel::kGaussian, true);
  EXPECT_NEAR(norm(0, 0), (2.0 - e) / (1.0 + e), 1e-15);
  EXPECT_NEAR(norm(1, 0), (-1.0 + 2.0 * e) / (1.0 + e), 1e-15);
}

TEST(NlmDense, MatchesMaterialisedMatrix) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  FeatureMatrix f(30, 2);
  DescriptorMatrix v(30, 3);
  for (auto& x : f.data()) x = g(rng);
  for (auto& x : v.data()) x = g(rng);
  const auto k = attention_dense(f, Kernel::kExpL2);
  const auto out = nlm_dense(f, v, Kernel::kExpL2, false, kDefaultDenseCap, 2);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 30; ++j) acc += k(i, j) * v(j, ch);
      EXPECT_NEAR(out(i, ch), acc, 1e-12);
    }
  }
}

TEST(NlmDense, CapExceeded) {
  FeatureMatrix f(11, 1);
  DescriptorMatrix v(11, 1);
  EXPECT_THROW(nlm_dense(f, v, Kernel::kGaussian, true, 10), CapExceeded);
  EXPECT_THROW(attention_dense(f, Kernel::kGaussian, 10), CapExceeded);
  EXPECT_NO_THROW(nlm_dense(f, v, Kernel::kGaussian, true, 11));
}

TEST(Compare, IdenticalInputs) {
  DescriptorMatrix a(3, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  a(2, 0) = 0.5;
  const auto m = compare(a, a);
  EXPECT_EQ(m.mean_rel_l2, 0.0);
  EXPECT_EQ(m.max_rel_l2, 0.0);
  EXPECT_NEAR(m.correlation, 1.0, 1e-15);
}

TEST(Compare, HalfScaledApproximation) {
  DescriptorMatrix o(3, 2);
  o(0, 0) = 1.0;
  o(1, 1) = -2.0;
  o(2, 0) = 0.5;
  DescriptorMatrix a = o;
  for (auto& x : a.data()) x *= 0.5;
  const auto m = compare(a, o);
  EXPECT_NEAR(m.mean_rel_l2, 0.5, 1e-15);
  EXPECT_NEAR(m.max_rel_l2, 0.5, 1e-15);
  EXPECT_NEAR(m.correlation, 1.0, 1e-15);
  EXPECT_NEAR(fit_gain(a, o), 2.0, 1e-15);
}

TEST(Compare, ZeroOracleRows) {
  DescriptorMatrix o(2, 1), a(2, 1);
  o(0, 0) = 1.0;
  a(0, 0) = 1.0;
  EXPECT_EQ(compare(a, o).max_rel_l2, 0.0);
  a(1, 0) = 1e-3;
  EXPECT_EQ(compare(a, o).max_rel_l2, 1.0);
}

TEST(Compare, ShapeMismatchThrows) {
  EXPECT_ANY_THROW(compare(DescriptorMatrix(2, 1), DescriptorMatrix(3, 1)));
}

}  // namespace
}  // namespace plf
