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

#ifndef PLF_DENSE_ORACLE_HPP_
#define PLF_DENSE_ORACLE_HPP_

#include <cstddef>
#include <stdexcept>

#include "plf/matrix.hpp"

namespace plf {

class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

enum class Kernel {
  kGaussian,  // exp(-|fi - fj|^2 / 2)
  kExpL2,     // exp(-|fi - fj|)
};

inline constexpr std::size_t kDefaultDenseCap = 5000;

double kernel_value(Kernel kernel, double squared_distance);

// Materialised N x N attention matrix.
Matrix attention_dense(const FeatureMatrix& features, Kernel kernel,
                       std::size_t cap = kDefaultDenseCap);

// v'_i = sum_j K_ij v_j, optionally divided by sum_j K_ij. Rows are computed
// independently without materialising K.
DescriptorMatrix nlm_dense(const FeatureMatrix& features, const DescriptorMatrix& descriptors,
                           Kernel kernel, bool normalize, std::size_t cap = kDefaultDenseCap,
                           int threads = 1);

struct CompareMetrics {
  double mean_rel_l2 = 0.0;
  double max_rel_l2 = 0.0;
  double correlation = 0.0;
};

// Per-point |a_i - o_i| / |o_i| (rows with |o_i| == 0 count as 0 when a_i
// also vanishes, 1 otherwise) and Pearson correlation over all entries.
CompareMetrics compare(const DescriptorMatrix& approx, const DescriptorMatrix& oracle);

// Least-squares scalar g minimising |g * approx - oracle|.
double fit_gain(const DescriptorMatrix& approx, const DescriptorMatrix& oracle);

}  // namespace plf

#endif  // PLF_DENSE_ORACLE_HPP_
