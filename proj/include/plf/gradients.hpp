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

#ifndef PLF_GRADIENTS_HPP_
#define PLF_GRADIENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "plf/filter.hpp"

namespace plf {

// dL/dv given dL/dv'. Splat, blur in the opposite axis order to the
// forward pass, slice. In normalised mode grad_out is divided by the stored
// normaliser first.
DescriptorMatrix vjp_descriptors(const FilterTape& tape, const DescriptorMatrix& grad_out);

// dL/df given dL/dv'. Gradient flows only through the barycentric weights
// (piecewise linear in the elevated point) and then through E^T. At simplex
// boundaries the one-sided derivative selected by the rank tie-break is
// returned.
FeatureMatrix vjp_features(const FilterTape& tape, const DescriptorMatrix& descriptors,
                           const DescriptorMatrix& grad_out);

struct GradCheckOptions {
  double descriptor_step = 1e-3;
  double feature_step = 1e-5;
  double margin = 1e-3;
  double descriptor_tolerance = 1e-8;
  double feature_tolerance = 1e-4;
  // Test hook: negates the analytic feature gradient before comparison.
  bool inject_feature_sign_flip = false;
};

struct GradCheckReport {
  double descriptor_max_rel = 0.0;
  double descriptor_mean_rel = 0.0;
  double feature_max_rel = 0.0;
  double feature_mean_rel = 0.0;
  std::size_t descriptor_entries = 0;
  std::size_t feature_points = 0;
  // Points closer than the margin to a simplex boundary; left out of the
  // feature comparison.
  std::size_t skipped_points = 0;
  bool passed = false;

  std::string to_string() const;
};

// Compares both VJPs against central differences of L = sum(w .* v') for a
// random weight matrix w drawn from seed. Per-entry error is
// |analytic - numeric| / max(|numeric|_inf, |analytic|_inf, 1e-7).
GradCheckReport finite_difference_check(const Embedding& emb, const FeatureMatrix& features,
                                        const DescriptorMatrix& descriptors,
                                        const FilterOptions& opts, std::uint64_t seed,
                                        const GradCheckOptions& check = {});

}  // namespace plf

#endif  // PLF_GRADIENTS_HPP_
