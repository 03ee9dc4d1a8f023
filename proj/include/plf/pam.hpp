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

#ifndef PLF_PAM_HPP_
#define PLF_PAM_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "plf/filter.hpp"
#include "plf/matrix.hpp"

namespace plf {

class PamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Regular grid of cells with C channels each, cells in row-major order.
struct GridInput {
  std::vector<std::size_t> dims;  // 1 to 3 spatial axes
  std::vector<double> spacing;    // physical size of a cell along each axis
  Matrix values;                  // N x C

  std::size_t cells() const;
  std::size_t channels() const { return values.cols(); }
};

GridInput make_grid(std::vector<std::size_t> dims, std::vector<double> spacing, Matrix values);

/// Parameters of the Permutohedral block. The feature extractor sees the
/// input channels followed by the coordinate mesh; the descriptor extractor
/// sees the input channels only.
struct PamParams {
  Matrix w_feat;               // F x (C + s)
  std::vector<double> b_feat;  // F
  Matrix w_desc;               // V x C
  std::vector<double> b_desc;  // V
  double leaky_slope = 0.01;
  // Append the block input after the filtered descriptors.
  bool concat_input = false;
  FilterOptions filter;

  static constexpr int kGroups = 2;

  std::size_t in_channels() const { return w_desc.cols(); }
  std::size_t spatial_rank() const { return w_feat.cols() - w_desc.cols(); }
  std::size_t feature_channels() const { return w_feat.rows(); }
  std::size_t descriptor_channels() const { return w_desc.rows(); }
  std::size_t output_channels() const {
    return descriptor_channels() + (concat_input ? in_channels() : 0);
  }
};

// Weights and biases uniform in +-(fan_in)^(-1/2).
PamParams init_pam_params(std::size_t in_channels, std::size_t spatial_rank,
                          std::size_t feature_channels, std::size_t descriptor_channels,
                          std::uint64_t seed);

// N x s matrix; entry (cell, a) = index_a * spacing_a.
Matrix coordinate_mesh(const std::vector<std::size_t>& dims, const std::vector<double>& spacing);

// leaky(W_f [x, mesh] + b_f). pre_activation, if given, receives the affine
// part.
FeatureMatrix extract_features(const GridInput& x, const PamParams& params,
                               Matrix* pre_activation = nullptr);
DescriptorMatrix extract_descriptors(const GridInput& x, const PamParams& params);

struct PamForward {
  Matrix output;                  // N x output_channels
  Matrix inputs;                  // [x, mesh], N x (C + s)
  Matrix pre_activation;          // N x F
  FeatureMatrix features;         // N x F
  DescriptorMatrix descriptors;   // N x V
  std::vector<FilterTape> tapes;  // one per group
};

PamForward pam_forward(const GridInput& x, const PamParams& params);

struct PamGradients {
  Matrix w_feat;
  std::vector<double> b_feat;
  Matrix w_desc;
  std::vector<double> b_desc;
};

// grad_out is N x output_channels; the concatenated input part (if any)
// carries no parameter gradient.
PamGradients pam_backward(const PamForward& fwd, const PamParams& params,
                          const Matrix& grad_out);

// Splits columns [begin, begin + count) out of m.
Matrix column_block(const Matrix& m, std::size_t begin, std::size_t count);

}  // namespace plf

#endif  // PLF_PAM_HPP_
