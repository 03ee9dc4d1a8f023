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

#ifndef PLF_FILTER_HPP_
#define PLF_FILTER_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "plf/lattice.hpp"
#include "plf/matrix.hpp"

namespace plf {

class FilterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BlurOrder { kForward, kReverse };

struct FilterOptions {
  // Append a ones channel, filter it alongside, and divide by it at slice.
  bool normalize = true;
  BlurOrder blur_order = BlurOrder::kForward;
  // Lattice refinement m in [1, 4]. The lattice is made sqrt(m)/kappa_m
  // times finer than the embedding's and blurred with m (1,2,1)/4 passes per
  // axis, m rings of neighbour vertices are instantiated. m = 1 is the
  // classic single-pass lattice. kappa_m comes from calibration against the
  // dense Gaussian oracle (see refinement_calibration).
  int refinement = 2;
  // Splat points in a canonical order derived from their bits, so permuting
  // the input permutes the output bitwise. Costs an O(N log N) sort.
  bool order_invariant = false;
  int threads = 1;
};

/// Dense per-vertex accumulators, vertex-major.
class VertexValues {
 public:
  VertexValues() = default;
  VertexValues(std::size_t vertices, std::size_t channels)
      : vertices_(vertices), channels_(channels), data_(vertices * channels, 0.0) {}

  std::size_t vertices() const { return vertices_; }
  std::size_t channels() const { return channels_; }
  std::span<double> at(std::size_t v) { return {data_.data() + v * channels_, channels_}; }
  std::span<const double> at(std::size_t v) const {
    return {data_.data() + v * channels_, channels_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  std::size_t vertices_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Scatter each descriptor row onto its simplex vertices with barycentric
// weights. With homogeneous=true an extra trailing channel receives the
// weights themselves. order, if non-empty, is the point visiting order.
VertexValues splat(const SimplexRecords& records, std::size_t num_vertices,
                   const DescriptorMatrix& descriptors, bool homogeneous = false,
                   std::span<const std::size_t> order = {});

// One (1,2,1)/4 pass along a single lattice axis, in -> out.
void blur_axis(const VertexTable& table, const VertexValues& in, VertexValues& out, int axis,
               int threads = 1);

// (1,2,1)/4 pass along each lattice axis; absent neighbours read as zero.
// kReverse walks the axes d..0 and is the transpose of kForward. passes > 1
// repeats the whole sweep.
VertexValues blur(const VertexTable& table, VertexValues values, BlurOrder order,
                  int threads = 1, int passes = 1);

inline constexpr int kMaxRefinement = 4;

// Bandwidth correction kappa_m for refinement m.
double refinement_calibration(int refinement);

// The embedding the lattice is actually built on for a given refinement:
// every scale multiplied by sqrt(m) / kappa_m.
Embedding refine_embedding(const Embedding& emb, int refinement);

// Barycentric gather of all channels, no normalisation.
DescriptorMatrix slice_raw(const VertexValues& values, const SimplexRecords& records,
                           int threads = 1);

// With normalize=true the last channel of values is the homogeneous one;
// the result drops it and divides the rest by it. Throws FilterError if a
// divisor falls below 1e-300.
DescriptorMatrix slice(const VertexValues& values, const SimplexRecords& records,
                       bool normalize, int threads = 1);

// Point visiting order used when FilterOptions::order_invariant is set.
std::vector<std::size_t> canonical_point_order(const FeatureMatrix& features,
                                               const DescriptorMatrix& descriptors);

/// Everything the backward pass needs from one forward call.
struct FilterTape {
  Lattice lattice;
  FilterOptions options;
  std::size_t channels = 0;
  // Forward-blurred splat of the (ones-augmented when normalising)
  // descriptors.
  VertexValues blurred;
  // Sliced homogeneous channel, one entry per point. Empty when not
  // normalising.
  std::vector<double> normalizer;
  DescriptorMatrix output;
};

struct FilterResult {
  DescriptorMatrix output;
  FilterTape tape;
};

FilterResult permutohedral_filter_with_tape(const Embedding& emb, const FeatureMatrix& features,
                                            const DescriptorMatrix& descriptors,
                                            const FilterOptions& opts = {});

DescriptorMatrix permutohedral_filter(const Embedding& emb, const FeatureMatrix& features,
                                      const DescriptorMatrix& descriptors,
                                      const FilterOptions& opts = {});

}  // namespace plf

#endif  // PLF_FILTER_HPP_
