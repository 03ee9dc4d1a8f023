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

#ifndef PLF_LATTICE_HPP_
#define PLF_LATTICE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "plf/huge_pages.hpp"
#include "plf/matrix.hpp"

namespace plf {

class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear map from R^d feature space onto the zero-sum hyperplane of
/// R^{d+1}. Coordinate i is multiplied by
///   (d+1) * sqrt(2/3) / sqrt((i+1)(i+2)) / bandwidth[i]
/// and then spread over d+1 coordinates so that pairwise squared distances
/// are (d+1)^2 * 2/3 times the bandwidth-normalised squared distances.
class Embedding {
 public:
  Embedding() = default;

  int dim() const { return dim_; }
  std::span<const double> scales() const { return scales_; }
  std::span<const double> bandwidth() const { return bandwidth_; }

  // y must have dim()+1 entries.
  void elevate(std::span<const double> f, std::span<double> y) const;
  // Adjoint of elevate: df = E^T dy.
  void elevate_transpose(std::span<const double> dy, std::span<double> df) const;
  // Explicit (d+1) x d matrix E.
  Matrix matrix() const;
  // Same embedding with every scale multiplied by factor (bandwidths divided).
  Embedding scaled(double factor) const;

 private:
  friend Embedding make_embedding(int d, std::span<const double> bandwidth);
  int dim_ = 0;
  std::vector<double> scales_;
  std::vector<double> bandwidth_;
};

// bandwidth may hold a single value (broadcast) or d values.
Embedding make_embedding(int d, std::span<const double> bandwidth);
Embedding make_embedding(int d, double bandwidth = 1.0);

/// A point on the zero-sum hyperplane of R^{d+1}.
struct ElevatedPoint {
  std::vector<double> y;
};

// Throws LatticeError for non-finite input or a dimension mismatch.
ElevatedPoint elevate(const Embedding& emb, std::span<const double> f);

/// Full d+1 integer coordinates of a lattice vertex. All coordinates share
/// the same remainder modulo d+1 and sum to zero.
struct LatticeKey {
  std::vector<std::int32_t> coords;

  int dim() const { return static_cast<int>(coords.size()) - 1; }
  // Common remainder in [0, d]; -1 if coordinates disagree.
  int remainder() const;
  bool operator==(const LatticeKey&) const = default;
};

/// Enclosing simplex of one elevated point.
struct SimplexRecord {
  std::vector<int> rank;                 // permutation of {0..d}
  std::vector<std::int32_t> rem0;        // remainder-0 base vertex
  std::vector<double> barycentric;       // d+1 weights; weight k pairs with vertex k
  std::vector<std::int32_t> vertex_ids;  // filled by build_lattice

  bool operator==(const SimplexRecord&) const = default;
};

SimplexRecord find_simplex(std::span<const double> y);

// Smallest barycentric weight; the distance (in barycentric units) to the
// nearest face where the enclosing simplex changes.
double boundary_margin(std::span<const double> barycentric);

LatticeKey simplex_vertex_key(std::span<const std::int32_t> rem0,
                              std::span<const int> rank, int k);

// sign > 0: key + 1 - (d+1) e_axis; sign < 0: key - 1 + (d+1) e_axis.
LatticeKey neighbor_key(const LatticeKey& key, int axis, int sign);

/// Open-addressed map from lattice key (first d coordinates) to a dense
/// vertex index. Indices are assigned in insertion order, so the observable
/// result depends only on the sequence of inserted keys.
class VertexTable {
 public:
  static constexpr std::int32_t kAbsent = -1;

  explicit VertexTable(int d = 1, std::size_t expected = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return count_; }

  // key holds the first d coordinates.
  std::int32_t find(std::span<const std::int32_t> key) const;
  std::int32_t insert(std::span<const std::int32_t> key);
  // keys holds out.size() keys back to back. Same results as calling
  // find/insert on each in order; slots are prefetched in batches.
  void find_many(std::span<const std::int32_t> keys, std::span<std::int32_t> out) const;
  void insert_many(std::span<const std::int32_t> keys, std::span<std::int32_t> out);
  // The 2(d+1) neighbour keys of key, in the order used by neighbor().
  void neighbor_keys_into(std::span<const std::int32_t> key, std::span<std::int32_t> out) const;

  std::span<const std::int32_t> key(std::int32_t index) const {
    return {keys_.data() + static_cast<std::size_t>(index) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  LatticeKey full_key(std::int32_t index) const;

  // Resolves neighbor indices along every axis for every vertex.
  void link_neighbors(int threads = 1);
  // As above, with links of the first known_vertices vertices already given
  // (layout as neighbor(): vertex, axis, minus/plus).
  void link_neighbors(int threads, std::vector<std::int32_t> known, std::size_t known_vertices);
  bool linked() const { return linked_; }
  std::int32_t neighbor(std::int32_t index, int axis, int sign) const {
    return neighbors_[(static_cast<std::size_t>(index) * (dim_ + 1) + axis) * 2 +
                      (sign > 0 ? 1 : 0)];
  }

 private:
  static constexpr std::size_t kBatch = 64;
  std::size_t slot_stride() const { return static_cast<std::size_t>(dim_) + 1; }
  void prefetch(std::uint64_t h) const;
  std::int32_t insert_hashed(std::span<const std::int32_t> key, std::uint64_t h);
  std::uint64_t hash(std::span<const std::int32_t> key) const;
  std::size_t probe(std::span<const std::int32_t> key, std::uint64_t h) const;
  void grow();

  int dim_;
  std::size_t count_ = 0;
  std::vector<std::int32_t> keys_;
  HugeVector<std::int32_t> slots_;
  std::size_t mask_ = 0;
  HugeVector<std::int32_t> neighbors_;
  bool linked_ = false;
};

/// Simplex records for N points in flat storage.
class SimplexRecords {
 public:
  SimplexRecords() = default;
  SimplexRecords(std::size_t n, int d);

  std::size_t size() const { return n_; }
  int dim() const { return dim_; }

  std::span<const int> rank(std::size_t i) const { return {rank_.data() + i * (dim_ + 1), stride()}; }
  std::span<int> rank(std::size_t i) { return {rank_.data() + i * (dim_ + 1), stride()}; }
  std::span<const std::int32_t> rem0(std::size_t i) const { return {rem0_.data() + i * (dim_ + 1), stride()}; }
  std::span<std::int32_t> rem0(std::size_t i) { return {rem0_.data() + i * (dim_ + 1), stride()}; }
  std::span<const double> barycentric(std::size_t i) const { return {bary_.data() + i * (dim_ + 1), stride()}; }
  std::span<double> barycentric(std::size_t i) { return {bary_.data() + i * (dim_ + 1), stride()}; }
  std::span<const std::int32_t> vertices(std::size_t i) const { return {ids_.data() + i * (dim_ + 1), stride()}; }
  std::span<std::int32_t> vertices(std::size_t i) { return {ids_.data() + i * (dim_ + 1), stride()}; }
  // Vertex ids of points [first, first + count), back to back.
  std::span<std::int32_t> vertices_block(std::size_t first, std::size_t count) {
    return {ids_.data() + first * stride(), count * stride()};
  }

  SimplexRecord at(std::size_t i) const;

 private:
  std::size_t stride() const { return static_cast<std::size_t>(dim_) + 1; }
  std::size_t n_ = 0;
  int dim_ = 0;
  std::vector<int> rank_;
  std::vector<std::int32_t> rem0_;
  std::vector<double> bary_;
  std::vector<std::int32_t> ids_;
};

struct LatticeOptions {
  // Rounds of neighbour expansion around the simplex vertices. Round r adds
  // every axis neighbour of the vertices present after round r-1, so blur
  // mass that travels up to `rings` steps off the occupied set is kept.
  int rings = 0;
  int threads = 1;
};

struct Lattice {
  Embedding embedding;
  VertexTable table;
  SimplexRecords records;
  // Number of vertices that belong to some enclosing simplex; ring vertices
  // (if any) follow them.
  std::size_t simplex_vertices = 0;
};

Lattice build_lattice(const Embedding& emb, const FeatureMatrix& features,
                      const LatticeOptions& opts = {});

}  // namespace plf

#endif  // PLF_LATTICE_HPP_
