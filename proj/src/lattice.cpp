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

#include "plf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "plf/parallel.hpp"

namespace plf {
namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw LatticeError(std::string(what) + ": non-finite value");
  }
}

// Locates the enclosing simplex of y (d+1 entries). rank, rem0 have d+1
// entries; bary needs d+2 entries of scratch and holds the weights in the
// first d+1 on return.
void locate(std::span<const double> y, std::span<std::int32_t> rem0,
            std::span<int> rank, std::span<double> bary) {
  const int d1 = static_cast<int>(y.size());
  const int d = d1 - 1;
  const double inv = 1.0 / d1;

  int sum = 0;
  for (int i = 0; i < d1; ++i) {
    const double v = y[i] * inv;
    const double up = std::ceil(v) * d1;
    const double down = std::floor(v) * d1;
    const double r = (up - y[i] < y[i] - down) ? up : down;
    if (std::abs(r) > std::numeric_limits<std::int32_t>::max() / 2) {
      throw LatticeError("elevated coordinate out of lattice key range");
    }
    rem0[i] = static_cast<std::int32_t>(r);
    sum += rem0[i] / d1;
  }

  // Descending rank of the residuals; ties go to the lower index first.
  for (int i = 0; i < d1; ++i) rank[i] = 0;
  for (int i = 0; i < d; ++i) {
    const double di = y[i] - rem0[i];
    for (int j = i + 1; j < d1; ++j) {
      if (di < y[j] - rem0[j]) {
        ++rank[i];
      } else {
        ++rank[j];
      }
    }
  }

  // Repair the zero-sum deficit by moving the rank extremes by d+1.
  if (sum > 0) {
    for (int i = 0; i < d1; ++i) {
      if (rank[i] >= d1 - sum) {
        rem0[i] -= d1;
        rank[i] += sum - d1;
      } else {
        rank[i] += sum;
      }
    }
  } else if (sum < 0) {
    for (int i = 0; i < d1; ++i) {
      if (rank[i] < -sum) {
        rem0[i] += d1;
        rank[i] += d1 + sum;
      } else {
        rank[i] += sum;
      }
    }
  }

  std::fill(bary.begin(), bary.begin() + d1 + 1, 0.0);
  for (int i = 0; i < d1; ++i) {
    const double delta = (y[i] - rem0[i]) * inv;
    bary[d - rank[i]] += delta;
    bary[d + 1 - rank[i]] -= delta;
  }
  bary[0] += 1.0 + bary[d + 1];
}

inline void vertex_key_into(std::span<const std::int32_t> rem0, std::span<const int> rank,
                            int k, std::span<std::int32_t> out) {
  const int d1 = static_cast<int>(rem0.size());
  const int d = d1 - 1;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = rank[j] <= d - k ? rem0[j] + k : rem0[j] + k - d1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Embedding

Embedding make_embedding(int d, std::span<const double> bandwidth) {
  if (d < 1) throw LatticeError("make_embedding: d must be >= 1");
  if (bandwidth.size() != 1 && bandwidth.size() != static_cast<std::size_t>(d)) {
    throw LatticeError("make_embedding: expected 1 or d bandwidths");
  }
  Embedding emb;
  emb.dim_ = d;
  emb.scales_.resize(d);
  emb.bandwidth_.resize(d);
  const double gain = (d + 1) * std::sqrt(2.0 / 3.0);
  for (int i = 0; i < d; ++i) {
    const double b = bandwidth.size() == 1 ? bandwidth[0] : bandwidth[i];
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw LatticeError("make_embedding: bandwidth must be positive and finite");
    }
    emb.bandwidth_[i] = b;
    emb.scales_[i] = gain / std::sqrt((i + 1.0) * (i + 2.0)) / b;
  }
  return emb;
}

Embedding make_embedding(int d, double bandwidth) {
  return make_embedding(d, std::span<const double>(&bandwidth, 1));
}

void Embedding::elevate(std::span<const double> f, std::span<double> y) const {
  double running = 0.0;
  for (int i = dim_; i > 0; --i) {
    const double cf = f[i - 1] * scales_[i - 1];
    y[i] = running - i * cf;
    running += cf;
  }
  y[0] = running;
}

void Embedding::elevate_transpose(std::span<const double> dy, std::span<double> df) const {
  double prefix = 0.0;
  for (int j = 0; j < dim_; ++j) {
    prefix += dy[j];
    df[j] = scales_[j] * (prefix - (j + 1) * dy[j + 1]);
  }
}

Matrix Embedding::matrix() const {
  Matrix e(dim_ + 1, dim_);
  std::vector<double> f(dim_, 0.0), y(dim_ + 1);
  for (int j = 0; j < dim_; ++j) {
    f[j] = 1.0;
    elevate(f, y);
    for (int i = 0; i <= dim_; ++i) e(i, j) = y[i];
    f[j] = 0.0;
  }
  return e;
}

Embedding Embedding::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw LatticeError("Embedding::scaled: factor must be positive and finite");
  }
  Embedding e = *this;
  for (auto& s : e.scales_) s *= factor;
  for (auto& b : e.bandwidth_) b /= factor;
  return e;
}

ElevatedPoint elevate(const Embedding& emb, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(emb.dim())) {
    throw LatticeError("elevate: feature has " + std::to_string(f.size()) +
                       " entries, embedding expects " + std::to_string(emb.dim()));
  }
  check_finite(f, "elevate");
  ElevatedPoint p;
  p.y.resize(emb.dim() + 1);
  emb.elevate(f, p.y);
  return p;
}

// ---------------------------------------------------------------------------
// Keys and simplices

int LatticeKey::remainder() const {
  const int d1 = static_cast<int>(coords.size());
  if (d1 == 0) return -1;
  auto mod = [d1](std::int32_t v) { return ((v % d1) + d1) % d1; };
  const int r = mod(coords[0]);
  for (auto c : coords) {
    if (mod(c) != r) return -1;
  }
  return r;
}

SimplexRecord find_simplex(std::span<const double> y) {
  if (y.size() < 2) throw LatticeError("find_simplex: need d+1 >= 2 coordinates");
  check_finite(y, "find_simplex");
  double sum = 0.0, scale = 1.0;
  for (double v : y) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  if (std::abs(sum) > 1e-9 * static_cast<double>(y.size()) * scale) {
    throw LatticeError("find_simplex: point is off the zero-sum hyperplane");
  }
  const std::size_t d1 = y.size();
  SimplexRecord rec;
  rec.rank.resize(d1);
  rec.rem0.resize(d1);
  std::vector<double> bary(d1 + 1);
  locate(y, rec.rem0, rec.rank, bary);
  bary.resize(d1);
  rec.barycentric = std::move(bary);
  return rec;
}

double boundary_margin(std::span<const double> barycentric) {
  return *std::min_element(barycentric.begin(), barycentric.end());
}

LatticeKey simplex_vertex_key(std::span<const std::int32_t> rem0, std::span<const int> rank,
                              int k) {
  const int d = static_cast<int>(rem0.size()) - 1;
  if (rank.size() != rem0.size()) throw LatticeError("simplex_vertex_key: size mismatch");
  if (k < 0 || k > d) throw LatticeError("simplex_vertex_key: k out of range");
  LatticeKey key;
  key.coords.resize(rem0.size());
  vertex_key_into(rem0, rank, k, key.coords);
  return key;
}

LatticeKey neighbor_key(const LatticeKey& key, int axis, int sign) {
  const int d = key.dim();
  if (axis < 0 || axis > d) throw LatticeError("neighbor_key: axis out of range");
  const int step = sign > 0 ? 1 : -1;
  LatticeKey out = key;
  for (auto& c : out.coords) c += step;
  out.coords[axis] -= step * (d + 1);
  return out;
}

// ---------------------------------------------------------------------------
// VertexTable

VertexTable::VertexTable(int d, std::size_t expected) : dim_(d) {
  if (d < 1) throw LatticeError("VertexTable: d must be >= 1");
  std::size_t cap = 16;
  while (cap < expected * 2) cap <<= 1;
  slots_.assign(cap * slot_stride(), kAbsent);
  mask_ = cap - 1;
  keys_.reserve(expected * d);
}

std::uint64_t VertexTable::hash(std::span<const std::int32_t> key) const {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (std::int32_t c : key) {
    h ^= static_cast<std::uint32_t>(c);
    h *= 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
  }
  return h ^ (h >> 32);
}

std::size_t VertexTable::probe(std::span<const std::int32_t> key, std::uint64_t h) const {
  // Slots hold the vertex index followed by its key, so a probe touches one
  // slot only.
  std::size_t slot = h & mask_;
  const std::size_t stride = slot_stride();
  const std::size_t bytes = sizeof(std::int32_t) * dim_;
  while (true) {
    const std::int32_t* s = slots_.data() + slot * stride;
    if (s[0] == kAbsent || std::memcmp(s + 1, key.data(), bytes) == 0) return slot;
    slot = (slot + 1) & mask_;
  }
}

std::int32_t VertexTable::find(std::span<const std::int32_t> key) const {
  return slots_[probe(key, hash(key)) * slot_stride()];
}

std::int32_t VertexTable::insert(std::span<const std::int32_t> key) {
  return insert_hashed(key, hash(key));
}

void VertexTable::prefetch(std::uint64_t h) const {
  __builtin_prefetch(slots_.data() + (h & mask_) * slot_stride());
}

void VertexTable::find_many(std::span<const std::int32_t> keys, std::span<std::int32_t> out) const {
  const std::size_t m = out.size();
  std::uint64_t hashes[kBatch];
  for (std::size_t b = 0; b < m; b += kBatch) {
    const std::size_t e = std::min(m, b + kBatch);
    for (std::size_t i = b; i < e; ++i) {
      hashes[i - b] = hash(keys.subspan(i * dim_, dim_));
      prefetch(hashes[i - b]);
    }
    for (std::size_t i = b; i < e; ++i) {
      const auto k = keys.subspan(i * dim_, dim_);
      out[i] = slots_[probe(k, hashes[i - b]) * slot_stride()];
    }
  }
}

void VertexTable::insert_many(std::span<const std::int32_t> keys, std::span<std::int32_t> out) {
  const std::size_t m = out.size();
  std::uint64_t hashes[kBatch];
  for (std::size_t b = 0; b < m; b += kBatch) {
    const std::size_t e = std::min(m, b + kBatch);
    for (std::size_t i = b; i < e; ++i) {
      hashes[i - b] = hash(keys.subspan(i * dim_, dim_));
      prefetch(hashes[i - b]);
    }
    for (std::size_t i = b; i < e; ++i) out[i] = insert_hashed(keys.subspan(i * dim_, dim_), hashes[i - b]);
  }
}

std::int32_t VertexTable::insert_hashed(std::span<const std::int32_t> key, std::uint64_t h) {
  std::int32_t* s = slots_.data() + probe(key, h) * slot_stride();
  if (s[0] != kAbsent) return s[0];
  if (count_ >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw LatticeError("VertexTable: too many vertices");
  }
  const auto idx = static_cast<std::int32_t>(count_++);
  keys_.insert(keys_.end(), key.begin(), key.end());
  s[0] = idx;
  std::copy(key.begin(), key.end(), s + 1);
  linked_ = false;
  if (count_ * 2 > mask_ + 1) grow();
  return idx;
}

void VertexTable::grow() {
  const std::size_t stride = slot_stride();
  mask_ = (mask_ + 1) * 2 - 1;
  slots_.assign((mask_ + 1) * stride, kAbsent);
  for (std::size_t i = 0; i < count_; ++i) {
    const auto k = key(static_cast<std::int32_t>(i));
    std::size_t slot = hash(k) & mask_;
    while (slots_[slot * stride] != kAbsent) slot = (slot + 1) & mask_;
    std::int32_t* s = slots_.data() + slot * stride;
    s[0] = static_cast<std::int32_t>(i);
    std::copy(k.begin(), k.end(), s + 1);
  }
}

LatticeKey VertexTable::full_key(std::int32_t index) const {
  LatticeKey k;
  const auto stored = key(index);
  k.coords.assign(stored.begin(), stored.end());
  std::int32_t sum = 0;
  for (auto c : stored) sum += c;
  k.coords.push_back(-sum);
  return k;
}

void VertexTable::neighbor_keys_into(std::span<const std::int32_t> key,
                                     std::span<std::int32_t> out) const {
  // Layout matches neighbor(): axis-major, minus before plus.
  const int d1 = dim_ + 1;
  std::int32_t* o = out.data();
  for (int axis = 0; axis < d1; ++axis) {
    for (int step : {-1, 1}) {
      for (int j = 0; j < dim_; ++j) *o++ = key[j] + step - (j == axis ? step * d1 : 0);
    }
  }
}

void VertexTable::link_neighbors(int threads) { link_neighbors(threads, {}, 0); }

void VertexTable::link_neighbors(int threads, std::vector<std::int32_t> known,
                                 std::size_t known_vertices) {
  const std::size_t d1 = static_cast<std::size_t>(dim_) + 1;
  if (known.size() != known_vertices * d1 * 2 || known_vertices > count_) {
    throw LatticeError("link_neighbors: known links do not match vertex count");
  }
  neighbors_.assign(count_ * d1 * 2, kAbsent);
  std::copy(known.begin(), known.end(), neighbors_.begin());
  parallel_for(count_ - known_vertices, threads, [&](std::size_t begin, std::size_t end) {
    begin += known_vertices;
    end += known_vertices;
    constexpr std::size_t kVertices = 4;
    std::vector<std::int32_t> probe_keys(kVertices * d1 * 2 * dim_);
    for (std::size_t v0 = begin; v0 < end; v0 += kVertices) {
      const std::size_t v1 = std::min(end, v0 + kVertices);
      for (std::size_t v = v0; v < v1; ++v) {
        neighbor_keys_into(key(static_cast<std::int32_t>(v)),
                           std::span(probe_keys).subspan((v - v0) * d1 * 2 * dim_, d1 * 2 * dim_));
      }
      find_many(std::span(probe_keys).first((v1 - v0) * d1 * 2 * dim_),
                std::span(neighbors_).subspan(v0 * d1 * 2, (v1 - v0) * d1 * 2));
    }
  });
  linked_ = true;
}

// ---------------------------------------------------------------------------
// Lattice construction

SimplexRecords::SimplexRecords(std::size_t n, int d)
    : n_(n),
      dim_(d),
      rank_(n * (d + 1)),
      rem0_(n * (d + 1)),
      bary_(n * (d + 1)),
      ids_(n * (d + 1), VertexTable::kAbsent) {}

SimplexRecord SimplexRecords::at(std::size_t i) const {
  SimplexRecord r;
  auto rk = rank(i);
  auto r0 = rem0(i);
  auto b = barycentric(i);
  auto v = vertices(i);
  r.rank.assign(rk.begin(), rk.end());
  r.rem0.assign(r0.begin(), r0.end());
  r.barycentric.assign(b.begin(), b.end());
  r.vertex_ids.assign(v.begin(), v.end());
  return r;
}

Lattice build_lattice(const Embedding& emb, const FeatureMatrix& features,
                      const LatticeOptions& opts) {
  const int d = emb.dim();
  const std::size_t n = features.rows();
  if (d < 1) throw LatticeError("build_lattice: uninitialised embedding");
  if (features.cols() != static_cast<std::size_t>(d)) {
    throw LatticeError("build_lattice: features have " + std::to_string(features.cols()) +
                       " columns, embedding expects " + std::to_string(d));
  }
  if (n == 0) throw LatticeError("build_lattice: need at least one point");
  check_finite(features.data(), "build_lattice");

  Lattice lat{emb, VertexTable(d, n * (d + 1) / 2 + 16), SimplexRecords(n, d), 0};
  auto& records = lat.records;

  parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(d + 1), bary(d + 2);
    for (std::size_t i = begin; i < end; ++i) {
      emb.elevate(features.row(i), y);
      locate(y, records.rem0(i), records.rank(i), bary);
      std::copy_n(bary.begin(), d + 1, records.barycentric(i).begin());
    }
  });

  // Sequential insertion in point order fixes the vertex numbering.
  const int d1 = d + 1;
  constexpr std::size_t kPoints = 8;
  std::vector<std::int32_t> keys(kPoints * d1 * d);
  for (std::size_t i0 = 0; i0 < n; i0 += kPoints) {
    const std::size_t i1 = std::min(n, i0 + kPoints);
    for (std::size_t i = i0; i < i1; ++i) {
      for (int k = 0; k <= d; ++k) {
        vertex_key_into(records.rem0(i), records.rank(i), k,
                        std::span(keys).subspan(((i - i0) * d1 + k) * d, d));
      }
    }
    lat.table.insert_many(std::span(keys).first((i1 - i0) * d1 * d),
                          records.vertices_block(i0, i1 - i0));
  }
  lat.simplex_vertices = lat.table.size();

  if (opts.rings < 0) throw LatticeError("build_lattice: rings must be >= 0");
  // Every vertex expanded in a ring round has all its neighbours present, so
  // its links are recorded here instead of being looked up again.
  std::size_t ring_begin = 0;
  std::vector<std::int32_t> links;
  const std::size_t per_vertex = static_cast<std::size_t>(d1) * 2;
  std::vector<std::int32_t> nkeys(per_vertex * d);
  for (int round = 0; round < opts.rings; ++round) {
    const std::size_t ring_end = lat.table.size();
    links.resize(ring_end * per_vertex);
    for (std::size_t v = ring_begin; v < ring_end; ++v) {
      lat.table.neighbor_keys_into(lat.table.key(static_cast<std::int32_t>(v)), nkeys);
      lat.table.insert_many(nkeys, std::span(links).subspan(v * per_vertex, per_vertex));
    }
    ring_begin = ring_end;
  }

  lat.table.link_neighbors(opts.threads, std::move(links), ring_begin);
  return lat;
}

}  // namespace plf
