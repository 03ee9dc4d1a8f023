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

#include "plf/filter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "plf/parallel.hpp"

namespace plf {

VertexValues splat(const SimplexRecords& records, std::size_t num_vertices,
                   const DescriptorMatrix& descriptors, bool homogeneous,
                   std::span<const std::size_t> order) {
  if (descriptors.rows() != records.size()) {
    throw FilterError("splat: " + std::to_string(descriptors.rows()) + " descriptor rows for " +
                      std::to_string(records.size()) + " points");
  }
  if (!order.empty() && order.size() != records.size()) {
    throw FilterError("splat: visiting order has wrong length");
  }
  const std::size_t c = descriptors.cols();
  VertexValues values(num_vertices, c + (homogeneous ? 1 : 0));
  const int d1 = records.dim() + 1;
  for (std::size_t p = 0; p < records.size(); ++p) {
    const std::size_t i = order.empty() ? p : order[p];
    const auto bary = records.barycentric(i);
    const auto ids = records.vertices(i);
    const auto v = descriptors.row(i);
    for (int k = 0; k < d1; ++k) {
      auto acc = values.at(static_cast<std::size_t>(ids[k]));
      const double w = bary[k];
      for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += w * v[ch];
      if (homogeneous) acc[c] += w;
    }
  }
  return values;
}

double refinement_calibration(int refinement) {
  // Fitted so normalised output best matches exp(-|fi - fj|^2 / 2) on unit
  // Gaussian features, d in [1, 6].
  static constexpr double kKappa[kMaxRefinement] = {1.0, 1.02, 1.06, 1.10};
  if (refinement < 1 || refinement > kMaxRefinement) {
    throw FilterError("refinement must be in [1, " + std::to_string(kMaxRefinement) + "]");
  }
  return kKappa[refinement - 1];
}

Embedding refine_embedding(const Embedding& emb, int refinement) {
  const double kappa = refinement_calibration(refinement);
  if (refinement == 1) return emb;
  return emb.scaled(std::sqrt(static_cast<double>(refinement)) / kappa);
}

void blur_axis(const VertexTable& table, const VertexValues& in, VertexValues& out, int axis,
               int threads) {
  if (in.vertices() != table.size() || out.vertices() != in.vertices() ||
      out.channels() != in.channels()) {
    throw FilterError("blur: values not aligned with vertex table");
  }
  if (!table.linked()) throw FilterError("blur: vertex table has no neighbour links");
  if (axis < 0 || axis > table.dim()) throw FilterError("blur: axis out of range");
  const std::size_t c = in.channels();
  parallel_for(in.vertices(), threads, [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kAhead = 16;
    for (std::size_t v = begin; v < end; ++v) {
      if (v + kAhead < end) {
        const auto w = static_cast<std::int32_t>(v + kAhead);
        const auto a = table.neighbor(w, axis, -1), b = table.neighbor(w, axis, +1);
        if (a != VertexTable::kAbsent) __builtin_prefetch(in.at(a).data());
        if (b != VertexTable::kAbsent) __builtin_prefetch(in.at(b).data());
      }
      const auto self = in.at(v);
      auto dst = out.at(v);
      const auto lo = table.neighbor(static_cast<std::int32_t>(v), axis, -1);
      const auto hi = table.neighbor(static_cast<std::int32_t>(v), axis, +1);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double m = lo == VertexTable::kAbsent ? 0.0 : in.at(lo)[ch];
        const double p = hi == VertexTable::kAbsent ? 0.0 : in.at(hi)[ch];
        dst[ch] = (m + 2.0 * self[ch] + p) * 0.25;
      }
    }
  });
}

VertexValues blur(const VertexTable& table, VertexValues values, BlurOrder order, int threads,
                  int passes) {
  if (passes < 0) throw FilterError("blur: passes must be >= 0");
  const int d1 = table.dim() + 1;
  VertexValues scratch(values.vertices(), values.channels());
  for (int step = 0; step < d1 * passes; ++step) {
    const int axis = order == BlurOrder::kForward ? step % d1 : d1 - 1 - step % d1;
    blur_axis(table, values, scratch, axis, threads);
    std::swap(values, scratch);
  }
  return values;
}

DescriptorMatrix slice_raw(const VertexValues& values, const SimplexRecords& records,
                           int threads) {
  const std::size_t c = values.channels();
  const int d1 = records.dim() + 1;
  DescriptorMatrix out(records.size(), c);
  parallel_for(records.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto bary = records.barycentric(i);
      const auto ids = records.vertices(i);
      auto row = out.row(i);
      for (int k = 0; k < d1; ++k) {
        const auto val = values.at(static_cast<std::size_t>(ids[k]));
        for (std::size_t ch = 0; ch < c; ++ch) row[ch] += bary[k] * val[ch];
      }
    }
  });
  return out;
}

namespace {

DescriptorMatrix normalize_rows(const DescriptorMatrix& raw, std::vector<double>* normalizer) {
  const std::size_t c = raw.cols() - 1;
  DescriptorMatrix out(raw.rows(), c);
  if (normalizer) normalizer->resize(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const double den = raw(i, c);
    if (!(den >= 1e-300)) {
      throw FilterError("slice: degenerate normaliser " + std::to_string(den) + " at point " +
                        std::to_string(i));
    }
    for (std::size_t ch = 0; ch < c; ++ch) out(i, ch) = raw(i, ch) / den;
    if (normalizer) (*normalizer)[i] = den;
  }
  return out;
}

}  // namespace

DescriptorMatrix slice(const VertexValues& values, const SimplexRecords& records, bool normalize,
                       int threads) {
  auto raw = slice_raw(values, records, threads);
  if (!normalize) return raw;
  if (raw.cols() == 0) throw FilterError("slice: no homogeneous channel");
  return normalize_rows(raw, nullptr);
}

std::vector<std::size_t> canonical_point_order(const FeatureMatrix& features,
                                               const DescriptorMatrix& descriptors) {
  std::vector<std::size_t> order(features.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto bits_less = [](std::span<const double> a, std::span<const double> b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const auto x = std::bit_cast<std::uint64_t>(a[j]);
      const auto y = std::bit_cast<std::uint64_t>(b[j]);
      if (x != y) return x < y;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bits_less(features.row(a), features.row(b))) return true;
    if (bits_less(features.row(b), features.row(a))) return false;
    return bits_less(descriptors.row(a), descriptors.row(b));
  });
  return order;
}

FilterResult permutohedral_filter_with_tape(const Embedding& emb, const FeatureMatrix& features,
                                            const DescriptorMatrix& descriptors,
                                            const FilterOptions& opts) {
  if (features.rows() != descriptors.rows()) {
    throw FilterError("permutohedral_filter: " + std::to_string(features.rows()) +
                      " feature rows vs " + std::to_string(descriptors.rows()) +
                      " descriptor rows");
  }
  FilterResult result;
  FilterTape& tape = result.tape;
  tape.options = opts;
  tape.channels = descriptors.cols();
  tape.lattice = build_lattice(refine_embedding(emb, opts.refinement), features,
                               {opts.refinement, opts.threads});

  std::vector<std::size_t> order;
  if (opts.order_invariant) order = canonical_point_order(features, descriptors);

  auto splatted = splat(tape.lattice.records, tape.lattice.table.size(), descriptors,
                        opts.normalize, order);
  tape.blurred = blur(tape.lattice.table, std::move(splatted), opts.blur_order, opts.threads,
                      opts.refinement);
  auto raw = slice_raw(tape.blurred, tape.lattice.records, opts.threads);
  tape.output = opts.normalize ? normalize_rows(raw, &tape.normalizer) : std::move(raw);
  result.output = tape.output;
  return result;
}

DescriptorMatrix permutohedral_filter(const Embedding& emb, const FeatureMatrix& features,
                                      const DescriptorMatrix& descriptors,
                                      const FilterOptions& opts) {
  return permutohedral_filter_with_tape(emb, features, descriptors, opts).output;
}

}  // namespace plf
