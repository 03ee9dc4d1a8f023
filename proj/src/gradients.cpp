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

#include "plf/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "plf/parallel.hpp"

namespace plf {
namespace {

BlurOrder opposite(BlurOrder o) {
  return o == BlurOrder::kForward ? BlurOrder::kReverse : BlurOrder::kForward;
}

void check_grad_shape(const FilterTape& tape, const DescriptorMatrix& grad_out) {
  if (grad_out.rows() != tape.lattice.records.size() || grad_out.cols() != tape.channels) {
    throw FilterError("gradient shape " + std::to_string(grad_out.rows()) + "x" +
                      std::to_string(grad_out.cols()) + " does not match tape " +
                      std::to_string(tape.lattice.records.size()) + "x" +
                      std::to_string(tape.channels));
  }
}

// Gradient with respect to the raw (pre-division) sliced channels. In
// normalised mode the trailing channel carries the quotient-rule term
// -<g, out> / den.
DescriptorMatrix raw_output_gradient(const FilterTape& tape, const DescriptorMatrix& grad_out,
                                     bool with_homogeneous) {
  if (!tape.options.normalize) return grad_out;
  const std::size_t c = tape.channels;
  DescriptorMatrix g(grad_out.rows(), c + (with_homogeneous ? 1 : 0));
  for (std::size_t i = 0; i < grad_out.rows(); ++i) {
    const double den = tape.normalizer[i];
    double dot = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) {
      g(i, ch) = grad_out(i, ch) / den;
      dot += grad_out(i, ch) * tape.output(i, ch);
    }
    if (with_homogeneous) g(i, c) = -dot / den;
  }
  return g;
}

}  // namespace

DescriptorMatrix vjp_descriptors(const FilterTape& tape, const DescriptorMatrix& grad_out) {
  check_grad_shape(tape, grad_out);
  const auto& lat = tape.lattice;
  const auto g = raw_output_gradient(tape, grad_out, false);
  auto values = splat(lat.records, lat.table.size(), g);
  values = blur(lat.table, std::move(values), opposite(tape.options.blur_order),
                tape.options.threads, tape.options.refinement);
  return slice_raw(values, lat.records, tape.options.threads);
}

FeatureMatrix vjp_features(const FilterTape& tape, const DescriptorMatrix& descriptors,
                           const DescriptorMatrix& grad_out) {
  check_grad_shape(tape, grad_out);
  if (tape.blurred.empty()) throw FilterError("vjp_features: tape holds no blurred values");
  if (descriptors.rows() != grad_out.rows() || descriptors.cols() != tape.channels) {
    throw FilterError("vjp_features: descriptors do not match tape");
  }
  const auto& lat = tape.lattice;
  const auto& records = lat.records;
  const bool homogeneous = tape.options.normalize;
  const std::size_t c = tape.channels;
  const std::size_t ca = c + (homogeneous ? 1 : 0);

  const auto g = raw_output_gradient(tape, grad_out, true);
  auto back = splat(records, lat.table.size(), g);
  back = blur(lat.table, std::move(back), opposite(tape.options.blur_order),
              tape.options.threads, tape.options.refinement);

  const int d = records.dim();
  const int d1 = d + 1;
  const double inv = 1.0 / d1;
  FeatureMatrix grad(records.size(), d);
  parallel_for(records.size(), tape.options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dldb(d1), dy(d1);
    for (std::size_t i = begin; i < end; ++i) {
      const auto ids = records.vertices(i);
      const auto v = descriptors.row(i);
      const auto gi = g.row(i);
      for (int k = 0; k < d1; ++k) {
        const auto fwd = tape.blurred.at(static_cast<std::size_t>(ids[k]));
        const auto rev = back.at(static_cast<std::size_t>(ids[k]));
        // Slice side: incoming gradient against forward-blurred values.
        // Splat side: own descriptor against reverse-blurred gradient.
        double s = 0.0;
        for (std::size_t ch = 0; ch < ca; ++ch) {
          const double vi = ch < c ? v[ch] : 1.0;
          s += gi[ch] * fwd[ch] + vi * rev[ch];
        }
        dldb[k] = s;
      }
      // d b_k / d y_m = ([k == d - rank_m] - [k == (d + 1 - rank_m) mod (d+1)]) / (d+1)
      const auto rank = records.rank(i);
      for (int m = 0; m < d1; ++m) {
        const int r = rank[m];
        dy[m] = (dldb[d - r] - dldb[(d1 - r) % d1]) * inv;
      }
      lat.embedding.elevate_transpose(dy, grad.row(i));
    }
  });
  return grad;
}

// ---------------------------------------------------------------------------

std::string GradCheckReport::to_string() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "descriptor_max_rel=%.3e descriptor_mean_rel=%.3e descriptor_entries=%zu\n"
                "feature_max_rel=%.3e feature_mean_rel=%.3e feature_points=%zu "
                "skipped_points=%zu\n"
                "result=%s\n",
                descriptor_max_rel, descriptor_mean_rel, descriptor_entries, feature_max_rel,
                feature_mean_rel, feature_points, skipped_points, passed ? "PASS" : "FAIL");
  return buf;
}

namespace {

double weighted_sum(const DescriptorMatrix& out, const DescriptorMatrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * w.data()[i];
  return s;
}

void summarize(const std::vector<double>& analytic, const std::vector<double>& numeric,
               double& max_rel, double& mean_rel) {
  max_rel = mean_rel = 0.0;
  if (analytic.empty()) return;
  double scale = 1e-7;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double e = std::abs(analytic[i] - numeric[i]) / scale;
    max_rel = std::max(max_rel, e);
    mean_rel += e;
  }
  mean_rel /= static_cast<double>(analytic.size());
}

}  // namespace

GradCheckReport finite_difference_check(const Embedding& emb, const FeatureMatrix& features,
                                        const DescriptorMatrix& descriptors,
                                        const FilterOptions& opts, std::uint64_t seed,
                                        const GradCheckOptions& check) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  DescriptorMatrix w(descriptors.rows(), descriptors.cols());
  for (auto& x : w.data()) x = uni(rng);

  auto loss = [&](const FeatureMatrix& f, const DescriptorMatrix& v) {
    return weighted_sum(permutohedral_filter(emb, f, v, opts), w);
  };

  auto fwd = permutohedral_filter_with_tape(emb, features, descriptors, opts);
  const auto gv = vjp_descriptors(fwd.tape, w);
  auto gf = vjp_features(fwd.tape, descriptors, w);
  if (check.inject_feature_sign_flip) {
    for (auto& x : gf.data()) x = -x;
  }

  GradCheckReport report;
  {
    std::vector<double> analytic, numeric;
    DescriptorMatrix v = descriptors;
    const double h = check.descriptor_step;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v.data()[i];
      v.data()[i] = orig + h;
      const double lp = loss(features, v);
      v.data()[i] = orig - h;
      const double lm = loss(features, v);
      v.data()[i] = orig;
      numeric.push_back((lp - lm) / (2 * h));
      analytic.push_back(gv.data()[i]);
    }
    summarize(analytic, numeric, report.descriptor_max_rel, report.descriptor_mean_rel);
    report.descriptor_entries = analytic.size();
  }
  {
    std::vector<double> analytic, numeric;
    FeatureMatrix f = features;
    const double h = check.feature_step;
    const auto& records = fwd.tape.lattice.records;
    for (std::size_t i = 0; i < f.rows(); ++i) {
      if (boundary_margin(records.barycentric(i)) < check.margin) {
        ++report.skipped_points;
        continue;
      }
      ++report.feature_points;
      for (std::size_t j = 0; j < f.cols(); ++j) {
        const double orig = f(i, j);
        f(i, j) = orig + h;
        const double lp = loss(f, descriptors);
        f(i, j) = orig - h;
        const double lm = loss(f, descriptors);
        f(i, j) = orig;
        numeric.push_back((lp - lm) / (2 * h));
        analytic.push_back(gf(i, j));
      }
    }
    summarize(analytic, numeric, report.feature_max_rel, report.feature_mean_rel);
  }
  report.passed = report.descriptor_max_rel <= check.descriptor_tolerance &&
                  report.feature_max_rel <= check.feature_tolerance;
  return report;
}

}  // namespace plf
