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

#include "plf/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plf/parallel.hpp"

namespace plf {
namespace {

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw CapExceeded("dense path limited to " + std::to_string(cap) + " points, got " +
                      std::to_string(n));
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

}  // namespace

double kernel_value(Kernel kernel, double squared_distance) {
  return kernel == Kernel::kGaussian ? std::exp(-0.5 * squared_distance)
                                     : std::exp(-std::sqrt(squared_distance));
}

Matrix attention_dense(const FeatureMatrix& features, Kernel kernel, std::size_t cap) {
  const std::size_t n = features.rows();
  check_cap(n, cap);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = kernel_value(kernel, squared_distance(features.row(i), features.row(j)));
      a(i, j) = k;
      a(j, i) = k;
    }
  }
  return a;
}

DescriptorMatrix nlm_dense(const FeatureMatrix& features, const DescriptorMatrix& descriptors,
                           Kernel kernel, bool normalize, std::size_t cap, int threads) {
  const std::size_t n = features.rows();
  check_cap(n, cap);
  if (descriptors.rows() != n) throw std::invalid_argument("nlm_dense: row count mismatch");
  const std::size_t c = descriptors.cols();
  DescriptorMatrix out(n, c);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.row(i);
      double total = 0.0;
      const auto fi = features.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double k = i == j ? 1.0 : kernel_value(kernel, squared_distance(fi, features.row(j)));
        total += k;
        const auto vj = descriptors.row(j);
        for (std::size_t ch = 0; ch < c; ++ch) row[ch] += k * vj[ch];
      }
      if (normalize) {
        for (auto& x : row) x /= total;
      }
    }
  });
  return out;
}

CompareMetrics compare(const DescriptorMatrix& approx, const DescriptorMatrix& oracle) {
  if (approx.rows() != oracle.rows() || approx.cols() != oracle.cols()) {
    throw std::invalid_argument("compare: shape mismatch");
  }
  CompareMetrics m;
  const std::size_t n = approx.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t ch = 0; ch < approx.cols(); ++ch) {
      const double e = approx(i, ch) - oracle(i, ch);
      diff += e * e;
      ref += oracle(i, ch) * oracle(i, ch);
    }
    double rel;
    if (ref > 0.0) {
      rel = std::sqrt(diff / ref);
    } else {
      rel = diff > 0.0 ? 1.0 : 0.0;
    }
    m.mean_rel_l2 += rel;
    m.max_rel_l2 = std::max(m.max_rel_l2, rel);
  }
  if (n > 0) m.mean_rel_l2 /= static_cast<double>(n);

  const auto a = approx.data();
  const auto o = oracle.data();
  const double count = static_cast<double>(a.size());
  double ma = 0.0, mo = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mo += o[k];
  }
  ma /= count;
  mo /= count;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (o[k] - mo);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (o[k] - mo) * (o[k] - mo);
  }
  if (saa > 0.0 && sbb > 0.0) {
    m.correlation = sab / std::sqrt(saa * sbb);
  } else {
    // Constant fields: perfectly correlated iff identical.
    m.correlation = std::equal(a.begin(), a.end(), o.begin()) ? 1.0 : 0.0;
  }
  return m;
}

double fit_gain(const DescriptorMatrix& approx, const DescriptorMatrix& oracle) {
  if (approx.size() != oracle.size()) throw std::invalid_argument("fit_gain: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < approx.size(); ++k) {
    num += approx.data()[k] * oracle.data()[k];
    den += approx.data()[k] * approx.data()[k];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace plf
