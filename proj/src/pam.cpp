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

#include "plf/pam.hpp"

#include <cmath>
#include <random>

#include "plf/gradients.hpp"

namespace plf {

std::size_t GridInput::cells() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

GridInput make_grid(std::vector<std::size_t> dims, std::vector<double> spacing, Matrix values) {
  if (dims.empty() || dims.size() > 3) throw PamError("grid rank must be 1, 2 or 3");
  if (spacing.size() != dims.size()) throw PamError("one spacing per grid axis required");
  for (auto d : dims) {
    if (d == 0) throw PamError("grid dims must be positive");
  }
  for (double s : spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) throw PamError("spacing must be positive and finite");
  }
  GridInput g{std::move(dims), std::move(spacing), std::move(values)};
  if (g.values.rows() != g.cells()) {
    throw PamError("grid has " + std::to_string(g.cells()) + " cells but values have " +
                   std::to_string(g.values.rows()) + " rows");
  }
  for (double v : g.values.data()) {
    if (!std::isfinite(v)) throw PamError("grid values must be finite");
  }
  return g;
}

PamParams init_pam_params(std::size_t in_channels, std::size_t spatial_rank,
                          std::size_t feature_channels, std::size_t descriptor_channels,
                          std::uint64_t seed) {
  if (feature_channels % 2 != 0 || descriptor_channels % 2 != 0 || feature_channels == 0 ||
      descriptor_channels == 0) {
    throw PamError("feature and descriptor channel counts must be positive and even");
  }
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Matrix& w, std::vector<double>& b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& x : w.data()) x = u(rng);
    for (auto& x : b) x = u(rng);
  };
  PamParams p;
  p.w_feat = Matrix(feature_channels, in_channels + spatial_rank);
  p.b_feat.resize(feature_channels);
  p.w_desc = Matrix(descriptor_channels, in_channels);
  p.b_desc.resize(descriptor_channels);
  fill(p.w_feat, p.b_feat);
  fill(p.w_desc, p.b_desc);
  return p;
}

Matrix coordinate_mesh(const std::vector<std::size_t>& dims, const std::vector<double>& spacing) {
  const std::size_t s = dims.size();
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  Matrix mesh(n, s);
  std::vector<std::size_t> idx(s, 0);
  for (std::size_t cell = 0; cell < n; ++cell) {
    for (std::size_t a = 0; a < s; ++a) mesh(cell, a) = static_cast<double>(idx[a]) * spacing[a];
    // Row-major: the last axis varies fastest.
    for (std::size_t a = s; a-- > 0;) {
      if (++idx[a] < dims[a]) break;
      idx[a] = 0;
    }
  }
  return mesh;
}

namespace {

void check_shapes(const GridInput& x, const PamParams& p) {
  if (x.channels() != p.in_channels()) {
    throw PamError("input has " + std::to_string(x.channels()) + " channels, parameters expect " +
                   std::to_string(p.in_channels()));
  }
  if (x.dims.size() != p.spatial_rank()) {
    throw PamError("grid rank " + std::to_string(x.dims.size()) +
                   " does not match feature extractor (" + std::to_string(p.spatial_rank()) + ")");
  }
  if (p.b_feat.size() != p.feature_channels() || p.b_desc.size() != p.descriptor_channels()) {
    throw PamError("bias length mismatch");
  }
}

Matrix with_mesh(const GridInput& x) {
  const auto mesh = coordinate_mesh(x.dims, x.spacing);
  const std::size_t c = x.channels(), s = mesh.cols();
  Matrix in(x.cells(), c + s);
  for (std::size_t i = 0; i < in.rows(); ++i) {
    for (std::size_t a = 0; a < c; ++a) in(i, a) = x.values(i, a);
    for (std::size_t a = 0; a < s; ++a) in(i, c + a) = mesh(i, a);
  }
  return in;
}

// out = in * W^T + b
Matrix affine(const Matrix& in, const Matrix& w, const std::vector<double>& b) {
  Matrix out(in.rows(), w.rows());
  for (std::size_t i = 0; i < in.rows(); ++i) {
    for (std::size_t o = 0; o < w.rows(); ++o) {
      double s = b[o];
      for (std::size_t k = 0; k < w.cols(); ++k) s += w(o, k) * in(i, k);
      out(i, o) = s;
    }
  }
  return out;
}

// dW += g^T in, db += column sums of g.
void accumulate_affine_grad(const Matrix& g, const Matrix& in, Matrix& dw, std::vector<double>& db) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t o = 0; o < g.cols(); ++o) {
      const double go = g(i, o);
      if (go == 0.0) continue;
      db[o] += go;
      for (std::size_t k = 0; k < in.cols(); ++k) dw(o, k) += go * in(i, k);
    }
  }
}

}  // namespace

Matrix column_block(const Matrix& m, std::size_t begin, std::size_t count) {
  Matrix out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < count; ++k) out(i, k) = m(i, begin + k);
  }
  return out;
}

FeatureMatrix extract_features(const GridInput& x, const PamParams& params, Matrix* pre_activation) {
  check_shapes(x, params);
  Matrix z = affine(with_mesh(x), params.w_feat, params.b_feat);
  FeatureMatrix f(z.rows(), z.cols());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double v = z.data()[k];
    f.data()[k] = v > 0.0 ? v : params.leaky_slope * v;
  }
  if (pre_activation) *pre_activation = std::move(z);
  return f;
}

DescriptorMatrix extract_descriptors(const GridInput& x, const PamParams& params) {
  check_shapes(x, params);
  return affine(x.values, params.w_desc, params.b_desc);
}

PamForward pam_forward(const GridInput& x, const PamParams& params) {
  check_shapes(x, params);
  const std::size_t fc = params.feature_channels(), vc = params.descriptor_channels();
  if (fc % 2 != 0 || vc % 2 != 0) throw PamError("feature and descriptor channels must be even");
  if (!(params.leaky_slope > 0.0 && params.leaky_slope < 1.0)) {
    throw PamError("leaky slope must lie in (0, 1)");
  }

  PamForward fwd;
  fwd.inputs = with_mesh(x);
  fwd.features = extract_features(x, params, &fwd.pre_activation);
  fwd.descriptors = extract_descriptors(x, params);

  const std::size_t n = x.cells();
  const std::size_t fg = fc / 2, vg = vc / 2;
  fwd.output = Matrix(n, params.output_channels());
  for (int g = 0; g < PamParams::kGroups; ++g) {
    const auto f = column_block(fwd.features, g * fg, fg);
    const auto v = column_block(fwd.descriptors, g * vg, vg);
    auto result = permutohedral_filter_with_tape(make_embedding(static_cast<int>(fg)), f, v,
                                                 params.filter);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < vg; ++k) fwd.output(i, g * vg + k) = result.output(i, k);
    }
    fwd.tapes.push_back(std::move(result.tape));
  }
  if (params.concat_input) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < x.channels(); ++k) fwd.output(i, vc + k) = x.values(i, k);
    }
  }
  return fwd;
}

PamGradients pam_backward(const PamForward& fwd, const PamParams& params, const Matrix& grad_out) {
  const std::size_t n = fwd.features.rows();
  const std::size_t fc = params.feature_channels(), vc = params.descriptor_channels();
  if (fwd.tapes.size() != PamParams::kGroups || fwd.features.cols() != fc ||
      fwd.descriptors.cols() != vc || fwd.inputs.cols() != params.w_feat.cols()) {
    throw PamError("pam_backward: forward record does not match parameters");
  }
  if (grad_out.rows() != n || grad_out.cols() != params.output_channels()) {
    throw PamError("pam_backward: gradient shape mismatch");
  }
  const std::size_t fg = fc / 2, vg = vc / 2;

  Matrix grad_desc(n, vc), grad_pre(n, fc);
  for (int g = 0; g < PamParams::kGroups; ++g) {
    const auto go = column_block(grad_out, g * vg, vg);
    const auto v = column_block(fwd.descriptors, g * vg, vg);
    const auto gv = vjp_descriptors(fwd.tapes[g], go);
    const auto gf = vjp_features(fwd.tapes[g], v, go);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < vg; ++k) grad_desc(i, g * vg + k) = gv(i, k);
      for (std::size_t k = 0; k < fg; ++k) {
        const double z = fwd.pre_activation(i, g * fg + k);
        grad_pre(i, g * fg + k) = gf(i, k) * (z > 0.0 ? 1.0 : params.leaky_slope);
      }
    }
  }

  PamGradients grads{Matrix(fc, params.w_feat.cols()), std::vector<double>(fc, 0.0),
                     Matrix(vc, params.w_desc.cols()), std::vector<double>(vc, 0.0)};
  accumulate_affine_grad(grad_pre, fwd.inputs, grads.w_feat, grads.b_feat);
  const auto x = column_block(fwd.inputs, 0, params.in_channels());
  accumulate_affine_grad(grad_desc, x, grads.w_desc, grads.b_desc);
  return grads;
}

}  // namespace plf
