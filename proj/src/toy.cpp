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

#include "plf/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plf {

ToySample make_toy_sample(const ToyTask& task, std::mt19937_64& rng) {
  if (task.blobs == 0 || task.blob_width == 0) throw PamError("toy task needs blobs of positive width");
  const std::size_t used = task.blobs * task.blob_width + (task.blobs - 1) * task.min_gap;
  if (used > task.length) throw PamError("toy task: blobs do not fit in the strip");
  const std::size_t slack = task.length - used;

  std::uniform_int_distribution<std::size_t> pick(0, slack);
  std::vector<std::size_t> offsets(task.blobs);
  for (auto& o : offsets) o = pick(rng);
  std::sort(offsets.begin(), offsets.end());

  Matrix values(task.length, 1);
  std::vector<int> labels(task.length, -1);
  for (std::size_t k = 0; k < task.blobs; ++k) {
    const std::size_t start = offsets[k] + k * (task.blob_width + task.min_gap);
    for (std::size_t i = start; i < start + task.blob_width; ++i) {
      values(i, 0) = task.intensity;
      labels[i] = static_cast<int>(k);
    }
  }
  return {make_grid({task.length}, {task.spacing}, std::move(values)), std::move(labels)};
}

std::vector<ToySample> make_toy_set(const ToyTask& task, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ToySample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_toy_sample(task, rng));
  return out;
}

ToyModel init_toy_model(const ToyTask& task, std::size_t feature_channels,
                        std::size_t descriptor_channels, bool use_pam, std::uint64_t seed,
                        bool concat_input) {
  ToyModel m;
  m.pam = init_pam_params(1, 1, feature_channels, descriptor_channels, seed);
  m.pam.concat_input = concat_input && use_pam;
  m.use_pam = use_pam;
  const std::size_t width = use_pam ? m.pam.output_channels() : descriptor_channels;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> u(-bound, bound);
  m.head.weight = Matrix(task.blobs, width);
  m.head.bias.assign(task.blobs, 0.0);
  for (auto& w : m.head.weight.data()) w = u(rng);
  return m;
}

namespace {

struct Pass {
  double loss = 0.0;
  std::size_t correct = 0;
  std::size_t labelled = 0;
  Matrix hidden;       // head input, N x width
  Matrix grad_hidden;  // d loss / d hidden
  Matrix grad_logits;  // d loss / d logits
  std::optional<PamForward> pam;
};

Pass run(const ToyModel& model, const ToySample& sample, bool want_grad) {
  Pass p;
  if (model.use_pam) {
    p.pam = pam_forward(sample.input, model.pam);
    p.hidden = p.pam->output;
  } else {
    p.hidden = extract_descriptors(sample.input, model.pam);
  }
  const auto& h = model.head;
  const std::size_t n = p.hidden.rows(), k = h.weight.rows(), w = h.weight.cols();
  for (int l : sample.labels) p.labelled += l >= 0;
  if (want_grad) {
    p.grad_hidden = Matrix(n, w);
    p.grad_logits = Matrix(n, k);
  }
  if (p.labelled == 0) return p;
  const double inv = 1.0 / static_cast<double>(p.labelled);

  std::vector<double> logits(k);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = sample.labels[i];
    if (label < 0) continue;
    for (std::size_t c = 0; c < k; ++c) {
      double s = h.bias[c];
      for (std::size_t j = 0; j < w; ++j) s += h.weight(c, j) * p.hidden(i, j);
      logits[c] = s;
    }
    const auto best = std::max_element(logits.begin(), logits.end());
    p.correct += static_cast<int>(best - logits.begin()) == label;
    const double top = *best;
    double z = 0.0;
    for (double v : logits) z += std::exp(v - top);
    p.loss += (std::log(z) + top - logits[label]) * inv;
    if (!want_grad) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double g = (std::exp(logits[c] - top) / z - (static_cast<int>(c) == label)) * inv;
      p.grad_logits(i, c) = g;
      for (std::size_t j = 0; j < w; ++j) p.grad_hidden(i, j) += g * h.weight(c, j);
    }
  }
  return p;
}

void step_params(ToyModel& model, const ToySample& sample, const Pass& p, double lr,
                 bool train_head) {
  if (train_head) {
    auto& h = model.head;
    for (std::size_t i = 0; i < p.hidden.rows(); ++i) {
      for (std::size_t c = 0; c < h.weight.rows(); ++c) {
        const double g = p.grad_logits(i, c);
        if (g == 0.0) continue;
        h.bias[c] -= lr * g;
        for (std::size_t j = 0; j < h.weight.cols(); ++j) h.weight(c, j) -= lr * g * p.hidden(i, j);
      }
    }
  }

  auto& pam = model.pam;
  if (model.use_pam) {
    const auto g = pam_backward(*p.pam, pam, p.grad_hidden);
    for (std::size_t i = 0; i < pam.w_feat.size(); ++i) pam.w_feat.data()[i] -= lr * g.w_feat.data()[i];
    for (std::size_t i = 0; i < pam.b_feat.size(); ++i) pam.b_feat[i] -= lr * g.b_feat[i];
    for (std::size_t i = 0; i < pam.w_desc.size(); ++i) pam.w_desc.data()[i] -= lr * g.w_desc.data()[i];
    for (std::size_t i = 0; i < pam.b_desc.size(); ++i) pam.b_desc[i] -= lr * g.b_desc[i];
    return;
  }
  const auto& x = sample.input.values;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t o = 0; o < pam.w_desc.rows(); ++o) {
      const double g = p.grad_hidden(i, o);
      if (g == 0.0) continue;
      pam.b_desc[o] -= lr * g;
      for (std::size_t c = 0; c < x.cols(); ++c) pam.w_desc(o, c) -= lr * g * x(i, c);
    }
  }
}

}  // namespace

ToyEvaluation evaluate_toy(const ToyModel& model, const std::vector<ToySample>& samples) {
  double loss = 0.0;
  std::size_t correct = 0, labelled = 0;
  for (const auto& s : samples) {
    const auto p = run(model, s, false);
    loss += p.loss;
    correct += p.correct;
    labelled += p.labelled;
  }
  ToyEvaluation e;
  if (!samples.empty()) e.loss = loss / static_cast<double>(samples.size());
  if (labelled > 0) e.accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
  return e;
}

TrainResult train_toy(const ToyTask& task, ToyModel model, const TrainOptions& opts) {
  if (opts.steps < 0) throw PamError("steps must be non-negative");
  if (!(opts.lr >= 0.0) || !std::isfinite(opts.lr)) throw PamError("lr must be finite and >= 0");
  if (opts.eval_every <= 0) throw PamError("eval_every must be positive");

  const auto held_out = make_toy_set(task, opts.eval_samples, opts.seed ^ 0x5bd1e995ULL);
  std::mt19937_64 rng(opts.seed);

  TrainResult result{std::move(model), {}, 0.0, std::nullopt};
  ToyModel last_good = result.model;
  for (int step = 0; step < opts.steps; ++step) {
    const auto sample = make_toy_sample(task, rng);
    std::optional<Pass> p;
    try {
      p = run(result.model, sample, true);
    } catch (const LatticeError&) {
      // Features left the representable lattice range.
    } catch (const FilterError&) {
    }
    if (!p || !std::isfinite(p->loss)) {
      result.diverged_at = step;
      result.model = std::move(last_good);
      break;
    }
    last_good = result.model;
    step_params(result.model, sample, *p, opts.lr, opts.train_head);

    TracePoint tp;
    tp.step = step;
    tp.loss = p->loss;
    tp.accuracy = p->labelled ? static_cast<double>(p->correct) / static_cast<double>(p->labelled) : 0.0;
    if ((step + 1) % opts.eval_every == 0 || step + 1 == opts.steps) {
      tp.eval_accuracy = evaluate_toy(result.model, held_out).accuracy;
    }
    result.trace.push_back(tp);
  }
  result.final_accuracy = evaluate_toy(result.model, held_out).accuracy;
  return result;
}

}  // namespace plf
