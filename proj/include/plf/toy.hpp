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

#ifndef PLF_TOY_HPP_
#define PLF_TOY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plf/matrix.hpp"
#include "plf/pam.hpp"

namespace plf {

/// Ordered blobs: a 1-D strip with `blobs` identical-intensity segments of
/// `blob_width` cells. A blob cell's label is the blob's rank from the left;
/// background cells are unlabelled.
struct ToyTask {
  std::size_t length = 24;
  std::size_t blobs = 3;
  std::size_t blob_width = 4;
  std::size_t min_gap = 2;
  double intensity = 1.0;
  // Mesh spacing, so the strip spans length * spacing feature units.
  double spacing = 0.0625;
};

struct ToySample {
  GridInput input;
  std::vector<int> labels;  // -1 on background
};

ToySample make_toy_sample(const ToyTask& task, std::mt19937_64& rng);

/// Linear classifier applied per cell: logits = W h + b.
struct LinearHead {
  Matrix weight;  // classes x width
  std::vector<double> bias;
};

struct ToyModel {
  PamParams pam;
  LinearHead head;
  // false: the PAM filter is replaced by the identity, so the head sees the
  // extracted descriptors directly.
  bool use_pam = true;
};

ToyModel init_toy_model(const ToyTask& task, std::size_t feature_channels,
                        std::size_t descriptor_channels, bool use_pam, std::uint64_t seed,
                        bool concat_input = false);

struct TrainOptions {
  int steps = 500;
  double lr = 0.3;
  std::uint64_t seed = 1;
  std::size_t eval_samples = 64;
  // Evaluate held-out accuracy every this many steps (and after the last).
  int eval_every = 50;
  bool train_head = true;
};

struct TracePoint {
  int step = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // on the training sample of this step
  std::optional<double> eval_accuracy;
};

struct TrainResult {
  ToyModel model;
  std::vector<TracePoint> trace;
  double final_accuracy = 0.0;
  // Step whose forward pass failed (non-finite loss or features outside the
  // lattice range). model then holds the parameters used one step earlier.
  std::optional<int> diverged_at;
};

struct ToyEvaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean cross-entropy and accuracy over labelled cells.
ToyEvaluation evaluate_toy(const ToyModel& model, const std::vector<ToySample>& samples);

std::vector<ToySample> make_toy_set(const ToyTask& task, std::size_t count, std::uint64_t seed);

TrainResult train_toy(const ToyTask& task, ToyModel model, const TrainOptions& opts);

}  // namespace plf

#endif  // PLF_TOY_HPP_
