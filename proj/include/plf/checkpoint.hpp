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

#ifndef PLF_CHECKPOINT_HPP_
#define PLF_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>

#include "plf/toy.hpp"

namespace plf {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes one PLT1 tensor per parameter into dir plus manifest.json listing
// each tensor's file, role and shape, and the scalar settings.
void save_checkpoint(const ToyModel& model, const std::filesystem::path& dir);
ToyModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace plf

#endif  // PLF_CHECKPOINT_HPP_
