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

#include "plf/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <map>
#include <string>

#include "plf/tensor_io.hpp"

namespace plf {

namespace {

using nlohmann::json;

constexpr const char* kManifest = "manifest.json";

DenseTensor vector_tensor(const std::vector<double>& v) {
  return DenseTensor{{static_cast<std::uint64_t>(v.size())}, v};
}

struct Entry {
  const char* name;
  const char* role;
};

constexpr Entry kEntries[] = {
    {"w_feat", "feature_extractor.weight"},  {"b_feat", "feature_extractor.bias"},
    {"w_desc", "descriptor_extractor.weight"}, {"b_desc", "descriptor_extractor.bias"},
    {"head_weight", "head.weight"},          {"head_bias", "head.bias"},
};

}  // namespace

void save_checkpoint(const ToyModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CheckpointError("cannot create " + dir.string() + ": " + ec.message());

  const std::map<std::string, DenseTensor> tensors = {
      {"w_feat", to_tensor(model.pam.w_feat)},     {"b_feat", vector_tensor(model.pam.b_feat)},
      {"w_desc", to_tensor(model.pam.w_desc)},     {"b_desc", vector_tensor(model.pam.b_desc)},
      {"head_weight", to_tensor(model.head.weight)}, {"head_bias", vector_tensor(model.head.bias)},
  };
  json manifest;
  manifest["format"] = "PLT1";
  manifest["leaky_slope"] = model.pam.leaky_slope;
  manifest["normalize"] = model.pam.filter.normalize;
  manifest["refinement"] = model.pam.filter.refinement;
  manifest["concat_input"] = model.pam.concat_input;
  manifest["use_pam"] = model.use_pam;
  manifest["tensors"] = json::array();
  for (const auto& e : kEntries) {
    const auto file = std::string(e.name) + ".plt";
    const auto& t = tensors.at(e.name);
    write_tensor(t, dir / file);
    manifest["tensors"].push_back({{"name", e.name}, {"role", e.role}, {"file", file}, {"dims", t.dims}});
  }
  std::ofstream out(dir / kManifest);
  out << manifest.dump(2) << '\n';
  if (!out) throw CheckpointError("cannot write " + (dir / kManifest).string());
}

ToyModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw CheckpointError("cannot open " + (dir / kManifest).string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "PLT1") throw CheckpointError("manifest format is not PLT1");

  std::map<std::string, DenseTensor> tensors;
  for (const auto& t : manifest.at("tensors")) {
    tensors[t.at("name").get<std::string>()] = read_tensor(dir / t.at("file").get<std::string>());
  }
  auto get = [&](const char* name) -> const DenseTensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError(std::string("checkpoint lacks ") + name);
    return it->second;
  };
  ToyModel m;
  m.pam.w_feat = to_matrix(get("w_feat"));
  m.pam.b_feat = get("b_feat").data;
  m.pam.w_desc = to_matrix(get("w_desc"));
  m.pam.b_desc = get("b_desc").data;
  m.head.weight = to_matrix(get("head_weight"));
  m.head.bias = get("head_bias").data;
  m.pam.leaky_slope = manifest.at("leaky_slope").get<double>();
  m.pam.filter.normalize = manifest.at("normalize").get<bool>();
  m.pam.filter.refinement = manifest.at("refinement").get<int>();
  m.pam.concat_input = manifest.at("concat_input").get<bool>();
  m.use_pam = manifest.at("use_pam").get<bool>();
  return m;
}

}  // namespace plf
