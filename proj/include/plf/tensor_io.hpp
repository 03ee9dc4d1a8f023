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

#ifndef PLF_TENSOR_IO_HPP_
#define PLF_TENSOR_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plf/matrix.hpp"

namespace plf {

/// Parse failure in a binary or text record, tagged with the byte offset at
/// which decoding stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) +
                           ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Dense row-major float64 tensor.
struct DenseTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::size_t rank() const { return dims.size(); }
  bool operator==(const DenseTensor&) const = default;
};

// "PLT1" layout, all little-endian:
//   bytes 0..3   magic "PLT1"
//   u32          rank
//   rank x u64   dims
//   f64 x prod(dims) payload
inline constexpr char kTensorMagic[4] = {'P', 'L', 'T', '1'};
inline constexpr std::uint32_t kMaxTensorRank = 32;

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t);
DenseTensor decode_tensor(std::span<const std::uint8_t> bytes);

DenseTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const DenseTensor& t, const std::filesystem::path& path);

DenseTensor to_tensor(const Matrix& m);
// Throws std::invalid_argument unless t has rank 2.
Matrix to_matrix(const DenseTensor& t);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace plf

#endif  // PLF_TENSOR_IO_HPP_
