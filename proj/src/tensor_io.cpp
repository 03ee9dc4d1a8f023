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

#include "plf/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace plf {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(bytes[offset + i]) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t) {
  std::uint64_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.data.size() || t.dims.size() > kMaxTensorRank) {
    throw std::invalid_argument("encode_tensor: dims do not match payload");
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 + 8 * t.dims.size() + 8 * t.data.size());
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  put_le(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_le(out, d);
  for (double v : t.data) put_le(out, v);
  return out;
}

DenseTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (bytes.size() - pos < n) {
      throw ParseError(std::string("truncated ") + what, bytes.size());
    }
  };

  need(4, "magic");
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw ParseError("bad magic, expected PLT1", 0);
  }
  pos = 4;
  need(4, "rank");
  const auto rank = get_le<std::uint32_t>(bytes, pos);
  if (rank > kMaxTensorRank) {
    throw ParseError("rank " + std::to_string(rank) + " exceeds limit", pos);
  }
  pos += 4;

  DenseTensor t;
  t.dims.resize(rank);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    need(8, "dims");
    const auto d = get_le<std::uint64_t>(bytes, pos);
    if (d == 0) throw ParseError("zero dimension", pos);
    if (count > std::numeric_limits<std::uint64_t>::max() / 8 / d) {
      throw ParseError("dims overflow", pos);
    }
    count *= d;
    t.dims[i] = d;
    pos += 8;
  }

  const std::uint64_t available = (bytes.size() - pos) / 8;
  if (available < count) {
    // First byte of the first missing value.
    throw ParseError("truncated payload: expected " + std::to_string(count) +
                         " values, found " + std::to_string(available),
                     pos + available * 8);
  }
  if (bytes.size() - pos != count * 8) {
    throw ParseError("trailing bytes after payload", pos + count * 8);
  }
  t.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    t.data[i] = get_le<double>(bytes, pos);
    pos += 8;
  }
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

DenseTensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file_bytes(path));
}

void write_tensor(const DenseTensor& t, const std::filesystem::path& path) {
  write_file_bytes(path, encode_tensor(t));
}

DenseTensor to_tensor(const Matrix& m) {
  return DenseTensor{{m.rows(), m.cols()}, m.storage()};
}

Matrix to_matrix(const DenseTensor& t) {
  if (t.rank() != 2) {
    throw std::invalid_argument("to_matrix: expected rank 2, got " +
                                std::to_string(t.rank()));
  }
  return Matrix(t.dims[0], t.dims[1], t.data);
}

}  // namespace plf
