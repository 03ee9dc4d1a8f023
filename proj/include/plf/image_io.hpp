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

#ifndef PLF_IMAGE_IO_HPP_
#define PLF_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace plf {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interleaved 8- or 16-bit image with 1 (gray, P5) or 3 (RGB, P6) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::uint16_t maxval = 255;
  std::vector<std::uint16_t> samples;

  bool is_gray() const { return channels == 1; }
  std::uint16_t at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint16_t& at(int x, int y, int c = 0) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

Image make_image(int width, int height, int channels, std::uint16_t maxval);

// Throws ImageError for anything that is not binary PGM/PPM with
// 0 < maxval <= 65535. Header comments are skipped.
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_image(const Image& img);

Image read_image(const std::filesystem::path& path);
void write_image(const Image& img, const std::filesystem::path& path);

}  // namespace plf

#endif  // PLF_IMAGE_IO_HPP_
