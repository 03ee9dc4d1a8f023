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

#include "plf/image_io.hpp"

#include <cctype>
#include <string>

#include "plf/tensor_io.hpp"

namespace plf {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw ImageError(std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) throw ImageError(std::string("expected ") + what);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image make_image(int width, int height, int channels, std::uint16_t maxval) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3) || maxval == 0) {
    throw ImageError("invalid image geometry");
  }
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.maxval = maxval;
  img.samples.assign(static_cast<std::size_t>(width) * height * channels, 0);
  return img;
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ImageError("not a binary PGM/PPM (expected P5 or P6)");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes);
  header.advance(2);
  const auto width = header.read_uint("width");
  const auto height = header.read_uint("height");
  const auto maxval = header.read_uint("maxval");
  if (width == 0 || height == 0) throw ImageError("zero image dimension");
  if (width > (1ul << 20) || height > (1ul << 20)) throw ImageError("image too large");
  if (maxval == 0 || maxval > 65535) {
    throw ImageError("maxval must be in [1, 65535], got " + std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (header.pos() >= bytes.size() || !std::isspace(bytes[header.pos()])) {
    throw ImageError("missing whitespace after maxval");
  }
  header.advance(1);

  Image img = make_image(static_cast<int>(width), static_cast<int>(height), channels,
                         static_cast<std::uint16_t>(maxval));
  const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
  const std::size_t need = img.samples.size() * bytes_per_sample;
  if (bytes.size() - header.pos() < need) {
    throw ParseError("truncated raster", bytes.size());
  }
  const std::uint8_t* p = bytes.data() + header.pos();
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    std::uint16_t v = bytes_per_sample == 1
                          ? p[i]
                          : static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    if (v > maxval) throw ImageError("sample exceeds maxval");
    img.samples[i] = v;
  }
  return img;
}

std::vector<std::uint8_t> encode_image(const Image& img) {
  if (img.width <= 0 || img.height <= 0 || (img.channels != 1 && img.channels != 3) ||
      img.maxval == 0 ||
      img.samples.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw ImageError("encode_image: inconsistent image");
  }
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n" + std::to_string(img.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const bool wide = img.maxval >= 256;
  out.reserve(out.size() + img.samples.size() * (wide ? 2 : 1));
  for (auto v : img.samples) {
    if (v > img.maxval) throw ImageError("encode_image: sample exceeds maxval");
    if (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

Image read_image(const std::filesystem::path& path) {
  return decode_image(read_file_bytes(path));
}

void write_image(const Image& img, const std::filesystem::path& path) {
  write_file_bytes(path, encode_image(img));
}

}  // namespace plf
