// Copyright 2026 The vcount Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vcount/raster.hpp"

namespace vcount {

/// 16-bit interleaved samples, 1 to 4 channels. Used for instance-id masks
/// and vote counts.
struct Image16 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint16_t> data;

  friend bool operator==(const Image16&, const Image16&) = default;
};

std::string encode_png(const RasterImage& image);
/// 8-bit only; palette and sub-byte gray are expanded. 16-bit input is
/// rejected rather than truncated.
RasterImage decode_png(std::string_view bytes);

std::string encode_png16(const Image16& image);
/// 8-bit files are widened without rescaling.
Image16 decode_png16(std::string_view bytes);

void write_png(const std::filesystem::path& path, const RasterImage& image);
RasterImage read_png(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const Image16& image);
Image16 read_png16(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace vcount
