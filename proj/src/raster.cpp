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

#include "vcount/raster.hpp"

#include <string>

namespace vcount {

PixelBox make_box(int x_min, int y_min, int x_max, int y_max) {
  PixelBox box{x_min, y_min, x_max, y_max};
  if (!box.valid()) {
    throw Error(Errc::invalid_argument,
                "empty box [" + std::to_string(x_min) + "," + std::to_string(y_min) + "," +
                    std::to_string(x_max) + "," + std::to_string(y_max) + ")");
  }
  return box;
}

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw Error(Errc::invalid_argument, "image dimensions must be positive");
  }
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error(Errc::invalid_argument,
                "unsupported channel count " + std::to_string(channels));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(Errc::invalid_argument, "pixel buffer size does not match dimensions");
  }
}

}  // namespace vcount
