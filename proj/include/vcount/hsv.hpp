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

#include <array>
#include <cstdint>

#include "vcount/raster.hpp"

namespace vcount {

/// Hexcone HSV. h in degrees [0, 360), s and v in [0, 1].
struct HsvColor {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;

  friend bool operator==(const HsvColor&, const HsvColor&) = default;
};

HsvColor rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Same conversion on real-valued channels in [0, 255] (neighbourhood means).
HsvColor rgb_to_hsv(double r, double g, double b) noexcept;

std::array<std::uint8_t, 3> hsv_to_rgb(const HsvColor& c) noexcept;

/// Euclidean distance in the (s, v) plane. Hue is ignored.
double sv_distance(const HsvColor& a, const HsvColor& b) noexcept;

/// HSV of one pixel; single-channel images are read as gray, a fourth
/// channel is ignored.
HsvColor pixel_hsv(const RasterImage& image, int x, int y);

}  // namespace vcount
