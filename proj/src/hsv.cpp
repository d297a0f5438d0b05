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

#include "vcount/hsv.hpp"

#include <algorithm>
#include <cmath>

namespace vcount {

HsvColor rgb_to_hsv(double r, double g, double b) noexcept {
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;

  HsvColor out;
  out.v = std::clamp(max / 255.0, 0.0, 1.0);
  if (max <= 0.0 || delta <= 0.0) {
    return out;  // achromatic: s = 0, h = 0
  }
  out.s = std::clamp(delta / max, 0.0, 1.0);

  double h;
  if (max == r) {
    h = 60.0 * ((g - b) / delta);
  } else if (max == g) {
    h = 60.0 * ((b - r) / delta + 2.0);
  } else {
    h = 60.0 * ((r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

HsvColor rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return rgb_to_hsv(static_cast<double>(r), static_cast<double>(g), static_cast<double>(b));
}

std::array<std::uint8_t, 3> hsv_to_rgb(const HsvColor& c) noexcept {
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = std::clamp(c.v, 0.0, 1.0);
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;

  const double chroma = v * s;
  const double hp = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = v - chroma;
  auto to_byte = [m](double ch) {
    return static_cast<std::uint8_t>(std::clamp(std::lround((ch + m) * 255.0), 0L, 255L));
  };
  return {to_byte(r), to_byte(g), to_byte(b)};
}

double sv_distance(const HsvColor& a, const HsvColor& b) noexcept {
  return std::hypot(a.s - b.s, a.v - b.v);
}

HsvColor pixel_hsv(const RasterImage& image, int x, int y) {
  const auto px = image.pixel(x, y);
  if (image.channels() == 1) {
    return rgb_to_hsv(px[0], px[0], px[0]);
  }
  return rgb_to_hsv(px[0], px[1], px[2]);
}

}  // namespace vcount
