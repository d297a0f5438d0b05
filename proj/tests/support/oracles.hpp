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

// Brute-force reference implementations used only by the tests. They avoid
// the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "vcount/raster.hpp"

namespace vcount::oracle {

struct Sv {
  double s;
  double v;
};

inline Sv sv_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  return {mx == 0 ? 0.0 : static_cast<double>(mx - mn) / mx, mx / 255.0};
}

inline double sv_dist(Sv a, Sv b) {
  return std::sqrt((a.s - b.s) * (a.s - b.s) + (a.v - b.v) * (a.v - b.v));
}

/// Grows the region by repeated full scans until nothing changes.
inline std::vector<Point> flood_fixpoint(const RasterImage& img, Point seed, Sv road,
                                         double tolerance, double margin) {
  const int w = img.width();
  const int h = img.height();
  auto sv_at = [&](int x, int y) {
    return sv_of(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
  };
  const Sv seed_sv = sv_at(seed.x, seed.y);
  std::vector<char> in(static_cast<std::size_t>(w) * h, 0);
  in[static_cast<std::size_t>(seed.y) * w + seed.x] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (in[static_cast<std::size_t>(y) * w + x]) continue;
        const Sv c = sv_at(x, y);
        if (!(sv_dist(c, seed_sv) <= tolerance && sv_dist(c, road) >= margin)) continue;
        bool touches = false;
        for (int dy = -1; dy <= 1 && !touches; ++dy) {
          for (int dx = -1; dx <= 1 && !touches; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            touches = in[static_cast<std::size_t>(ny) * w + nx] != 0;
          }
        }
        if (touches) {
          in[static_cast<std::size_t>(y) * w + x] = 1;
          changed = true;
        }
      }
    }
  }
  std::vector<Point> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (in[static_cast<std::size_t>(y) * w + x]) out.push_back({x, y});
    }
  }
  return out;
}

/// IoU of integer boxes by counting pixels on a canvas.
inline double pixel_iou(const PixelBox& a, const PixelBox& b, int canvas) {
  long long na = 0, nb = 0, both = 0;
  for (int y = 0; y < canvas; ++y) {
    for (int x = 0; x < canvas; ++x) {
      const bool ia = a.contains(x, y);
      const bool ib = b.contains(x, y);
      na += ia;
      nb += ib;
      both += ia && ib;
    }
  }
  const long long uni = na + nb - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

struct Size {
  double w;
  double h;
};

inline double centred_distance(Size a, Size b) {
  const double inter = std::min(a.w, b.w) * std::min(a.h, b.h);
  return 1.0 - inter / (a.w * a.h + b.w * b.h - inter);
}

/// Minimum over every assignment of boxes to k non-empty clusters of the
/// summed distance to the cluster means.
inline double best_clustering_cost(const std::vector<Size>& boxes, std::size_t k) {
  const std::size_t n = boxes.size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> sw(k, 0), sh(k, 0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sw[label[i]] += boxes[i].w;
      sh[label[i]] += boxes[i].h;
      ++cnt[label[i]];
    }
    if (std::find(cnt.begin(), cnt.end(), 0u) == cnt.end()) {
      double cost = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = label[i];
        cost += centred_distance(boxes[i], {sw[c] / cnt[c], sh[c] / cnt[c]});
      }
      best = std::min(best, cost);
    }
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

/// Largest number of one-to-one (pred, truth) pairs with IoU >= iou_min.
inline long long max_matching(const std::vector<std::vector<double>>& iou, double iou_min) {
  const std::size_t np = iou.size();
  const std::size_t ng = np == 0 ? 0 : iou[0].size();
  std::vector<bool> used(ng, false);
  std::function<long long(std::size_t)> go = [&](std::size_t p) -> long long {
    if (p == np) return 0;
    long long best = go(p + 1);
    for (std::size_t g = 0; g < ng; ++g) {
      if (used[g] || iou[p][g] < iou_min || iou[p][g] <= 0) continue;
      used[g] = true;
      best = std::max(best, 1 + go(p + 1));
      used[g] = false;
    }
    return best;
  };
  return go(0);
}

}  // namespace vcount::oracle
