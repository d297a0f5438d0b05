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

#include "vcount/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>

namespace vcount {

void validate(const FusionConfig& cfg) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(cfg.t_high) || !unit(cfg.t_low) || !unit(cfg.overlap_iou)) {
    throw Error(Errc::invalid_config, "fusion thresholds must lie in [0, 1]");
  }
  if (cfg.t_low > cfg.t_high) {
    throw Error(Errc::invalid_config, "t_low must not exceed t_high");
  }
}

double box_blob_iou(const Box& box, const Blob& blob) {
  double inter = 0;
  for (const auto& p : blob.pixels) {
    const double iw = std::min<double>(box.x_max, p.x + 1) - std::max<double>(box.x_min, p.x);
    const double ih = std::min<double>(box.y_max, p.y + 1) - std::max<double>(box.y_min, p.y);
    if (iw > 0 && ih > 0) inter += iw * ih;
  }
  const double uni = box.area() + static_cast<double>(blob.area) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

std::uint64_t key(int x, int y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32) |
         static_cast<std::uint32_t>(x);
}

}  // namespace

std::vector<Detection> fuse(std::span<const Detection> detections, std::span<const Blob> blobs,
                            const FusionConfig& cfg) {
  validate(cfg);

  std::unordered_set<std::uint64_t> blob_pixels;
  if (cfg.rule == OverlapRule::center_in_blob) {
    for (const auto& b : blobs) {
      for (const auto& p : b.pixels) blob_pixels.insert(key(p.x, p.y));
    }
  }

  auto corroborated = [&](const Detection& d) {
    if (cfg.rule == OverlapRule::center_in_blob) {
      const double cx = 0.5 * (d.box.x_min + d.box.x_max);
      const double cy = 0.5 * (d.box.y_min + d.box.y_max);
      return blob_pixels.contains(
          key(static_cast<int>(std::floor(cx)), static_cast<int>(std::floor(cy))));
    }
    const Box& bx = d.box;
    return std::any_of(blobs.begin(), blobs.end(), [&](const Blob& b) {
      const bool disjoint = b.bounds.x_max <= bx.x_min || b.bounds.x_min >= bx.x_max ||
                            b.bounds.y_max <= bx.y_min || b.bounds.y_min >= bx.y_max;
      return !disjoint && box_blob_iou(bx, b) >= cfg.overlap_iou;
    });
  };

  std::vector<Detection> out;
  for (const auto& d : detections) {
    if (d.score >= cfg.t_high) {
      Detection kept = d;
      kept.source = corroborated(d) ? Source::fused : Source::detector;
      out.push_back(kept);
    } else if (d.score >= cfg.t_low && corroborated(d)) {
      Detection kept = d;
      kept.source = Source::fused;
      out.push_back(kept);
    }
  }
  return out;
}

}  // namespace vcount
