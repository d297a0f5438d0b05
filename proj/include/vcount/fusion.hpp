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

#include <span>
#include <vector>

#include "vcount/counting.hpp"
#include "vcount/detect.hpp"

namespace vcount {

enum class OverlapRule {
  center_in_blob,  // box centre falls on a blob pixel
  blob_iou,        // pixel-area IoU between box and blob >= overlap_iou
};

struct FusionConfig {
  double t_high = 0.5;
  double t_low = 0.2;
  OverlapRule rule = OverlapRule::center_in_blob;
  double overlap_iou = 0.3;
};

void validate(const FusionConfig& cfg);

/// IoU between a continuous box and a blob, each blob pixel counted as a
/// unit square.
double box_blob_iou(const Box& box, const Blob& blob);

/// Keeps detections scoring >= t_high plus those in [t_low, t_high)
/// corroborated by a segmentation blob. Kept detections that a blob
/// corroborates get source fused, the rest source detector.
/// Input order is preserved and nothing is added.
std::vector<Detection> fuse(std::span<const Detection> detections, std::span<const Blob> blobs,
                            const FusionConfig& cfg);

inline std::size_t fused_count(std::span<const Detection> fused) noexcept { return fused.size(); }

}  // namespace vcount
