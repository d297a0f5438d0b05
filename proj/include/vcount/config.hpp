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

#include "vcount/annotate.hpp"
#include "vcount/counting.hpp"
#include "vcount/detect.hpp"
#include "vcount/fusion.hpp"

namespace vcount {

/// Every tunable of the pipeline. Text form:
///
///   # comment
///   [section]
///   key = value
///
/// Sections and keys:
///   [tiling]    tile_size, overlap
///   [annotate]  fill_tolerance, road_margin
///   [counting]  mean_px_lined, mean_px_side_by_side, min_blob_area,
///               elongation_threshold
///   [detect]    strides (e.g. "8, 4, 2"), anchors (e.g. "5x8, 8x5"),
///               anchors_per_level, nms_iou, min_score, kmeans_seed,
///               kmeans_restarts, kmeans_max_iterations
///   [fusion]    t_high, t_low, overlap_rule (center | iou), overlap_iou
///   [eval]      iou_min
///
/// A key may also be written as section.key outside any section. Unknown
/// sections or keys, duplicates and malformed values are rejected.
struct PipelineConfig {
  int tile_size = 512;
  int overlap = 64;
  FillParams fill;
  CountEstimatorConfig estimator;
  std::vector<int> strides{8, 4, 2};
  std::vector<Anchor> anchors;
  int anchors_per_level = 3;
  double nms_iou = 0.3;
  double min_score = 0.0;
  AnchorSearch kmeans;
  FusionConfig fusion;
  double iou_min = 0.3;
};

void validate(const PipelineConfig& cfg);

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string to_text(const PipelineConfig& cfg);

}  // namespace vcount
