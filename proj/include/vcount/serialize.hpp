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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vcount/annotate.hpp"
#include "vcount/counting.hpp"
#include "vcount/detect.hpp"
#include "vcount/eval.hpp"
#include "vcount/tiling.hpp"

namespace vcount {

using Json = nlohmann::json;

// {tile_size, overlap, origins: [[x, y], ...], width, height}
Json tile_grid_to_json(const TileGrid& grid);
TileGrid tile_grid_from_json(const Json& j);

// One {x_min, y_min, x_max, y_max, score, source} object per line.
std::string detections_to_jsonl(std::span<const Detection> dets);
std::vector<Detection> detections_from_jsonl(std::string_view text);

// One {id, x_min, y_min, x_max, y_max} object per line.
std::string boxes_to_jsonl(std::span<const InstanceBox> boxes);
std::vector<InstanceBox> boxes_from_jsonl(std::string_view text);
GroundTruth ground_truth_from_jsonl(std::string_view text);

/// Box sizes for anchor clustering: lines with {w, h} or with box corners.
std::vector<Anchor> box_sizes_from_jsonl(std::string_view text);

Json anchors_to_json(std::span<const Anchor> anchors);

// {total, blobs: [{area, bounds, elongation, count, runs}, ...]}
Json count_report_to_json(const CountReport& report);
CountReport count_report_from_json(const Json& j);

// {counted, tp, fp, fn, recall, precision[, estimator_count]}
Json eval_report_to_json(const EvalReport& report);

Json box_to_json(const PixelBox& box);
PixelBox box_from_json(const Json& j);

/// Parses a JSON document, rethrowing syntax errors as Errc::parse.
Json parse_json(std::string_view text);

}  // namespace vcount
