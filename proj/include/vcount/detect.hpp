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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcount/raster.hpp"

namespace vcount {

/// Continuous box in pixel units, min corner inclusive, max exclusive.
struct Box {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }

  static Box from(const PixelBox& b) noexcept {
    return {static_cast<double>(b.x_min), static_cast<double>(b.y_min),
            static_cast<double>(b.x_max), static_cast<double>(b.y_max)};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

enum class Source { detector, segmentation, fused };

std::string_view source_name(Source s) noexcept;
Source parse_source(std::string_view name);

struct Detection {
  Box box;
  double score = 0.0;
  Source source = Source::detector;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Rounds every coordinate to 0.01 px.
Box quantize(const Box& box) noexcept;

double iou(const Box& a, const Box& b) noexcept;
double iou(const PixelBox& a, const PixelBox& b) noexcept;

/// Greedy suppression. Candidates are visited by score (descending), then
/// smaller area, then lexicographic coordinates; anything with
/// IoU >= iou_threshold against a kept box is dropped. Output keeps the
/// visiting order.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

struct Anchor {
  double w = 0;
  double h = 0;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// 1 - IoU of two boxes sharing a centre.
double anchor_distance(const Anchor& a, const Anchor& b) noexcept;

struct AnchorSearch {
  std::uint64_t seed = 0;
  int restarts = 32;
  int max_iterations = 300;
  /// Single-box reassignment passes run after the Lloyd steps only up to
  /// this many boxes, since each pass is quadratic.
  std::size_t refine_limit = 512;
};

struct AnchorFit {
  std::vector<Anchor> anchors;        // sorted by area ascending
  std::vector<std::size_t> assignment;  // box -> index into anchors
  double cost = 0;                    // sum of anchor_distance to assigned centroid
  std::vector<double> cost_history;   // per iteration of the winning restart
};

/// Cost of a clustering whose centroids are the per-cluster means.
double assignment_cost(std::span<const Anchor> boxes, std::span<const std::size_t> assignment,
                       std::size_t k);

/// k-means over box sizes with IoU distance, k-means++ seeding and several
/// seeded restarts. Centroids are cluster means; an iteration is accepted
/// only while the cost strictly drops, so cost_history never increases.
/// Restarts alternate k-means++ seeds, uniformly drawn seeds and random
/// partitions; on small inputs each run ends with best-improvement
/// single-box moves.
AnchorFit compute_anchors(std::span<const Anchor> boxes, std::size_t k,
                          const AnchorSearch& search = {});

/// Splits area-sorted anchors evenly over strides, the finest stride taking
/// the smallest anchors.
std::map<int, std::vector<Anchor>> assign_anchors_to_levels(std::span<const Anchor> anchors,
                                                            std::span<const int> strides);

/// Raw head output for one stride. Values are laid out (y, x, anchor, channel)
/// with channels (tx, ty, tw, th, t_obj).
struct DetectionGrid {
  static constexpr int kChannels = 5;

  int stride = 0;
  int cells_x = 0;
  int cells_y = 0;
  std::vector<Anchor> anchors;
  std::vector<float> raw;

  int input_width() const noexcept { return cells_x * stride; }
  int input_height() const noexcept { return cells_y * stride; }
  float value(int x, int y, std::size_t anchor, int channel) const {
    return raw[((static_cast<std::size_t>(y) * cells_x + x) * anchors.size() + anchor) *
                   kChannels +
               channel];
  }
  float& value(int x, int y, std::size_t anchor, int channel) {
    return raw[((static_cast<std::size_t>(y) * cells_x + x) * anchors.size() + anchor) *
                   kChannels +
               channel];
  }
};

/// Zero-filled grid with the right buffer size.
DetectionGrid make_grid(int stride, int cells_x, int cells_y, std::vector<Anchor> anchors);

void validate(const DetectionGrid& grid);

/// Decodes every cell and anchor. Boxes are clipped to the grid's input
/// extent and quantized; entries scoring below min_score are skipped.
std::vector<Detection> decode_grid(const DetectionGrid& grid, double min_score = 0.0);

/// Shifts tile-local detections into mosaic coordinates.
void offset_detections(std::vector<Detection>& dets, double dx, double dy);

/// Little-endian "SCGRID01" container.
std::string encode_grid(const DetectionGrid& grid);
DetectionGrid decode_grid_file(std::string_view bytes);
void write_grid(const std::filesystem::path& path, const DetectionGrid& grid);
DetectionGrid read_grid(const std::filesystem::path& path);

}  // namespace vcount
