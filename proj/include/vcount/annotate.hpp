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
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "vcount/hsv.hpp"
#include "vcount/png_io.hpp"
#include "vcount/raster.hpp"

namespace vcount {

/// Per-pixel instance ids: 0 is background, k >= 1 is vehicle k. Touching
/// pixels with different ids are distinct vehicles.
struct InstanceMask {
  Grid<std::uint32_t> labels;
  std::uint32_t next_id = 1;

  InstanceMask() = default;
  InstanceMask(int width, int height) : labels(width, height, 0u) {}

  int width() const noexcept { return labels.width(); }
  int height() const noexcept { return labels.height(); }
  bool has_instance(std::uint32_t id) const;

  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

enum class StrokeKind { straight_line, freehand };

struct Stroke {
  StrokeKind kind = StrokeKind::freehand;
  std::vector<Point> points;
  int brush_radius = 0;
};

struct FillParams {
  double fill_tolerance = 0.15;
  double road_margin = 0.10;
};

/// Throws invalid_config unless both values lie in (0, 1].
void validate(const FillParams& params);

enum class Traversal { breadth_first, depth_first };

/// Region growth over 8-connectivity from `seed`. A pixel joins when it is
/// unlabeled, within fill_tolerance of the seed colour and at least
/// road_margin away from the road colour, both measured with sv_distance.
/// The seed is always included. Result is in row-major order.
std::vector<Point> grow_region(const RasterImage& image, const Grid<std::uint32_t>& labels,
                               Point seed, const HsvColor& road, const FillParams& params,
                               Traversal order = Traversal::breadth_first);

/// Disc-stamped Bresenham rasterization, clipped to the image, row-major
/// and free of duplicates.
std::vector<Point> rasterize_stroke(const Stroke& stroke, int width, int height);

struct LabelResult {
  std::uint32_t instance_id = 0;
  std::vector<Point> pixels;
  std::optional<PixelBox> bounds;
};

/// Single-writer editing state for one image. Callers serialize mutations.
class AnnotationSession {
 public:
  static constexpr std::size_t kHistoryDepth = 64;

  explicit AnnotationSession(std::shared_ptr<const RasterImage> image, FillParams params = {});
  AnnotationSession(std::shared_ptr<const RasterImage> image, InstanceMask mask,
                    std::optional<HsvColor> road_color, FillParams params);

  const RasterImage& image() const noexcept { return *image_; }
  const InstanceMask& mask() const noexcept { return mask_; }
  const std::optional<HsvColor>& road_color() const noexcept { return road_color_; }
  const FillParams& params() const noexcept { return params_; }
  void set_params(const FillParams& params);

  /// Road colour from the mean RGB of the in-bounds 3x3 neighbourhood.
  HsvColor set_road_color(int x, int y);

  LabelResult flood_fill(int x, int y, Traversal order = Traversal::breadth_first);

  /// Labels only background pixels; an instance id is consumed only when at
  /// least one pixel changes.
  LabelResult apply_stroke(const Stroke& stroke);

  std::size_t erase_instance(std::uint32_t id);

  bool undo();
  bool redo();
  std::size_t undo_depth() const noexcept { return undo_.size(); }
  std::size_t redo_depth() const noexcept { return redo_.size(); }

 private:
  struct Change {
    std::size_t index;
    std::uint32_t before;
    std::uint32_t after;
  };
  struct Delta {
    std::vector<Change> changes;
    std::uint32_t next_before;
    std::uint32_t next_after;
  };

  LabelResult label_pixels(std::vector<Point> pixels);
  void push(Delta delta);
  void check_point(int x, int y) const;

  std::shared_ptr<const RasterImage> image_;
  InstanceMask mask_;
  std::optional<HsvColor> road_color_;
  FillParams params_;
  std::deque<Delta> undo_;
  std::deque<Delta> redo_;
};

struct InstanceBox {
  std::uint32_t id = 0;
  PixelBox box;

  friend bool operator==(const InstanceBox&, const InstanceBox&) = default;
};

/// One tight box per nonzero id, ordered by id.
std::vector<InstanceBox> extract_boxes(const InstanceMask& mask);

/// Display colour for an instance id. 0 is black; consecutive ids never
/// share a colour.
std::array<std::uint8_t, 3> palette_color(std::uint32_t id) noexcept;

RasterImage render_palette(const InstanceMask& mask);

/// Throws invalid_argument if an id does not fit in 16 bits.
Image16 mask_to_image16(const InstanceMask& mask);
InstanceMask mask_from_image16(const Image16& image);

}  // namespace vcount
