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

#include "vcount/annotate.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>

namespace vcount {

namespace {

constexpr int kNeighbours[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                   {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

void sort_row_major(std::vector<Point>& pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
}

std::string coord_text(int x, int y) {
  return "(" + std::to_string(x) + "," + std::to_string(y) + ")";
}

void bresenham(Point a, Point b, std::vector<Point>& out) {
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  int x = a.x;
  int y = a.y;
  while (true) {
    out.push_back({x, y});
    if (x == b.x && y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace

bool InstanceMask::has_instance(std::uint32_t id) const {
  if (id == 0) return false;
  const auto cells = labels.cells();
  return std::find(cells.begin(), cells.end(), id) != cells.end();
}

void validate(const FillParams& params) {
  auto ok = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!ok(params.fill_tolerance)) {
    throw Error(Errc::invalid_config, "fill_tolerance must lie in (0, 1]");
  }
  if (!ok(params.road_margin)) {
    throw Error(Errc::invalid_config, "road_margin must lie in (0, 1]");
  }
}

std::vector<Point> grow_region(const RasterImage& image, const Grid<std::uint32_t>& labels,
                               Point seed, const HsvColor& road, const FillParams& params,
                               Traversal order) {
  if (!image.in_bounds(seed.x, seed.y)) {
    throw Error(Errc::coordinate, "seed " + coord_text(seed.x, seed.y) + " outside image");
  }
  const HsvColor seed_color = pixel_hsv(image, seed.x, seed.y);
  auto accepts = [&](int x, int y) {
    if (labels.at(x, y) != 0) return false;
    const HsvColor c = pixel_hsv(image, x, y);
    return sv_distance(c, seed_color) <= params.fill_tolerance &&
           sv_distance(c, road) >= params.road_margin;
  };

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(image.width()) * image.height(), 0);
  std::deque<Point> frontier{seed};
  seen[labels.index(seed.x, seed.y)] = 1;
  std::vector<Point> region;
  while (!frontier.empty()) {
    Point p;
    if (order == Traversal::breadth_first) {
      p = frontier.front();
      frontier.pop_front();
    } else {
      p = frontier.back();
      frontier.pop_back();
    }
    region.push_back(p);
    for (const auto& d : kNeighbours) {
      const int nx = p.x + d[0];
      const int ny = p.y + d[1];
      if (!image.in_bounds(nx, ny)) continue;
      auto& flag = seen[labels.index(nx, ny)];
      if (flag) continue;
      flag = 1;
      if (accepts(nx, ny)) frontier.push_back({nx, ny});
    }
  }
  sort_row_major(region);
  return region;
}

std::vector<Point> rasterize_stroke(const Stroke& stroke, int width, int height) {
  if (stroke.points.empty()) {
    throw Error(Errc::invalid_argument, "stroke has no points");
  }
  if (stroke.kind == StrokeKind::straight_line && stroke.points.size() != 2) {
    throw Error(Errc::invalid_argument, "straight-line stroke needs exactly 2 points");
  }
  if (stroke.brush_radius < 0) {
    throw Error(Errc::invalid_argument, "brush radius must be non-negative");
  }

  std::vector<Point> centre_line;
  if (stroke.points.size() == 1) {
    centre_line.push_back(stroke.points.front());
  }
  for (std::size_t i = 1; i < stroke.points.size(); ++i) {
    bresenham(stroke.points[i - 1], stroke.points[i], centre_line);
  }

  const int r = stroke.brush_radius;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(width) * height, 0);
  for (const auto& c : centre_line) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy > r * r) continue;
        const int x = c.x + dx;
        const int y = c.y + dy;
        if (x < 0 || y < 0 || x >= width || y >= height) continue;
        hit[static_cast<std::size_t>(y) * width + x] = 1;
      }
    }
  }
  std::vector<Point> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (hit[static_cast<std::size_t>(y) * width + x]) out.push_back({x, y});
    }
  }
  return out;
}

AnnotationSession::AnnotationSession(std::shared_ptr<const RasterImage> image, FillParams params)
    : image_(std::move(image)), params_(params) {
  if (!image_ || image_->empty()) {
    throw Error(Errc::invalid_argument, "annotation session needs an image");
  }
  validate(params_);
  mask_ = InstanceMask(image_->width(), image_->height());
}

AnnotationSession::AnnotationSession(std::shared_ptr<const RasterImage> image, InstanceMask mask,
                                     std::optional<HsvColor> road_color, FillParams params)
    : image_(std::move(image)), mask_(std::move(mask)), road_color_(road_color), params_(params) {
  if (!image_ || image_->empty()) {
    throw Error(Errc::invalid_argument, "annotation session needs an image");
  }
  validate(params_);
  if (mask_.width() != image_->width() || mask_.height() != image_->height()) {
    throw Error(Errc::invalid_argument, "mask dimensions do not match image");
  }
}

void AnnotationSession::set_params(const FillParams& params) {
  validate(params);
  params_ = params;
}

void AnnotationSession::check_point(int x, int y) const {
  if (!image_->in_bounds(x, y)) {
    throw Error(Errc::coordinate, "point " + coord_text(x, y) + " outside " +
                                      std::to_string(image_->width()) + "x" +
                                      std::to_string(image_->height()) + " image");
  }
}

HsvColor AnnotationSession::set_road_color(int x, int y) {
  check_point(x, y);
  double sum[3] = {0, 0, 0};
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (!image_->in_bounds(x + dx, y + dy)) continue;
      const auto px = image_->pixel(x + dx, y + dy);
      for (int c = 0; c < 3; ++c) {
        sum[c] += px[image_->channels() == 1 ? 0 : c];
      }
      ++n;
    }
  }
  road_color_ = rgb_to_hsv(sum[0] / n, sum[1] / n, sum[2] / n);
  return *road_color_;
}

LabelResult AnnotationSession::flood_fill(int x, int y, Traversal order) {
  if (!road_color_) {
    throw Error(Errc::precondition, "road colour must be set before flood fill");
  }
  check_point(x, y);
  if (const auto id = mask_.labels.at(x, y); id != 0) {
    throw Error(Errc::conflict,
                "seed " + coord_text(x, y) + " already belongs to instance " + std::to_string(id));
  }
  return label_pixels(grow_region(*image_, mask_.labels, {x, y}, *road_color_, params_, order));
}

LabelResult AnnotationSession::apply_stroke(const Stroke& stroke) {
  if (stroke.points.empty()) {
    throw Error(Errc::invalid_argument, "stroke has no points");
  }
  for (const auto& p : stroke.points) check_point(p.x, p.y);
  auto pixels = rasterize_stroke(stroke, image_->width(), image_->height());
  std::erase_if(pixels, [&](const Point& p) { return mask_.labels.at(p.x, p.y) != 0; });
  if (pixels.empty()) return {};
  return label_pixels(std::move(pixels));
}

LabelResult AnnotationSession::label_pixels(std::vector<Point> pixels) {
  LabelResult result;
  result.instance_id = mask_.next_id;
  Delta delta{{}, mask_.next_id, mask_.next_id + 1};
  delta.changes.reserve(pixels.size());
  PixelBox box{pixels.front().x, pixels.front().y, pixels.front().x + 1, pixels.front().y + 1};
  for (const auto& p : pixels) {
    const auto idx = mask_.labels.index(p.x, p.y);
    delta.changes.push_back({idx, mask_.labels[idx], result.instance_id});
    mask_.labels[idx] = result.instance_id;
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x + 1);
    box.y_max = std::max(box.y_max, p.y + 1);
  }
  mask_.next_id = delta.next_after;
  result.pixels = std::move(pixels);
  result.bounds = box;
  push(std::move(delta));
  return result;
}

std::size_t AnnotationSession::erase_instance(std::uint32_t id) {
  Delta delta{{}, mask_.next_id, mask_.next_id};
  if (id != 0) {
    auto cells = mask_.labels.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] == id) {
        delta.changes.push_back({i, id, 0u});
        cells[i] = 0;
      }
    }
  }
  if (delta.changes.empty()) {
    throw Error(Errc::not_found, "no instance with id " + std::to_string(id));
  }
  const auto n = delta.changes.size();
  push(std::move(delta));
  return n;
}

void AnnotationSession::push(Delta delta) {
  undo_.push_back(std::move(delta));
  if (undo_.size() > kHistoryDepth) undo_.pop_front();
  redo_.clear();
}

bool AnnotationSession::undo() {
  if (undo_.empty()) return false;
  Delta d = std::move(undo_.back());
  undo_.pop_back();
  for (auto it = d.changes.rbegin(); it != d.changes.rend(); ++it) {
    mask_.labels[it->index] = it->before;
  }
  mask_.next_id = d.next_before;
  redo_.push_back(std::move(d));
  return true;
}

bool AnnotationSession::redo() {
  if (redo_.empty()) return false;
  Delta d = std::move(redo_.back());
  redo_.pop_back();
  for (const auto& c : d.changes) mask_.labels[c.index] = c.after;
  mask_.next_id = d.next_after;
  undo_.push_back(std::move(d));
  return true;
}

std::vector<InstanceBox> extract_boxes(const InstanceMask& mask) {
  std::map<std::uint32_t, PixelBox> boxes;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto id = mask.labels.at(x, y);
      if (id == 0) continue;
      auto [it, fresh] = boxes.try_emplace(id, PixelBox{x, y, x + 1, y + 1});
      if (!fresh) {
        auto& b = it->second;
        b.x_min = std::min(b.x_min, x);
        b.y_min = std::min(b.y_min, y);
        b.x_max = std::max(b.x_max, x + 1);
        b.y_max = std::max(b.y_max, y + 1);
      }
    }
  }
  std::vector<InstanceBox> out;
  out.reserve(boxes.size());
  for (const auto& [id, box] : boxes) out.push_back({id, box});
  return out;
}

std::array<std::uint8_t, 3> palette_color(std::uint32_t id) noexcept {
  static constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette{{
      {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
      {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {170, 110, 40},
  }};
  if (id == 0) return {0, 0, 0};
  return kPalette[(id - 1) % kPalette.size()];
}

RasterImage render_palette(const InstanceMask& mask) {
  RasterImage out(mask.width(), mask.height(), 3);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto c = palette_color(mask.labels.at(x, y));
      auto px = out.pixel(x, y);
      std::copy(c.begin(), c.end(), px.begin());
    }
  }
  return out;
}

Image16 mask_to_image16(const InstanceMask& mask) {
  Image16 out{mask.width(), mask.height(), 1, {}};
  out.data.reserve(mask.labels.size());
  for (const auto id : mask.labels.cells()) {
    if (id > 0xffffu) {
      throw Error(Errc::invalid_argument,
                  "instance id " + std::to_string(id) + " does not fit a 16-bit mask");
    }
    out.data.push_back(static_cast<std::uint16_t>(id));
  }
  return out;
}

InstanceMask mask_from_image16(const Image16& image) {
  if (image.channels != 1) {
    throw Error(Errc::parse, "instance mask must be single-channel");
  }
  InstanceMask mask(image.width, image.height);
  std::uint32_t max_id = 0;
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    mask.labels[i] = image.data[i];
    max_id = std::max<std::uint32_t>(max_id, image.data[i]);
  }
  mask.next_id = max_id + 1;
  return mask;
}

}  // namespace vcount
