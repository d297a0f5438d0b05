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

#include "vcount/counting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <set>
#include <string>

namespace vcount {

TtaTransform make_transform(int rotate_degrees, bool flip_horizontal, int offset_x,
                            int offset_y) {
  if (rotate_degrees % 90 != 0) {
    throw Error(Errc::invalid_config, "rotation of " + std::to_string(rotate_degrees) +
                                          " degrees is not invertible on a pixel grid");
  }
  const int turns = ((rotate_degrees / 90) % 4 + 4) % 4;
  return {flip_horizontal, turns, offset_x, offset_y};
}

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::invalid_config, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

TtaTransform parse_transform(std::string_view text) {
  int degrees = 0;
  bool flip = false;
  int ox = 0;
  int oy = 0;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto part = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_config, "transform part '" + std::string(part) + "' lacks '='");
    }
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key == "rot") {
      degrees = parse_int(value, "rotation");
    } else if (key == "flip") {
      if (value == "h") {
        flip = true;
      } else if (value == "none") {
        flip = false;
      } else {
        throw Error(Errc::invalid_config, "flip must be 'h' or 'none'");
      }
    } else if (key == "offset") {
      const auto colon = value.find(':');
      if (colon == std::string_view::npos) {
        throw Error(Errc::invalid_config, "offset must be x:y");
      }
      ox = parse_int(value.substr(0, colon), "offset");
      oy = parse_int(value.substr(colon + 1), "offset");
    } else {
      throw Error(Errc::invalid_config, "unknown transform key '" + std::string(key) + "'");
    }
  }
  return make_transform(degrees, flip, ox, oy);
}

ProbabilityMask aggregate_votes(std::span<const Prediction> predictions, int width, int height) {
  if (predictions.size() > 0xffffu) {
    throw Error(Errc::invalid_argument, "too many predictions for 16-bit vote counters");
  }
  ProbabilityMask out(width, height);
  for (const auto& pred : predictions) {
    const auto& t = pred.transform;
    if (t.quarter_turns < 0 || t.quarter_turns > 3) {
      throw Error(Errc::invalid_config, "quarter_turns must be in [0, 3]");
    }
    const bool swapped = t.quarter_turns % 2 == 1;
    const int frame_w = swapped ? height : width;
    const int frame_h = swapped ? width : height;
    for (int v = 0; v < pred.mask.height(); ++v) {
      for (int u = 0; u < pred.mask.width(); ++u) {
        int x = u - t.offset_x;
        int y = v - t.offset_y;
        if (x < 0 || y < 0 || x >= frame_w || y >= frame_h) continue;
        // undo clockwise quarter turns one at a time
        int cur_w = frame_w;
        int cur_h = frame_h;
        for (int k = 0; k < t.quarter_turns; ++k) {
          const int px = y;
          const int py = cur_w - 1 - x;
          x = px;
          y = py;
          std::swap(cur_w, cur_h);
        }
        if (t.flip_horizontal) x = width - 1 - x;
        const auto idx = out.votes_total.index(x, y);
        ++out.votes_total[idx];
        if (pred.mask.at(u, v) != 0) ++out.votes_vehicle[idx];
      }
    }
  }
  return out;
}

BinaryMask threshold_votes(const ProbabilityMask& pmask) {
  BinaryMask out(pmask.width(), pmask.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int vehicle = pmask.votes_vehicle[i];
    const int total = pmask.votes_total[i];
    out[i] = 2 * vehicle > total ? 1 : 0;
  }
  return out;
}

Image16 votes_to_image16(const ProbabilityMask& pmask) {
  Image16 img{pmask.width(), pmask.height(), 2, {}};
  img.data.reserve(pmask.votes_total.size() * 2);
  for (std::size_t i = 0; i < pmask.votes_total.size(); ++i) {
    img.data.push_back(pmask.votes_vehicle[i]);
    img.data.push_back(pmask.votes_total[i]);
  }
  return img;
}

ProbabilityMask votes_from_image16(const Image16& image) {
  if (image.channels != 2) {
    throw Error(Errc::parse, "vote mask must have 2 channels (vehicle, total)");
  }
  ProbabilityMask out(image.width, image.height);
  for (std::size_t i = 0; i < out.votes_total.size(); ++i) {
    out.votes_vehicle[i] = image.data[2 * i];
    out.votes_total[i] = image.data[2 * i + 1];
    if (out.votes_vehicle[i] > out.votes_total[i]) {
      throw Error(Errc::parse, "vehicle votes exceed total votes");
    }
  }
  return out;
}

double elongation(std::span<const Point> pixels) {
  if (pixels.empty()) return 1.0;
  const double n = static_cast<double>(pixels.size());
  double cx = 0, cy = 0;
  for (const auto& p : pixels) {
    cx += p.x;
    cy += p.y;
  }
  cx /= n;
  cy /= n;
  double mu20 = 0, mu02 = 0, mu11 = 0;
  for (const auto& p : pixels) {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    mu20 += dx * dx;
    mu02 += dy * dy;
    mu11 += dx * dy;
  }
  // unit-square pixel footprint adds 1/12 variance per axis
  mu20 = mu20 / n + 1.0 / 12.0;
  mu02 = mu02 / n + 1.0 / 12.0;
  mu11 /= n;
  const double mean = 0.5 * (mu20 + mu02);
  const double spread = std::sqrt(0.25 * (mu20 - mu02) * (mu20 - mu02) + mu11 * mu11);
  const double major = mean + spread;
  const double minor = mean - spread;
  return std::max(1.0, std::sqrt(major / minor));
}

std::vector<PixelRun> Blob::runs() const {
  std::vector<PixelRun> out;
  for (const auto& p : pixels) {
    if (!out.empty() && out.back().y == p.y && out.back().x_end == p.x) {
      ++out.back().x_end;
    } else {
      out.push_back({p.y, p.x, p.x + 1});
    }
  }
  return out;
}

Blob Blob::from_runs(std::span<const PixelRun> runs) {
  Blob b;
  for (const auto& r : runs) {
    if (r.x_end <= r.x_begin) {
      throw Error(Errc::parse, "empty pixel run");
    }
    for (int x = r.x_begin; x < r.x_end; ++x) b.pixels.push_back({x, r.y});
  }
  if (b.pixels.empty()) {
    throw Error(Errc::parse, "blob has no pixels");
  }
  std::sort(b.pixels.begin(), b.pixels.end(), [](const Point& a, const Point& c) {
    return a.y != c.y ? a.y < c.y : a.x < c.x;
  });
  b.pixels.erase(std::unique(b.pixels.begin(), b.pixels.end()), b.pixels.end());
  b.area = static_cast<long long>(b.pixels.size());
  b.bounds = {b.pixels.front().x, b.pixels.front().y, b.pixels.front().x + 1,
              b.pixels.front().y + 1};
  for (const auto& p : b.pixels) {
    b.bounds.x_min = std::min(b.bounds.x_min, p.x);
    b.bounds.x_max = std::max(b.bounds.x_max, p.x + 1);
    b.bounds.y_max = std::max(b.bounds.y_max, p.y + 1);
  }
  b.elongation = vcount::elongation(b.pixels);
  return b;
}

std::vector<Blob> connected_components(const BinaryMask& mask) {
  std::vector<Blob> blobs;
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::deque<Point> queue;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto start = mask.index(x, y);
      if (mask[start] == 0 || seen[start]) continue;
      Blob blob;
      seen[start] = 1;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        blob.pixels.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (!mask.in_bounds(nx, ny)) continue;
            const auto idx = mask.index(nx, ny);
            if (mask[idx] == 0 || seen[idx]) continue;
            seen[idx] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      std::sort(blob.pixels.begin(), blob.pixels.end(), [](const Point& a, const Point& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      blob.area = static_cast<long long>(blob.pixels.size());
      blob.bounds = {blob.pixels.front().x, blob.pixels.front().y, blob.pixels.front().x + 1,
                     blob.pixels.back().y + 1};
      for (const auto& p : blob.pixels) {
        blob.bounds.x_min = std::min(blob.bounds.x_min, p.x);
        blob.bounds.x_max = std::max(blob.bounds.x_max, p.x + 1);
      }
      blob.elongation = vcount::elongation(blob.pixels);
      blobs.push_back(std::move(blob));
    }
  }
  return blobs;
}

void validate(const CountEstimatorConfig& cfg) {
  if (!(cfg.mean_px_lined > 0) || !(cfg.mean_px_side_by_side > 0) || !(cfg.min_blob_area > 0)) {
    throw Error(Errc::invalid_config, "count estimator values must be positive");
  }
  if (!(cfg.elongation_threshold >= 1.0)) {
    throw Error(Errc::invalid_config, "elongation_threshold must be >= 1");
  }
}

int estimate_count(const Blob& blob, const CountEstimatorConfig& cfg) {
  const double area = static_cast<double>(blob.area);
  if (area < cfg.min_blob_area) return 0;
  const double divisor =
      blob.elongation >= cfg.elongation_threshold ? cfg.mean_px_lined : cfg.mean_px_side_by_side;
  // lround rounds halfway cases away from zero
  return static_cast<int>(std::max(1L, std::lround(area / divisor)));
}

CountReport count_blobs(std::vector<Blob> blobs, const CountEstimatorConfig& cfg) {
  validate(cfg);
  CountReport report;
  report.blobs.reserve(blobs.size());
  for (auto& b : blobs) {
    const int n = estimate_count(b, cfg);
    report.total += n;
    report.blobs.push_back({std::move(b), n});
  }
  return report;
}

CountReport count_image(const BinaryMask& mask, const CountEstimatorConfig& cfg) {
  return count_blobs(connected_components(mask), cfg);
}

CalibrationStats calibrate_estimator(std::span<const InstanceMask> masks,
                                     const CountEstimatorConfig& base) {
  validate(base);
  CalibrationStats stats;
  stats.config = base;
  long long lined_area = 0;
  long long side_area = 0;
  for (const auto& m : masks) {
    BinaryMask fg(m.width(), m.height(), 0);
    for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = m.labels[i] != 0 ? 1 : 0;
    for (const auto& blob : connected_components(fg)) {
      std::set<std::uint32_t> ids;
      for (const auto& p : blob.pixels) ids.insert(m.labels.at(p.x, p.y));
      const auto vehicles = static_cast<long long>(ids.size());
      if (blob.elongation >= base.elongation_threshold) {
        ++stats.lined_groups;
        stats.lined_vehicles += vehicles;
        lined_area += blob.area;
      } else {
        ++stats.side_by_side_groups;
        stats.side_by_side_vehicles += vehicles;
        side_area += blob.area;
      }
    }
  }
  if (stats.lined_vehicles > 0) {
    stats.config.mean_px_lined =
        static_cast<double>(lined_area) / static_cast<double>(stats.lined_vehicles);
  }
  if (stats.side_by_side_vehicles > 0) {
    stats.config.mean_px_side_by_side =
        static_cast<double>(side_area) / static_cast<double>(stats.side_by_side_vehicles);
  }
  return stats;
}

}  // namespace vcount
