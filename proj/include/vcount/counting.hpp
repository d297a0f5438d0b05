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
#include <span>
#include <string_view>
#include <vector>

#include "vcount/annotate.hpp"
#include "vcount/png_io.hpp"
#include "vcount/raster.hpp"

namespace vcount {

/// Per-pixel vote counters from test-time augmented predictions.
struct ProbabilityMask {
  Grid<std::uint16_t> votes_vehicle;
  Grid<std::uint16_t> votes_total;

  ProbabilityMask() = default;
  ProbabilityMask(int width, int height)
      : votes_vehicle(width, height, 0), votes_total(width, height, 0) {}

  int width() const noexcept { return votes_total.width(); }
  int height() const noexcept { return votes_total.height(); }
};

/// How a prediction was produced from the canvas: optional horizontal flip,
/// then `quarter_turns` clockwise rotations, then the result placed at
/// (offset_x, offset_y) inside the prediction frame. Positive offsets are
/// padding, negative ones cropping.
struct TtaTransform {
  bool flip_horizontal = false;
  int quarter_turns = 0;
  int offset_x = 0;
  int offset_y = 0;

  friend bool operator==(const TtaTransform&, const TtaTransform&) = default;
};

/// Accepts rotations in degrees; anything other than a multiple of 90 is
/// not invertible on a pixel grid and raises invalid_config.
TtaTransform make_transform(int rotate_degrees, bool flip_horizontal, int offset_x = 0,
                            int offset_y = 0);

/// Parses "rot=90,flip=h,offset=4:-2" style descriptors; every part is
/// optional.
TtaTransform parse_transform(std::string_view text);

struct Prediction {
  BinaryMask mask;
  TtaTransform transform;
};

/// Maps every prediction back onto a width x height canvas and accumulates
/// votes. Prediction pixels outside the transformed canvas footprint (the
/// padding) cast no vote.
ProbabilityMask aggregate_votes(std::span<const Prediction> predictions, int width, int height);

/// Strict majority: vehicle iff votes_vehicle > votes_total / 2.
BinaryMask threshold_votes(const ProbabilityMask& pmask);

Image16 votes_to_image16(const ProbabilityMask& pmask);
ProbabilityMask votes_from_image16(const Image16& image);

/// Horizontal pixel run [x_begin, x_end) on row y.
struct PixelRun {
  int y = 0;
  int x_begin = 0;
  int x_end = 0;

  friend bool operator==(const PixelRun&, const PixelRun&) = default;
};

struct Blob {
  std::vector<Point> pixels;  // row-major
  long long area = 0;
  PixelBox bounds;
  double elongation = 1.0;

  std::vector<PixelRun> runs() const;
  static Blob from_runs(std::span<const PixelRun> runs);
};

/// Major/minor axis ratio from second-order central moments, treating every
/// pixel as a unit square so a w x h rectangle yields max(w,h)/min(w,h).
double elongation(std::span<const Point> pixels);

/// 8-connected labeling. Blobs are ordered by their first pixel in raster
/// order.
std::vector<Blob> connected_components(const BinaryMask& mask);

struct CountEstimatorConfig {
  double mean_px_lined = 40.0;
  double mean_px_side_by_side = 40.0;
  double min_blob_area = 12.0;
  double elongation_threshold = 2.5;
};

void validate(const CountEstimatorConfig& cfg);

int estimate_count(const Blob& blob, const CountEstimatorConfig& cfg);

struct BlobCount {
  Blob blob;
  int count = 0;
};

struct CountReport {
  long long total = 0;
  std::vector<BlobCount> blobs;
};

CountReport count_blobs(std::vector<Blob> blobs, const CountEstimatorConfig& cfg);
CountReport count_image(const BinaryMask& mask, const CountEstimatorConfig& cfg);

struct CalibrationStats {
  CountEstimatorConfig config;
  long long lined_groups = 0;
  long long lined_vehicles = 0;
  long long side_by_side_groups = 0;
  long long side_by_side_vehicles = 0;
};

/// Derives the per-vehicle pixel means from annotated instance masks. Each
/// 8-connected group of labeled pixels is one blob holding as many vehicles
/// as it has distinct ids; groups are split into lined and side-by-side by
/// the elongation threshold of `base`. A class with no samples keeps the
/// value from `base`.
CalibrationStats calibrate_estimator(std::span<const InstanceMask> masks,
                                     const CountEstimatorConfig& base);

}  // namespace vcount
