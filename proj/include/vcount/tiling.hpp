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

#include <vector>

#include "vcount/raster.hpp"

namespace vcount {

/// Fixed-size windows over a large raster. Origins are top-left offsets in
/// source coordinates, listed row by row. When the image is smaller than a
/// tile along an axis the single origin is 0 and the shortfall is recorded
/// in pad_x / pad_y.
struct TileGrid {
  int width = 0;
  int height = 0;
  int tile_size = 0;
  int overlap = 0;
  int pad_x = 0;
  int pad_y = 0;
  std::vector<Point> origins;

  int stride() const noexcept { return tile_size - overlap; }

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

struct Tile {
  Point origin;
  RasterImage image;
};

/// Origins advance by tile_size - overlap; the last row and column are
/// clamped flush with the far edge. Throws invalid_config when
/// overlap >= tile_size or the sizes are not positive.
TileGrid plan_tiles(int width, int height, int tile_size, int overlap);

/// tile_size x tile_size window at `origin`; pixels beyond the image are zero.
RasterImage crop_tile(const RasterImage& image, const TileGrid& grid, Point origin);

std::vector<Tile> crop_tiles(const RasterImage& image, const TileGrid& grid);

/// Reassembles a mosaic. Tiles are written in grid-origin order so that a
/// later origin overwrites earlier ones where they overlap. Throws
/// incomplete_mosaic when a grid origin has no tile, and invalid_argument
/// for tiles that do not belong to the grid.
RasterImage stitch(const std::vector<Tile>& tiles, const TileGrid& grid);

}  // namespace vcount
