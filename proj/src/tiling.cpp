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

#include "vcount/tiling.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace vcount {

namespace {

std::vector<int> axis_origins(int extent, int tile_size, int stride, int& pad) {
  pad = 0;
  if (extent <= tile_size) {
    pad = tile_size - extent;
    return {0};
  }
  std::vector<int> out;
  int o = 0;
  for (; o + tile_size < extent; o += stride) {
    out.push_back(o);
  }
  const int last = extent - tile_size;
  if (out.empty() || out.back() != last) {
    out.push_back(last);
  }
  return out;
}

}  // namespace

TileGrid plan_tiles(int width, int height, int tile_size, int overlap) {
  if (width < 1 || height < 1) {
    throw Error(Errc::invalid_config, "image dimensions must be positive");
  }
  if (tile_size < 1 || overlap < 0) {
    throw Error(Errc::invalid_config, "tile_size must be positive and overlap non-negative");
  }
  if (overlap >= tile_size) {
    throw Error(Errc::invalid_config, "overlap (" + std::to_string(overlap) +
                                          ") must be smaller than tile_size (" +
                                          std::to_string(tile_size) + ")");
  }

  TileGrid grid;
  grid.width = width;
  grid.height = height;
  grid.tile_size = tile_size;
  grid.overlap = overlap;
  const auto xs = axis_origins(width, tile_size, grid.stride(), grid.pad_x);
  const auto ys = axis_origins(height, tile_size, grid.stride(), grid.pad_y);
  grid.origins.reserve(xs.size() * ys.size());
  for (int y : ys) {
    for (int x : xs) {
      grid.origins.push_back({x, y});
    }
  }
  return grid;
}

RasterImage crop_tile(const RasterImage& image, const TileGrid& grid, Point origin) {
  RasterImage tile(grid.tile_size, grid.tile_size, image.channels());
  const int w = std::min(grid.tile_size, image.width() - origin.x);
  const int h = std::min(grid.tile_size, image.height() - origin.y);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto src = image.pixel(origin.x + x, origin.y + y);
      std::copy(src.begin(), src.end(), tile.pixel(x, y).begin());
    }
  }
  return tile;
}

std::vector<Tile> crop_tiles(const RasterImage& image, const TileGrid& grid) {
  if (image.width() != grid.width || image.height() != grid.height) {
    throw Error(Errc::invalid_argument, "image size does not match tile grid");
  }
  std::vector<Tile> tiles;
  tiles.reserve(grid.origins.size());
  for (const auto& o : grid.origins) {
    tiles.push_back({o, crop_tile(image, grid, o)});
  }
  return tiles;
}

RasterImage stitch(const std::vector<Tile>& tiles, const TileGrid& grid) {
  std::map<Point, const Tile*> by_origin;
  for (const auto& t : tiles) {
    if (std::find(grid.origins.begin(), grid.origins.end(), t.origin) == grid.origins.end()) {
      throw Error(Errc::invalid_argument, "tile origin (" + std::to_string(t.origin.x) + "," +
                                              std::to_string(t.origin.y) + ") not in grid");
    }
    if (!by_origin.emplace(t.origin, &t).second) {
      throw Error(Errc::invalid_argument, "duplicate tile for origin (" +
                                              std::to_string(t.origin.x) + "," +
                                              std::to_string(t.origin.y) + ")");
    }
  }

  int channels = 0;
  for (const auto& o : grid.origins) {
    auto it = by_origin.find(o);
    if (it == by_origin.end()) {
      throw Error(Errc::incomplete_mosaic, "missing tile for origin (" + std::to_string(o.x) +
                                               "," + std::to_string(o.y) + ")");
    }
    const auto& img = it->second->image;
    if (img.width() != grid.tile_size || img.height() != grid.tile_size) {
      throw Error(Errc::invalid_argument, "tile has wrong dimensions");
    }
    if (channels == 0) channels = img.channels();
    if (img.channels() != channels) {
      throw Error(Errc::invalid_argument, "tiles disagree on channel count");
    }
  }

  RasterImage out(grid.width, grid.height, channels);
  for (const auto& o : grid.origins) {
    const auto& img = by_origin.at(o)->image;
    const int w = std::min(grid.tile_size, grid.width - o.x);
    const int h = std::min(grid.tile_size, grid.height - o.y);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto src = img.pixel(x, y);
        std::copy(src.begin(), src.end(), out.pixel(o.x + x, o.y + y).begin());
      }
    }
  }
  return out;
}

}  // namespace vcount
