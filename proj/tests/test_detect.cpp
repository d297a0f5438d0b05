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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support/oracles.hpp"
#include "vcount/detect.hpp"
#include "vcount/error.hpp"

using namespace vcount;

namespace {

Detection det(double x0, double y0, double x1, double y1, double score) {
  return {{x0, y0, x1, y1}, score, Source::detector};
}

std::vector<Detection> random_dets(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> pos(0, 60);
  std::uniform_int_distribution<int> size(2, 14);
  std::uniform_int_distribution<int> score(1, 20);  // coarse so ties occur
  std::vector<Detection> out;
  for (int i = 0; i < n; ++i) {
    const double x = pos(rng);
    const double y = pos(rng);
    out.push_back(det(x, y, x + size(rng), y + size(rng), score(rng) / 20.0));
  }
  return out;
}

}  // namespace

TEST_CASE("iou examples and pixel-count agreement") {
  CHECK(iou(PixelBox{0, 0, 4, 4}, PixelBox{0, 0, 4, 4}) == 1.0);
  CHECK(iou(PixelBox{0, 0, 4, 4}, PixelBox{4, 0, 8, 4}) == 0.0);
  CHECK(iou(PixelBox{0, 0, 4, 4}, PixelBox{2, 0, 6, 4}) == 1.0 / 3.0);
  CHECK(iou(Box{0, 0, 4, 4}, Box{2, 0, 6, 4}) == 1.0 / 3.0);

  std::mt19937 rng(17);
  std::uniform_int_distribution<int> c(0, 15);
  for (int i = 0; i < 300; ++i) {
    int a0 = c(rng), a1 = c(rng), a2 = c(rng), a3 = c(rng);
    int b0 = c(rng), b1 = c(rng), b2 = c(rng), b3 = c(rng);
    if (a0 == a2 || a1 == a3 || b0 == b2 || b1 == b3) continue;
    const PixelBox a{std::min(a0, a2), std::min(a1, a3), std::max(a0, a2), std::max(a1, a3)};
    const PixelBox b{std::min(b0, b2), std::min(b1, b3), std::max(b0, b2), std::max(b1, b3)};
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) == oracle::pixel_iou(a, b, 16));
  }
}

TEST_CASE("anchor examples") {
  const std::vector<Anchor> same(6, Anchor{5, 8});
  CHECK(compute_anchors(same, 1).anchors == std::vector<Anchor>{{5, 8}});

  const std::vector<Anchor> pair{{4, 8}, {6, 8}};
  const auto fit = compute_anchors(pair, 1);
  CHECK(fit.anchors == std::vector<Anchor>{{5, 8}});
  CHECK(fit.cost == doctest::Approx(oracle::best_clustering_cost({{4, 8}, {6, 8}}, 1)));

  const std::vector<Anchor> distinct{{12, 4}, {3, 3}, {5, 9}, {3, 3}, {12, 4}};
  const auto exact = compute_anchors(distinct, 3);
  CHECK(exact.anchors == std::vector<Anchor>{{3, 3}, {5, 9}, {12, 4}});
  CHECK(exact.cost == doctest::Approx(0.0));
}

TEST_CASE("anchor argument errors") {
  const std::vector<Anchor> two{{4, 8}, {6, 8}};
  for (std::size_t k : {std::size_t{0}, std::size_t{3}}) {
    try {
      compute_anchors(two, k);
      FAIL("expected argument error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_argument);
    }
  }
}

TEST_CASE("anchor search is monotone, deterministic and near the exhaustive optimum") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> side(2, 30);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 6;
    std::vector<Anchor> boxes;
    std::vector<oracle::Size> sizes;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = side(rng);
      const double h = side(rng);
      boxes.push_back({w, h});
      sizes.push_back({w, h});
    }
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto fit = compute_anchors(boxes, k);
      for (std::size_t i = 1; i < fit.cost_history.size(); ++i) {
        CHECK(fit.cost_history[i] <= fit.cost_history[i - 1]);
      }
      CHECK(fit.anchors.size() == k);
      for (std::size_t i = 1; i < k; ++i) {
        CHECK(fit.anchors[i - 1].w * fit.anchors[i - 1].h <= fit.anchors[i].w * fit.anchors[i].h);
      }
      CHECK(fit.cost == doctest::Approx(assignment_cost(boxes, fit.assignment, k)));
      CHECK(std::abs(fit.cost - oracle::best_clustering_cost(sizes, k)) <= 1e-9);
      const auto again = compute_anchors(boxes, k);
      CHECK(again.anchors == fit.anchors);
    }
  }
}

TEST_CASE("anchors split over levels finest first") {
  const std::vector<Anchor> a{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}};
  const std::vector<int> strides{8, 4, 2};
  const auto levels = assign_anchors_to_levels(a, strides);
  CHECK(levels.at(2) == std::vector<Anchor>{{1, 1}, {2, 2}});
  CHECK(levels.at(4) == std::vector<Anchor>{{3, 3}, {4, 4}});
  CHECK(levels.at(8) == std::vector<Anchor>{{5, 5}, {6, 6}});
}

TEST_CASE("decode examples") {
  {
    auto g = make_grid(2, 8, 8, {{1, 1}});
    const auto dets = decode_grid(g);
    REQUIRE(dets.size() == 64);
    CHECK(dets[0].box == Box{0.5, 0.5, 1.5, 1.5});
    CHECK(dets[0].score == 0.5);
  }
  {
    auto g = make_grid(2, 8, 8, {{5, 8}});
    const auto dets = decode_grid(g);
    CHECK(dets[0].box == Box{0, 0, 3.5, 5});  // centre (1,1), clipped at the origin
  }
  {
    auto g = make_grid(4, 8, 8, {{5, 8}});
    const auto dets = decode_grid(g);
    const auto& d = dets[2 * 8 + 3];
    CHECK(d.box == Box{11.5, 6, 16.5, 14});
  }
  {
    auto g = make_grid(4, 8, 8, {{5, 8}});
    g.value(3, 2, 0, 2) = static_cast<float>(std::log(2.0));
    const auto dets = decode_grid(g);
    CHECK(dets[2 * 8 + 3].box.width() == doctest::Approx(10.0));
  }
}

TEST_CASE("decoded scores stay open and boxes stay inside the input") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<float> raw(-60.f, 60.f);
  auto g = make_grid(4, 6, 5, {{3, 7}, {20, 9}});
  for (auto& v : g.raw) v = raw(rng);
  g.raw[4] = 1000.f;
  g.raw[9] = -1000.f;
  for (const auto& d : decode_grid(g)) {
    CHECK(d.score > 0.0);
    CHECK(d.score < 1.0);
    CHECK(d.box.x_min >= 0);
    CHECK(d.box.y_min >= 0);
    CHECK(d.box.x_max <= g.input_width());
    CHECK(d.box.y_max <= g.input_height());
  }
  CHECK(decode_grid(g, 0.99).size() < decode_grid(g).size());
}

TEST_CASE("grid validation and files") {
  auto g = make_grid(2, 3, 2, {{5, 8}, {2, 2}});
  for (std::size_t i = 0; i < g.raw.size(); ++i) g.raw[i] = static_cast<float>(i) * 0.25f - 3.f;
  const auto back = decode_grid_file(encode_grid(g));
  CHECK(back.stride == 2);
  CHECK(back.cells_x == 3);
  CHECK(back.anchors == g.anchors);
  CHECK(back.raw == g.raw);

  const auto path = std::filesystem::temp_directory_path() / "vcount_grid_test.bin";
  write_grid(path, g);
  CHECK(read_grid(path).raw == g.raw);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(decode_grid_file("SCGRID00"), Error);
  auto bad = g;
  bad.raw.pop_back();
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("nms examples") {
  const auto one = std::vector<Detection>{det(0, 0, 4, 4, 0.7)};
  CHECK(nms(one, 0.5) == one);

  const auto twins = nms({det(0, 0, 4, 4, 0.8), det(0, 0, 4, 4, 0.9)}, 0.5);
  REQUIRE(twins.size() == 1);
  CHECK(twins[0].score == 0.9);

  // A [0,4) overlaps B [2,6), B overlaps C [4,8), A and C disjoint
  const auto a = det(0, 0, 4, 4, 0.9);
  const auto b = det(2, 0, 6, 4, 0.8);
  const auto c = det(4, 0, 8, 4, 0.7);
  CHECK(nms({c, b, a}, 0.3) == std::vector<Detection>{a, c});

  // equal scores: the smaller box wins
  const auto big = det(0, 0, 10, 10, 0.5);
  const auto small = det(0, 0, 9, 10, 0.5);
  CHECK(nms({big, small}, 0.5) == std::vector<Detection>{small});
}

TEST_CASE("nms properties on random sets") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto dets = random_dets(rng, 30);
    const double t = 0.3;
    const auto kept = nms(dets, t);
    CHECK(nms(kept, t) == kept);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) CHECK(kept[i - 1].score >= kept[i].score);
      for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK(iou(kept[i].box, kept[j].box) < t);
    }
    // every dropped detection overlaps something kept at least as strong
    for (const auto& d : dets) {
      if (std::find(kept.begin(), kept.end(), d) != kept.end()) continue;
      bool covered = false;
      for (const auto& k : kept) covered = covered || (k.score >= d.score && iou(k.box, d.box) >= t);
      CHECK(covered);
    }
  }
}

TEST_CASE("offsets and sources") {
  std::vector<Detection> d{det(1, 2, 3, 4, 0.5)};
  offset_detections(d, 512, 448);
  CHECK(d[0].box == Box{513, 450, 515, 452});
  CHECK(parse_source("fused") == Source::fused);
  CHECK(source_name(Source::segmentation) == "segmentation");
  CHECK_THROWS_AS(parse_source("radar"), Error);
  CHECK(quantize(Box{0.123, 1.005, 2.499, 3.0}).x_min == 0.12);
}
