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
#include <random>

#include "support/oracles.hpp"
#include "vcount/error.hpp"
#include "vcount/eval.hpp"

using namespace vcount;

namespace {

Detection det(double x0, double y0, double x1, double y1, double score) {
  return {{x0, y0, x1, y1}, score, Source::detector};
}

GroundTruth truth(const std::vector<PixelBox>& boxes) {
  GroundTruth gt;
  std::uint32_t id = 1;
  for (const auto& b : boxes) gt.boxes.push_back({id++, b});
  return gt;
}

std::vector<std::vector<double>> iou_matrix(const std::vector<Detection>& preds,
                                            const GroundTruth& gt) {
  std::vector<std::vector<double>> m;
  for (const auto& p : preds) {
    std::vector<double> row;
    for (const auto& g : gt.boxes) row.push_back(iou(p.box, Box::from(g.box)));
    m.push_back(row);
  }
  return m;
}

}  // namespace

TEST_CASE("perfect predictions") {
  const auto gt = truth({{0, 0, 5, 8}, {10, 0, 15, 8}, {20, 20, 28, 25}});
  std::vector<Detection> preds;
  for (const auto& g : gt.boxes) preds.push_back({Box::from(g.box), 1.0, Source::detector});
  const auto r = evaluate_run(preds, gt, 0.3);
  CHECK(r.tp == 3);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(*r.recall == 1.0);
  CHECK(*r.precision == 1.0);
}

TEST_CASE("duplicate predictions on one box") {
  const auto gt = truth({{0, 0, 5, 8}});
  const std::vector<Detection> preds{det(0, 0, 5, 8, 0.9), det(0, 1, 5, 8, 0.8)};
  const auto m = match_detections(preds, gt, 0.3);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.assignment[0] == std::optional<std::size_t>{0});
  CHECK_FALSE(m.assignment[1].has_value());
}

TEST_CASE("crafted three-by-two instance agrees with the assignment oracle") {
  const auto gt = truth({{0, 0, 10, 10}, {20, 0, 30, 10}});
  const std::vector<Detection> preds{det(0, 0, 10, 10, 0.9), det(2, 0, 12, 10, 0.8),
                                     det(19, 0, 29, 10, 0.7)};
  const auto m = match_detections(preds, gt, 0.3);
  CHECK(m.tp == oracle::max_matching(iou_matrix(preds, gt), 0.3));
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 0);
}

TEST_CASE("greedy matching never beats the optimum") {
  std::mt19937 rng(55);
  std::uniform_int_distribution<int> pos(0, 12);
  std::uniform_int_distribution<int> size(3, 8);
  long long gap = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PixelBox> g;
    for (int i = 0; i < 1 + trial % 5; ++i) {
      const int x = pos(rng), y = pos(rng);
      g.push_back({x, y, x + size(rng), y + size(rng)});
    }
    std::vector<Detection> preds;
    for (int i = 0; i < 1 + (trial / 5) % 5; ++i) {
      const double x = pos(rng), y = pos(rng);
      preds.push_back(det(x, y, x + size(rng), y + size(rng), (rng() % 10) / 10.0));
    }
    const auto gt = truth(g);
    const auto m = match_detections(preds, gt, 0.3);
    const auto best = oracle::max_matching(iou_matrix(preds, gt), 0.3);
    CHECK(m.tp <= best);
    CHECK(m.tp + m.fn == static_cast<long long>(gt.boxes.size()));
    CHECK(m.tp + m.fp == static_cast<long long>(preds.size()));
    gap += best - m.tp;
  }
  MESSAGE("greedy shortfall over 300 random instances: " << gap);
}

TEST_CASE("table metrics") {
  const auto a = metrics(2042, 325, 631);
  CHECK(a.counted == 2367);
  CHECK(100 * *a.recall == doctest::Approx(76.394).epsilon(1e-4));
  CHECK(100 * *a.precision == doctest::Approx(86.270).epsilon(1e-4));
  const auto b = metrics(1922, 336, 751);
  CHECK(b.counted == 2258);
  CHECK(100 * *b.recall == doctest::Approx(71.904).epsilon(1e-4));
  CHECK(100 * *b.precision == doctest::Approx(85.120).epsilon(1e-4));

  const auto empty = metrics(0, 0, 0);
  CHECK_FALSE(empty.recall.has_value());
  CHECK_FALSE(empty.precision.has_value());

  try {
    metrics(-1, 0, 0);
    FAIL("expected argument error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
}

TEST_CASE("empty predictions") {
  const auto r = evaluate_run(std::vector<Detection>{}, truth({{0, 0, 4, 4}, {5, 5, 9, 9}}), 0.3);
  CHECK(r.fn == 2);
  CHECK(*r.recall == 0.0);
  CHECK_FALSE(r.precision.has_value());
}

TEST_CASE("ten box scene") {
  std::vector<PixelBox> g;
  for (int i = 0; i < 10; ++i) g.push_back({i * 10, 0, i * 10 + 5, 8});
  std::vector<Detection> preds;
  for (int i = 0; i < 7; ++i) preds.push_back(det(i * 10, 0, i * 10 + 5, 8, 0.9));
  preds.push_back(det(0, 1, 5, 8, 0.6));    // duplicate on the first car
  preds.push_back(det(11, 0, 15, 8, 0.6));  // duplicate on the second car
  preds.push_back(det(0, 50, 5, 58, 0.8));  // stray
  const auto r = evaluate_run(preds, truth(g), 0.3);
  CHECK(r.tp == 7);
  CHECK(r.fp == 3);
  CHECK(r.fn == 3);
}

TEST_CASE("inverse solve of the mixed model") {
  const auto sols = solve_counts(80.3, 81.8, 2673, 0.05);
  REQUIRE_FALSE(sols.empty());
  CHECK(sols.front().tp == 2146);
  CHECK(std::llabs(sols.front().fp - 478) <= 1);
  for (const auto& s : sols) {
    const auto m = metrics(s.tp, s.fp, 2673 - s.tp);
    CHECK(std::fabs(100 * *m.recall - 80.3) <= 0.05);
    CHECK(std::fabs(100 * *m.precision - 81.8) <= 0.05);
  }
}

TEST_CASE("merge sums counts") {
  const auto m = merge(metrics(3, 1, 2), metrics(5, 0, 0));
  CHECK(m.tp == 8);
  CHECK(m.fp == 1);
  CHECK(m.fn == 2);
  CHECK(*m.recall == doctest::Approx(0.8));
}

TEST_CASE("ground truth validation") {
  GroundTruth gt = truth({{0, 0, 2, 2}, {3, 3, 4, 4}});
  CHECK_NOTHROW(validate(gt));
  gt.boxes[1].id = gt.boxes[0].id;
  CHECK_THROWS_AS(validate(gt), Error);
  gt = truth({{0, 0, 0, 2}});
  CHECK_THROWS_AS(validate(gt), Error);
}

TEST_CASE("table formatting") {
  auto segmentation = metrics(2042, 325, 631);
  segmentation.estimator_count = 2334;
  const std::vector<std::pair<std::string, EvalReport>> cols{{"Segmentation", segmentation},
                                                             {"Detector", metrics(1922, 336, 751)}};
  const auto text = format_table(cols);
  CHECK(text.find("Counted vehicles") != std::string::npos);
  CHECK(text.find("2334") != std::string::npos);
  CHECK(text.find("76.4%") != std::string::npos);
  CHECK(text.find("71.9%") != std::string::npos);
  CHECK(text.find("85.1%") != std::string::npos);

  const std::vector<std::pair<std::string, EvalReport>> none{{"x", metrics(0, 0, 0)}};
  const auto blank = format_table(none);
  CHECK(blank.find("n/a") != std::string::npos);
  CHECK(blank.find("Estimated count") == std::string::npos);
}

TEST_CASE("blobs become score-one segmentation detections") {
  Blob b = Blob::from_runs(std::vector<PixelRun>{{2, 3, 7}, {3, 4, 6}});
  const auto d = blobs_to_detections(std::vector<Blob>{b});
  REQUIRE(d.size() == 1);
  CHECK(d[0].box == Box{3, 2, 7, 4});
  CHECK(d[0].score == 1.0);
  CHECK(d[0].source == Source::segmentation);
}
