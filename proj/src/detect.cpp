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

#include "vcount/detect.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include "vcount/png_io.hpp"

namespace vcount {

std::string_view source_name(Source s) noexcept {
  switch (s) {
    case Source::detector: return "detector";
    case Source::segmentation: return "segmentation";
    case Source::fused: return "fused";
  }
  return "detector";
}

Source parse_source(std::string_view name) {
  if (name == "detector") return Source::detector;
  if (name == "segmentation") return Source::segmentation;
  if (name == "fused") return Source::fused;
  throw Error(Errc::parse, "unknown detection source '" + std::string(name) + "'");
}

Box quantize(const Box& box) noexcept {
  auto q = [](double v) { return std::round(v * 100.0) / 100.0; };
  return {q(box.x_min), q(box.y_min), q(box.x_max), q(box.y_max)};
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double iou(const PixelBox& a, const PixelBox& b) noexcept {
  return iou(Box::from(a), Box::from(b));
}

namespace {

bool visit_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.box.area() != b.box.area()) return a.box.area() < b.box.area();
  return std::tie(a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
         std::tie(b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
}

}  // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), visit_before);
  std::vector<Detection> kept;
  for (auto& d : dets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return iou(k.box, d.box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(std::move(d));
  }
  return kept;
}

double anchor_distance(const Anchor& a, const Anchor& b) noexcept {
  const double inter = std::min(a.w, b.w) * std::min(a.h, b.h);
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? 1.0 - inter / uni : 1.0;
}

namespace {

std::vector<Anchor> cluster_means(std::span<const Anchor> boxes,
                                  std::span<const std::size_t> assignment, std::size_t k) {
  std::vector<Anchor> sums(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    sums[assignment[i]].w += boxes[i].w;
    sums[assignment[i]].h += boxes[i].h;
    ++counts[assignment[i]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) {
      sums[j].w /= static_cast<double>(counts[j]);
      sums[j].h /= static_cast<double>(counts[j]);
    }
  }
  return sums;
}

std::vector<std::size_t> nearest(std::span<const Anchor> boxes, std::span<const Anchor> centroids) {
  std::vector<std::size_t> out(boxes.size(), 0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      const double d = anchor_distance(boxes[i], centroids[j]);
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

// Moves the worst-fitting box of a multi-member cluster into each empty one.
void fill_empty_clusters(std::span<const Anchor> boxes, std::span<const Anchor> centroids,
                         std::vector<std::size_t>& assignment, std::size_t k) {
  while (true) {
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assignment) ++counts[a];
    const auto empty = std::find(counts.begin(), counts.end(), 0u);
    if (empty == counts.end()) return;
    std::size_t worst = boxes.size();
    double worst_d = -1.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (counts[assignment[i]] < 2) continue;
      const double d = anchor_distance(boxes[i], centroids[assignment[i]]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    assignment[worst] = static_cast<std::size_t>(empty - counts.begin());
  }
}

std::vector<Anchor> seed_plus_plus(std::span<const Anchor> boxes, std::size_t k,
                                   std::mt19937_64& rng) {
  std::vector<Anchor> centroids;
  std::uniform_int_distribution<std::size_t> pick(0, boxes.size() - 1);
  centroids.push_back(boxes[pick(rng)]);
  std::vector<double> weight(boxes.size());
  while (centroids.size() < k) {
    double total = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, anchor_distance(boxes[i], c));
      weight[i] = best * best;
      total += weight[i];
    }
    if (total <= 0) {
      centroids.push_back(boxes[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    std::size_t chosen = boxes.size() - 1;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (weight[i] <= 0) continue;
      if (target < weight[i]) {
        chosen = i;
        break;
      }
      target -= weight[i];
      chosen = i;
    }
    centroids.push_back(boxes[chosen]);
  }
  return centroids;
}

struct Run {
  std::vector<std::size_t> assignment;
  double cost;
  std::vector<double> history;
};

// k distinct boxes drawn uniformly, for restarts that should not share the
// k-means++ bias towards spread-out seeds.
std::vector<Anchor> seed_uniform(std::span<const Anchor> boxes, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(boxes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Anchor> centroids;
  for (std::size_t i = 0; i < k; ++i) centroids.push_back(boxes[idx[i]]);
  return centroids;
}

Run lloyd(std::span<const Anchor> boxes, std::size_t k, std::mt19937_64& rng, int max_iterations,
          bool plus_plus) {
  auto centroids = plus_plus ? seed_plus_plus(boxes, k, rng) : seed_uniform(boxes, k, rng);
  auto assignment = nearest(boxes, centroids);
  fill_empty_clusters(boxes, centroids, assignment, k);
  Run run{assignment, assignment_cost(boxes, assignment, k), {}};
  run.history.push_back(run.cost);
  for (int it = 0; it < max_iterations; ++it) {
    centroids = cluster_means(boxes, run.assignment, k);
    auto next = nearest(boxes, centroids);
    fill_empty_clusters(boxes, centroids, next, k);
    const double cost = assignment_cost(boxes, next, k);
    if (!(cost < run.cost - 1e-12)) break;
    run.assignment = std::move(next);
    run.cost = cost;
    run.history.push_back(cost);
  }
  return run;
}

double cluster_cost(std::span<const Anchor> boxes, std::span<const std::size_t> members,
                    Anchor mean) {
  double c = 0;
  for (auto i : members) c += anchor_distance(boxes[i], mean);
  return c;
}

// Lloyd steps can stall where moving boxes between clusters would still
// lower the objective, because the cluster mean is not the IoU minimizer.
// Each sweep applies the single-box move that lowers the cost most; when no
// move helps, the best exchange of two boxes is tried instead.
void refine_moves(std::span<const Anchor> boxes, std::size_t k, Run& run, int max_sweeps) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < boxes.size(); ++i) members[run.assignment[i]].push_back(i);
  auto cost_of = [&](const std::vector<std::size_t>& m) {
    Anchor mean;
    for (auto i : m) {
      mean.w += boxes[i].w;
      mean.h += boxes[i].h;
    }
    mean.w /= static_cast<double>(m.size());
    mean.h /= static_cast<double>(m.size());
    return cluster_cost(boxes, m, mean);
  };
  auto replaced = [](const std::vector<std::size_t>& m, std::size_t out, std::size_t in) {
    std::vector<std::size_t> r;
    r.reserve(m.size() + 1);
    for (auto x : m) {
      if (x != out) r.push_back(x);
    }
    if (in != std::numeric_limits<std::size_t>::max()) r.push_back(in);
    return r;
  };
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> costs(k);
  for (std::size_t c = 0; c < k; ++c) costs[c] = cost_of(members[c]);

  struct Step {
    double delta = -1e-12;
    std::size_t i = kNone;
    std::size_t j = kNone;  // kNone for a plain move
    std::size_t to = 0;
    std::vector<std::size_t> from_members;
    std::vector<std::size_t> to_members;
    double from_cost = 0;
    double to_cost = 0;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Step best;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::size_t from = run.assignment[i];
      if (members[from].size() < 2) continue;
      auto shrunk = replaced(members[from], i, kNone);
      const double from_cost = cost_of(shrunk);
      for (std::size_t to = 0; to < k; ++to) {
        if (to == from) continue;
        auto grown = replaced(members[to], kNone, i);
        const double to_cost = cost_of(grown);
        const double delta = (from_cost + to_cost) - (costs[from] + costs[to]);
        if (delta < best.delta) best = {delta, i, kNone, to, shrunk, std::move(grown), from_cost, to_cost};
      }
    }
    if (best.i == kNone) {
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
          const std::size_t a = run.assignment[i];
          const std::size_t b = run.assignment[j];
          if (a == b) continue;
          auto ma = replaced(members[a], i, j);
          auto mb = replaced(members[b], j, i);
          const double ca = cost_of(ma);
          const double cb = cost_of(mb);
          const double delta = (ca + cb) - (costs[a] + costs[b]);
          if (delta < best.delta) best = {delta, i, j, b, std::move(ma), std::move(mb), ca, cb};
        }
      }
    }
    if (best.i == kNone) break;
    const std::size_t from = run.assignment[best.i];
    members[from] = std::move(best.from_members);
    members[best.to] = std::move(best.to_members);
    costs[from] = best.from_cost;
    costs[best.to] = best.to_cost;
    run.assignment[best.i] = best.to;
    if (best.j != kNone) run.assignment[best.j] = from;
    // recomputed from scratch so the recorded cost carries no drift
    run.cost = assignment_cost(boxes, run.assignment, k);
    run.history.push_back(run.cost);
  }
}

// Random partition with every cluster non-empty.
Run random_partition(std::span<const Anchor> boxes, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(boxes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> assignment(boxes.size());
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t i = 0; i < idx.size(); ++i) assignment[idx[i]] = i < k ? i : pick(rng);
  Run run{assignment, assignment_cost(boxes, assignment, k), {}};
  run.history.push_back(run.cost);
  return run;
}

}  // namespace

double assignment_cost(std::span<const Anchor> boxes, std::span<const std::size_t> assignment,
                       std::size_t k) {
  const auto centroids = cluster_means(boxes, assignment, k);
  double cost = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    cost += anchor_distance(boxes[i], centroids[assignment[i]]);
  }
  return cost;
}

AnchorFit compute_anchors(std::span<const Anchor> boxes, std::size_t k, const AnchorSearch& search) {
  if (k == 0) {
    throw Error(Errc::invalid_argument, "k must be at least 1");
  }
  if (k > boxes.size()) {
    throw Error(Errc::invalid_argument, "k (" + std::to_string(k) + ") exceeds the number of boxes (" +
                                            std::to_string(boxes.size()) + ")");
  }
  for (const auto& b : boxes) {
    if (!(b.w > 0) || !(b.h > 0)) {
      throw Error(Errc::invalid_argument, "box sizes must be positive");
    }
  }

  std::mt19937_64 rng(search.seed);
  Run best{{}, std::numeric_limits<double>::infinity(), {}};
  for (int r = 0; r < std::max(1, search.restarts); ++r) {
    // cycle through k-means++ seeds, uniform seeds and (when refinement is
    // on) random partitions
    const bool refine = boxes.size() <= search.refine_limit;
    const int phase = r % (refine ? 3 : 2);
    Run run = phase == 2 ? random_partition(boxes, k, rng)
                         : lloyd(boxes, k, rng, search.max_iterations, phase == 0);
    if (refine) refine_moves(boxes, k, run, search.max_iterations);
    if (run.cost < best.cost) best = std::move(run);
  }

  const auto centroids = cluster_means(boxes, best.assignment, k);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double aa = centroids[a].w * centroids[a].h;
    const double ab = centroids[b].w * centroids[b].h;
    if (aa != ab) return aa < ab;
    return centroids[a].w < centroids[b].w;
  });
  std::vector<std::size_t> rank(k);
  AnchorFit fit;
  for (std::size_t i = 0; i < k; ++i) {
    fit.anchors.push_back(centroids[order[i]]);
    rank[order[i]] = i;
  }
  fit.assignment.reserve(boxes.size());
  for (auto a : best.assignment) fit.assignment.push_back(rank[a]);
  fit.cost = best.cost;
  fit.cost_history = std::move(best.history);
  return fit;
}

std::map<int, std::vector<Anchor>> assign_anchors_to_levels(std::span<const Anchor> anchors,
                                                            std::span<const int> strides) {
  if (strides.empty()) {
    throw Error(Errc::invalid_config, "at least one stride is required");
  }
  if (anchors.size() % strides.size() != 0) {
    throw Error(Errc::invalid_config, "anchor count must be a multiple of the number of strides");
  }
  std::vector<Anchor> sorted(anchors.begin(), anchors.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Anchor& a, const Anchor& b) { return a.w * a.h < b.w * b.h; });
  std::vector<int> levels(strides.begin(), strides.end());
  std::sort(levels.begin(), levels.end());
  const std::size_t per = sorted.size() / levels.size();
  std::map<int, std::vector<Anchor>> out;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    out[levels[l]].assign(sorted.begin() + static_cast<std::ptrdiff_t>(l * per),
                          sorted.begin() + static_cast<std::ptrdiff_t>((l + 1) * per));
  }
  return out;
}

DetectionGrid make_grid(int stride, int cells_x, int cells_y, std::vector<Anchor> anchors) {
  DetectionGrid g;
  g.stride = stride;
  g.cells_x = cells_x;
  g.cells_y = cells_y;
  g.anchors = std::move(anchors);
  g.raw.assign(static_cast<std::size_t>(cells_x) * cells_y * g.anchors.size() *
                   DetectionGrid::kChannels,
               0.0f);
  validate(g);
  return g;
}

void validate(const DetectionGrid& grid) {
  if (grid.stride < 1 || grid.cells_x < 1 || grid.cells_y < 1) {
    throw Error(Errc::invalid_argument, "grid stride and cell counts must be positive");
  }
  if (grid.anchors.empty()) {
    throw Error(Errc::invalid_argument, "grid needs at least one anchor");
  }
  for (const auto& a : grid.anchors) {
    if (!(a.w > 0) || !(a.h > 0)) {
      throw Error(Errc::invalid_argument, "anchor sizes must be positive");
    }
  }
  const std::size_t expected = static_cast<std::size_t>(grid.cells_x) * grid.cells_y *
                               grid.anchors.size() * DetectionGrid::kChannels;
  if (grid.raw.size() != expected) {
    throw Error(Errc::invalid_argument, "grid holds " + std::to_string(grid.raw.size()) +
                                            " values, expected " + std::to_string(expected));
  }
}

namespace {

double sigmoid(double t) noexcept { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

std::vector<Detection> decode_grid(const DetectionGrid& grid, double min_score) {
  validate(grid);
  const double w_max = grid.input_width();
  const double h_max = grid.input_height();
  const double stride = grid.stride;
  std::vector<Detection> out;
  for (int j = 0; j < grid.cells_y; ++j) {
    for (int i = 0; i < grid.cells_x; ++i) {
      for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
        const double score = std::clamp(sigmoid(grid.value(i, j, a, 4)), DBL_MIN,
                                        std::nextafter(1.0, 0.0));
        if (score < min_score) continue;
        const double cx = (i + sigmoid(grid.value(i, j, a, 0))) * stride;
        const double cy = (j + sigmoid(grid.value(i, j, a, 1))) * stride;
        const double w = grid.anchors[a].w * std::exp(static_cast<double>(grid.value(i, j, a, 2)));
        const double h = grid.anchors[a].h * std::exp(static_cast<double>(grid.value(i, j, a, 3)));
        Box box{std::clamp(cx - w / 2, 0.0, w_max), std::clamp(cy - h / 2, 0.0, h_max),
                std::clamp(cx + w / 2, 0.0, w_max), std::clamp(cy + h / 2, 0.0, h_max)};
        box = quantize(box);
        if (!box.valid()) continue;
        out.push_back({box, score, Source::detector});
      }
    }
  }
  return out;
}

void offset_detections(std::vector<Detection>& dets, double dx, double dy) {
  for (auto& d : dets) {
    d.box = quantize({d.box.x_min + dx, d.box.y_min + dy, d.box.x_max + dx, d.box.y_max + dy});
  }
}

namespace {

constexpr char kGridMagic[8] = {'S', 'C', 'G', 'R', 'I', 'D', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > bytes.size()) {
      throw Error(Errc::parse, "truncated detection grid file");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
};

}  // namespace

std::string encode_grid(const DetectionGrid& grid) {
  validate(grid);
  std::string out(kGridMagic, sizeof(kGridMagic));
  put_u32(out, static_cast<std::uint32_t>(grid.stride));
  put_u32(out, static_cast<std::uint32_t>(grid.cells_x));
  put_u32(out, static_cast<std::uint32_t>(grid.cells_y));
  put_u32(out, static_cast<std::uint32_t>(grid.anchors.size()));
  for (const auto& a : grid.anchors) {
    put_f32(out, static_cast<float>(a.w));
    put_f32(out, static_cast<float>(a.h));
  }
  out.reserve(out.size() + grid.raw.size() * 4);
  for (float v : grid.raw) put_f32(out, v);
  return out;
}

DetectionGrid decode_grid_file(std::string_view bytes) {
  if (bytes.size() < sizeof(kGridMagic) ||
      std::memcmp(bytes.data(), kGridMagic, sizeof(kGridMagic)) != 0) {
    throw Error(Errc::parse, "missing SCGRID01 magic");
  }
  Reader r{bytes, sizeof(kGridMagic)};
  DetectionGrid g;
  g.stride = static_cast<int>(r.u32());
  g.cells_x = static_cast<int>(r.u32());
  g.cells_y = static_cast<int>(r.u32());
  const auto n_anchors = r.u32();
  if (n_anchors == 0 || n_anchors > 1024) {
    throw Error(Errc::parse, "implausible anchor count " + std::to_string(n_anchors));
  }
  for (std::uint32_t i = 0; i < n_anchors; ++i) {
    const double w = r.f32();
    const double h = r.f32();
    g.anchors.push_back({w, h});
  }
  const std::size_t n = static_cast<std::size_t>(g.cells_x) * g.cells_y * n_anchors *
                        DetectionGrid::kChannels;
  if ((bytes.size() - r.pos) != n * 4) {
    throw Error(Errc::parse, "grid payload has " + std::to_string(bytes.size() - r.pos) +
                                 " bytes, expected " + std::to_string(n * 4));
  }
  g.raw.resize(n);
  for (auto& v : g.raw) v = r.f32();
  try {
    validate(g);
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
  return g;
}

void write_grid(const std::filesystem::path& path, const DetectionGrid& grid) {
  write_file(path, encode_grid(grid));
}

DetectionGrid read_grid(const std::filesystem::path& path) {
  return decode_grid_file(read_file(path));
}

}  // namespace vcount
