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

#include "vcount/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

namespace vcount {

void validate(const GroundTruth& gt) {
  std::set<std::uint32_t> ids;
  for (const auto& b : gt.boxes) {
    if (!b.box.valid()) {
      throw Error(Errc::invalid_argument, "ground-truth box " + std::to_string(b.id) + " is empty");
    }
    if (!ids.insert(b.id).second) {
      throw Error(Errc::invalid_argument, "duplicate ground-truth id " + std::to_string(b.id));
    }
  }
}

MatchResult match_detections(std::span<const Detection> predictions, const GroundTruth& gt,
                             double iou_min) {
  MatchResult result;
  result.assignment.assign(predictions.size(), std::nullopt);

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].score > predictions[b].score;
  });

  std::vector<Box> truth;
  truth.reserve(gt.boxes.size());
  for (const auto& b : gt.boxes) truth.push_back(Box::from(b.box));
  std::vector<bool> claimed(truth.size(), false);

  for (const auto p : order) {
    double best = -1.0;
    std::optional<std::size_t> pick;
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (claimed[g]) continue;
      const double v = iou(predictions[p].box, truth[g]);
      if (v >= iou_min && v > best && v > 0.0) {
        best = v;
        pick = g;
      }
    }
    if (pick) {
      claimed[*pick] = true;
      result.assignment[p] = pick;
      ++result.tp;
    } else {
      ++result.fp;
    }
  }
  result.fn = static_cast<long long>(truth.size()) - result.tp;
  return result;
}

EvalReport metrics(long long tp, long long fp, long long fn) {
  if (tp < 0 || fp < 0 || fn < 0) {
    throw Error(Errc::invalid_argument, "match counts must be non-negative");
  }
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.counted = tp + fp;
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  return r;
}

EvalReport evaluate_run(std::span<const Detection> predictions, const GroundTruth& gt,
                        double iou_min) {
  validate(gt);
  const auto m = match_detections(predictions, gt, iou_min);
  return metrics(m.tp, m.fp, m.fn);
}

EvalReport merge(const EvalReport& a, const EvalReport& b) {
  EvalReport r = metrics(a.tp + b.tp, a.fp + b.fp, a.fn + b.fn);
  if (a.estimator_count || b.estimator_count) {
    r.estimator_count = a.estimator_count.value_or(0) + b.estimator_count.value_or(0);
  }
  return r;
}

std::vector<Detection> blobs_to_detections(std::span<const Blob> blobs) {
  std::vector<Detection> out;
  out.reserve(blobs.size());
  for (const auto& b : blobs) out.push_back({Box::from(b.bounds), 1.0, Source::segmentation});
  return out;
}

std::vector<CountSolution> solve_counts(double recall_pct, double precision_pct,
                                        long long gt_total, double tolerance_pct) {
  if (gt_total <= 0 || !(precision_pct > 0)) {
    throw Error(Errc::invalid_argument, "need positive ground truth and precision");
  }
  std::vector<std::pair<double, CountSolution>> found;
  for (long long tp = 1; tp <= gt_total; ++tp) {
    const double recall = 100.0 * static_cast<double>(tp) / static_cast<double>(gt_total);
    if (std::fabs(recall - recall_pct) > tolerance_pct) continue;
    // precision = tp / (tp + fp) fixes fp near tp * (100 / p - 1)
    const double fp_centre = static_cast<double>(tp) * (100.0 / precision_pct - 1.0);
    const auto lo = std::max(0LL, static_cast<long long>(std::floor(fp_centre)) - 2);
    const auto hi = static_cast<long long>(std::ceil(fp_centre)) + 2;
    for (long long fp = lo; fp <= hi; ++fp) {
      const double precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
      if (std::fabs(precision - precision_pct) > tolerance_pct) continue;
      const double dev = std::fabs(recall - recall_pct) + std::fabs(precision - precision_pct);
      found.push_back({dev, {tp, fp}});
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CountSolution> out;
  out.reserve(found.size());
  for (const auto& f : found) out.push_back(f.second);
  return out;
}

std::string format_table(std::span<const std::pair<std::string, EvalReport>> columns) {
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * *v);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
      {"Counted vehicles", {}}, {"Estimated count", {}}, {"TP", {}}, {"FP", {}},
      {"FN", {}},               {"Recall", {}},          {"Precision", {}},
  };
  bool any_estimate = false;
  for (const auto& [name, r] : columns) {
    rows[0].second.push_back(std::to_string(r.counted));
    rows[1].second.push_back(r.estimator_count ? std::to_string(*r.estimator_count) : "-");
    any_estimate = any_estimate || r.estimator_count.has_value();
    rows[2].second.push_back(std::to_string(r.tp));
    rows[3].second.push_back(std::to_string(r.fp));
    rows[4].second.push_back(std::to_string(r.fn));
    rows[5].second.push_back(pct(r.recall));
    rows[6].second.push_back(pct(r.precision));
  }
  if (!any_estimate) rows.erase(rows.begin() + 1);

  std::size_t label_w = 0;
  for (const auto& r : rows) label_w = std::max(label_w, r.first.size());
  std::vector<std::size_t> col_w;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::size_t w = columns[c].first.size();
    for (const auto& r : rows) w = std::max(w, r.second[c].size());
    col_w.push_back(w);
  }

  auto pad_left = [](const std::string& s, std::size_t w) {
    return std::string(w - std::min(w, s.size()), ' ') + s;
  };
  auto pad_right = [](const std::string& s, std::size_t w) {
    return s + std::string(w - std::min(w, s.size()), ' ');
  };

  std::string out = pad_right("", label_w);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += " | " + pad_left(columns[c].first, col_w[c]);
  }
  out += '\n';
  std::size_t rule = label_w;
  for (auto w : col_w) rule += 3 + w;
  const std::string line(rule, '-');
  out += line + '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first == "Recall") out += line + '\n';
    out += pad_right(rows[i].first, label_w);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += " | " + pad_left(rows[i].second[c], col_w[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace vcount
