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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcount/counting.hpp"
#include "vcount/detect.hpp"

namespace vcount {

struct GroundTruthBox {
  std::uint32_t id = 0;
  PixelBox box;
};

struct GroundTruth {
  std::vector<GroundTruthBox> boxes;
};

/// Throws invalid_argument on empty boxes or repeated ids.
void validate(const GroundTruth& gt);

struct MatchResult {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  /// Per prediction, in input order: index of the claimed ground-truth box.
  std::vector<std::optional<std::size_t>> assignment;
};

/// Greedy one-to-one matching. Predictions are taken by descending score
/// (input order on ties); each claims the unclaimed ground-truth box of
/// highest IoU, provided IoU >= iou_min.
MatchResult match_detections(std::span<const Detection> predictions, const GroundTruth& gt,
                             double iou_min);

struct EvalReport {
  long long counted = 0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  std::optional<double> recall;
  std::optional<double> precision;
  /// Vehicle total from the blob-size estimator, when the method has one.
  std::optional<long long> estimator_count;
};

/// Recall and precision are left empty when their denominator is zero.
EvalReport metrics(long long tp, long long fp, long long fn);

EvalReport evaluate_run(std::span<const Detection> predictions, const GroundTruth& gt,
                        double iou_min);

/// Sums counts and recomputes the rates.
EvalReport merge(const EvalReport& a, const EvalReport& b);

/// Segmentation output as detections: blob bounds, score 1, source
/// segmentation.
std::vector<Detection> blobs_to_detections(std::span<const Blob> blobs);

struct CountSolution {
  long long tp = 0;
  long long fp = 0;
};

/// Integer (tp, fp) pairs whose recall and precision, in percent, lie
/// within tolerance_pct of the given values for gt_total ground-truth
/// objects. Sorted by combined deviation.
std::vector<CountSolution> solve_counts(double recall_pct, double precision_pct,
                                        long long gt_total, double tolerance_pct);

/// Aligned text table with one column per method.
std::string format_table(std::span<const std::pair<std::string, EvalReport>> columns);

}  // namespace vcount
