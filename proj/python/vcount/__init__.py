# Copyright 2026 The vcount Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Vehicle counting toolkit for very high resolution satellite imagery."""

from ._core import (
    AnnotationSession,
    Box,
    Detection,
    EvalReport,
    PixelBox,
    Source,
    VcountError,
    aggregate_votes,
    compute_anchors,
    connected_components,
    count_image,
    decode_grid,
    evaluate,
    extract_boxes,
    fuse,
    grow_region,
    iou,
    metrics,
    nms,
    plan_tiles,
    rgb_to_hsv,
    solve_counts,
    threshold_votes,
)

__all__ = [
    "AnnotationSession",
    "Box",
    "Detection",
    "EvalReport",
    "PixelBox",
    "Source",
    "VcountError",
    "aggregate_votes",
    "compute_anchors",
    "connected_components",
    "count_image",
    "decode_grid",
    "evaluate",
    "extract_boxes",
    "fuse",
    "grow_region",
    "iou",
    "metrics",
    "nms",
    "plan_tiles",
    "rgb_to_hsv",
    "solve_counts",
    "threshold_votes",
]
