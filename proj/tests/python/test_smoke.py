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

import numpy as np
import pytest

import vcount


def parking_lot():
    img = np.full((24, 40, 3), 70, dtype=np.uint8)
    for car in range(4):
        img[4:12, 3 + car * 9 : 8 + car * 9] = (230, 200 - car * 30, 40)
    return img


def test_annotation_session_round_trip():
    session = vcount.AnnotationSession(parking_lot())
    with pytest.raises(vcount.VcountError):
        session.flood_fill(4, 5)
    session.set_road_color(1, 1)
    fill = session.flood_fill(4, 5)
    assert fill["instance_id"] == 1
    assert len(fill["pixels"]) == 40
    assert fill["bounds"] == vcount.PixelBox(3, 4, 8, 12)
    boxes = session.boxes()
    assert boxes == vcount.extract_boxes(session.mask)
    assert session.undo()
    assert session.mask.max() == 0


def test_grow_region_uniform_patch():
    region = vcount.grow_region(parking_lot(), (13, 6), (70, 70, 70))
    assert len(region) == 40
    assert (13, 6) in region


def test_counting_fixture():
    mask = np.zeros((32, 64), dtype=np.uint8)
    mask[2:10, 2:7] = 1
    mask[20:25, 20:28] = 1
    mask[5:13, 40:45] = 1
    total, per_blob = vcount.count_image(mask)
    assert total == 3
    assert per_blob == [1, 1, 1]
    blobs = vcount.connected_components(mask)
    assert [b["area"] for b in blobs] == [40, 40, 40]


def test_votes_majority():
    pred = np.zeros((4, 4), dtype=np.uint8)
    pred[0, 0] = 1
    vehicle, total = vcount.aggregate_votes([(pred, "rot=90")], 4, 4)
    assert total.min() == 1
    assert vehicle[3, 0] == 1 and vehicle.sum() == 1
    assert vcount.threshold_votes(vehicle, total)[3, 0] == 1


def test_detection_chain():
    raw = np.zeros((8, 8, 1, 5), dtype=np.float32)
    raw[..., 4] = -8.0
    raw[2, 3, 0, 4] = 4.0
    dets = vcount.decode_grid(raw, 4, [(5.0, 8.0)], min_score=0.1)
    assert len(dets) == 1
    assert dets[0].box == vcount.Box(11.5, 6.0, 16.5, 14.0)
    kept = vcount.nms(dets + dets, 0.3)
    assert len(kept) == 1

    mask = np.zeros((32, 32), dtype=np.uint8)
    mask[6:14, 12:17] = 1
    weak = vcount.Detection(vcount.Box(12, 6, 17, 14), 0.3)
    fused = vcount.fuse([weak], mask)
    assert len(fused) == 1 and fused[0].source == vcount.Source.fused

    report = vcount.evaluate(fused, [vcount.PixelBox(12, 6, 17, 14)])
    assert (report.tp, report.fp, report.fn) == (1, 0, 0)
    assert report.recall == 1.0


def test_metrics_and_inverse_solve():
    r = vcount.metrics(1922, 336, 751)
    assert round(100 * r.recall, 1) == 71.9
    assert round(100 * r.precision, 1) == 85.1
    assert vcount.metrics(0, 0, 0).recall is None
    tp, fp = vcount.solve_counts(80.3, 81.8, 2673)[0]
    assert tp == 2146 and abs(fp - 478) <= 1


def test_anchors_and_tiles():
    anchors, cost = vcount.compute_anchors(np.array([[4, 8], [6, 8]], dtype=float), 1)
    assert anchors == [(5.0, 8.0)]
    assert cost > 0
    with pytest.raises(vcount.VcountError):
        vcount.compute_anchors(np.array([[4, 8]], dtype=float), 2)
    assert vcount.plan_tiles(100, 100, 64, 16) == [(0, 0), (36, 0), (0, 36), (36, 36)]
    assert vcount.iou(vcount.Box(0, 0, 4, 4), vcount.Box(2, 0, 6, 4)) == pytest.approx(1 / 3)
