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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vcount/annotate.hpp"
#include "vcount/counting.hpp"
#include "vcount/detect.hpp"
#include "vcount/error.hpp"
#include "vcount/eval.hpp"
#include "vcount/fusion.hpp"
#include "vcount/tiling.hpp"

namespace py = pybind11;
using namespace vcount;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U32Array = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) uint8 array to an image.
RasterImage image_from(const U8Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw Error(Errc::invalid_argument, "image must be 2-D or 3-D");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  return RasterImage(w, h, c, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

BinaryMask mask_from(const U8Array& a) {
  if (a.ndim() != 2) throw Error(Errc::invalid_argument, "mask must be 2-D");
  BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 0);
  const auto* p = a.data();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = p[i] != 0 ? 1 : 0;
  return m;
}

template <class T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.cells().begin(), g.cells().end(), out.mutable_data());
  return out;
}

InstanceMask instance_mask_from(const U32Array& a) {
  if (a.ndim() != 2) throw Error(Errc::invalid_argument, "instance mask must be 2-D");
  InstanceMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::uint32_t top = 0;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    m.labels[i] = a.data()[i];
    top = std::max(top, m.labels[i]);
  }
  m.next_id = top + 1;
  return m;
}

py::list points_list(const std::vector<Point>& pts) {
  py::list out;
  for (const auto& p : pts) out.append(py::make_tuple(p.x, p.y));
  return out;
}

py::dict label_result(const LabelResult& r) {
  py::dict d;
  d["instance_id"] = r.instance_id;
  d["pixels"] = points_list(r.pixels);
  d["bounds"] = r.bounds ? py::cast(*r.bounds) : py::none();
  return d;
}

Stroke make_stroke(const std::vector<std::pair<int, int>>& points, const std::string& kind, int radius) {
  Stroke s;
  if (kind == "line") {
    s.kind = StrokeKind::straight_line;
  } else if (kind == "freehand") {
    s.kind = StrokeKind::freehand;
  } else {
    throw Error(Errc::invalid_argument, "stroke kind must be 'line' or 'freehand'");
  }
  for (const auto& [x, y] : points) s.points.push_back({x, y});
  s.brush_radius = radius;
  return s;
}

std::vector<Blob> blobs_from(const U8Array& mask) { return connected_components(mask_from(mask)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vehicle counting toolkit for very high resolution satellite imagery";

  py::register_exception<Error>(m, "VcountError", PyExc_ValueError);

  py::class_<PixelBox>(m, "PixelBox")
      .def(py::init<int, int, int, int>(), py::arg("x_min"), py::arg("y_min"), py::arg("x_max"),
           py::arg("y_max"))
      .def_readwrite("x_min", &PixelBox::x_min)
      .def_readwrite("y_min", &PixelBox::y_min)
      .def_readwrite("x_max", &PixelBox::x_max)
      .def_readwrite("y_max", &PixelBox::y_max)
      .def("__eq__", [](const PixelBox& a, const PixelBox& b) { return a == b; })
      .def("__repr__", [](const PixelBox& b) {
        return "PixelBox(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
               std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
      });

  py::class_<Box>(m, "Box")
      .def(py::init<double, double, double, double>(), py::arg("x_min"), py::arg("y_min"),
           py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &Box::x_min)
      .def_readwrite("y_min", &Box::y_min)
      .def_readwrite("x_max", &Box::x_max)
      .def_readwrite("y_max", &Box::y_max)
      .def("__eq__", [](const Box& a, const Box& b) { return a == b; })
      .def("__repr__", [](const Box& b) {
        return "Box(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
               std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
      });

  py::enum_<Source>(m, "Source")
      .value("detector", Source::detector)
      .value("segmentation", Source::segmentation)
      .value("fused", Source::fused);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](Box box, double score, Source source) { return Detection{box, score, source}; }),
           py::arg("box"), py::arg("score"), py::arg("source") = Source::detector)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("source", &Detection::source)
      .def("__eq__", [](const Detection& a, const Detection& b) { return a == b; });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("counted", &EvalReport::counted)
      .def_readonly("tp", &EvalReport::tp)
      .def_readonly("fp", &EvalReport::fp)
      .def_readonly("fn", &EvalReport::fn)
      .def_readonly("recall", &EvalReport::recall)
      .def_readonly("precision", &EvalReport::precision);

  // core
  m.def("rgb_to_hsv", [](std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const auto c = rgb_to_hsv(r, g, b);
    return py::make_tuple(c.h, c.s, c.v);
  });
  m.def(
      "plan_tiles",
      [](int width, int height, int tile_size, int overlap) {
        const auto g = plan_tiles(width, height, tile_size, overlap);
        std::vector<std::pair<int, int>> origins;
        for (const auto& o : g.origins) origins.emplace_back(o.x, o.y);
        return origins;
      },
      py::arg("width"), py::arg("height"), py::arg("tile_size"), py::arg("overlap"),
      "Tile origins (x, y), row by row.");

  // annotate
  m.def(
      "grow_region",
      [](const U8Array& image, std::pair<int, int> seed, std::tuple<std::uint8_t, std::uint8_t, std::uint8_t> road,
         double fill_tolerance, double road_margin) {
        const auto img = image_from(image);
        const Grid<std::uint32_t> labels(img.width(), img.height(), 0u);
        const auto [r, g, b] = road;
        return points_list(grow_region(img, labels, {seed.first, seed.second}, rgb_to_hsv(r, g, b),
                                       {fill_tolerance, road_margin}));
      },
      py::arg("image"), py::arg("seed"), py::arg("road_rgb"), py::arg("fill_tolerance") = 0.15,
      py::arg("road_margin") = 0.10);

  py::class_<AnnotationSession>(m, "AnnotationSession")
      .def(py::init([](const U8Array& image, double fill_tolerance, double road_margin) {
             return AnnotationSession(std::make_shared<const RasterImage>(image_from(image)),
                                      FillParams{fill_tolerance, road_margin});
           }),
           py::arg("image"), py::arg("fill_tolerance") = 0.15, py::arg("road_margin") = 0.10)
      .def("set_road_color",
           [](AnnotationSession& s, int x, int y) {
             const auto c = s.set_road_color(x, y);
             return py::make_tuple(c.h, c.s, c.v);
           })
      .def("flood_fill", [](AnnotationSession& s, int x, int y) { return label_result(s.flood_fill(x, y)); })
      .def(
          "apply_stroke",
          [](AnnotationSession& s, const std::vector<std::pair<int, int>>& points, const std::string& kind,
             int radius) { return label_result(s.apply_stroke(make_stroke(points, kind, radius))); },
          py::arg("points"), py::arg("kind") = "freehand", py::arg("radius") = 0)
      .def("erase_instance", &AnnotationSession::erase_instance)
      .def("undo", &AnnotationSession::undo)
      .def("redo", &AnnotationSession::redo)
      .def_property_readonly("mask", [](const AnnotationSession& s) { return to_array(s.mask().labels); })
      .def("boxes", [](const AnnotationSession& s) {
        std::vector<std::pair<std::uint32_t, PixelBox>> out;
        for (const auto& b : extract_boxes(s.mask())) out.emplace_back(b.id, b.box);
        return out;
      });

  m.def("extract_boxes", [](const U32Array& mask) {
    std::vector<std::pair<std::uint32_t, PixelBox>> out;
    for (const auto& b : extract_boxes(instance_mask_from(mask))) out.emplace_back(b.id, b.box);
    return out;
  });

  // counting
  m.def(
      "aggregate_votes",
      [](const std::vector<std::pair<U8Array, std::string>>& predictions, int width, int height) {
        std::vector<Prediction> preds;
        for (const auto& [mask, transform] : predictions) {
          preds.push_back({mask_from(mask), parse_transform(transform)});
        }
        const auto pm = aggregate_votes(preds, width, height);
        return py::make_tuple(to_array(pm.votes_vehicle), to_array(pm.votes_total));
      },
      py::arg("predictions"), py::arg("width"), py::arg("height"),
      "predictions: list of (mask, transform) with transforms like 'rot=90,flip=h,offset=4:-2'.");
  m.def(
      "threshold_votes",
      [](const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& vehicle,
         const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& total) {
        if (vehicle.ndim() != 2 || total.ndim() != 2 || vehicle.shape(0) != total.shape(0) ||
            vehicle.shape(1) != total.shape(1)) {
          throw Error(Errc::invalid_argument, "vote arrays must be 2-D and the same shape");
        }
        ProbabilityMask pm(static_cast<int>(total.shape(1)), static_cast<int>(total.shape(0)));
        std::copy(vehicle.data(), vehicle.data() + vehicle.size(), pm.votes_vehicle.cells().begin());
        std::copy(total.data(), total.data() + total.size(), pm.votes_total.cells().begin());
        return to_array(threshold_votes(pm));
      });
  m.def("connected_components", [](const U8Array& mask) {
    py::list out;
    for (const auto& b : blobs_from(mask)) {
      py::dict d;
      d["area"] = b.area;
      d["bounds"] = b.bounds;
      d["elongation"] = b.elongation;
      out.append(d);
    }
    return out;
  });
  m.def(
      "count_image",
      [](const U8Array& mask, double mean_px_lined, double mean_px_side_by_side, double min_blob_area,
         double elongation_threshold) {
        const CountEstimatorConfig cfg{mean_px_lined, mean_px_side_by_side, min_blob_area,
                                       elongation_threshold};
        const auto r = count_image(mask_from(mask), cfg);
        std::vector<int> per_blob;
        for (const auto& b : r.blobs) per_blob.push_back(b.count);
        return py::make_tuple(r.total, per_blob);
      },
      py::arg("mask"), py::arg("mean_px_lined") = 40.0, py::arg("mean_px_side_by_side") = 40.0,
      py::arg("min_blob_area") = 12.0, py::arg("elongation_threshold") = 2.5,
      "Returns (total, per-blob counts).");

  // detect
  m.def("iou", py::overload_cast<const Box&, const Box&>(&iou));
  m.def("nms", &nms, py::arg("detections"), py::arg("iou_threshold") = 0.3);
  m.def(
      "compute_anchors",
      [](const F64Array& sizes, std::size_t k, std::uint64_t seed) {
        if (sizes.ndim() != 2 || sizes.shape(1) != 2) {
          throw Error(Errc::invalid_argument, "sizes must have shape (N, 2)");
        }
        std::vector<Anchor> boxes;
        for (py::ssize_t i = 0; i < sizes.shape(0); ++i) boxes.push_back({sizes.at(i, 0), sizes.at(i, 1)});
        AnchorSearch search;
        search.seed = seed;
        const auto fit = compute_anchors(boxes, k, search);
        std::vector<std::pair<double, double>> anchors;
        for (const auto& a : fit.anchors) anchors.emplace_back(a.w, a.h);
        return py::make_tuple(anchors, fit.cost);
      },
      py::arg("sizes"), py::arg("k"), py::arg("seed") = 0, "Returns (anchors sorted by area, cost).");
  m.def(
      "decode_grid",
      [](const F32Array& raw, int stride, const std::vector<std::pair<double, double>>& anchors,
         double min_score) {
        if (raw.ndim() != 4 || raw.shape(3) != DetectionGrid::kChannels ||
            raw.shape(2) != static_cast<py::ssize_t>(anchors.size())) {
          throw Error(Errc::invalid_argument, "raw must have shape (cells_y, cells_x, n_anchors, 5)");
        }
        std::vector<Anchor> a;
        for (const auto& [w, h] : anchors) a.push_back({w, h});
        auto grid = make_grid(stride, static_cast<int>(raw.shape(1)), static_cast<int>(raw.shape(0)), a);
        std::copy(raw.data(), raw.data() + raw.size(), grid.raw.begin());
        return decode_grid(grid, min_score);
      },
      py::arg("raw"), py::arg("stride"), py::arg("anchors"), py::arg("min_score") = 0.0);

  // fusion
  m.def(
      "fuse",
      [](const std::vector<Detection>& dets, const U8Array& mask, double t_high, double t_low,
         const std::string& rule, double overlap_iou) {
        FusionConfig cfg{t_high, t_low, OverlapRule::center_in_blob, overlap_iou};
        if (rule == "iou") {
          cfg.rule = OverlapRule::blob_iou;
        } else if (rule != "center") {
          throw Error(Errc::invalid_config, "rule must be 'center' or 'iou'");
        }
        return fuse(dets, blobs_from(mask), cfg);
      },
      py::arg("detections"), py::arg("mask"), py::arg("t_high") = 0.5, py::arg("t_low") = 0.2,
      py::arg("rule") = "center", py::arg("overlap_iou") = 0.3);

  // eval
  m.def("metrics", &metrics, py::arg("tp"), py::arg("fp"), py::arg("fn"));
  m.def(
      "evaluate",
      [](const std::vector<Detection>& preds, const std::vector<PixelBox>& truth, double iou_min) {
        GroundTruth gt;
        std::uint32_t id = 1;
        for (const auto& b : truth) gt.boxes.push_back({id++, b});
        return evaluate_run(preds, gt, iou_min);
      },
      py::arg("predictions"), py::arg("ground_truth"), py::arg("iou_min") = 0.3);
  m.def(
      "solve_counts",
      [](double recall_pct, double precision_pct, long long gt_total, double tolerance_pct) {
        std::vector<std::pair<long long, long long>> out;
        for (const auto& s : solve_counts(recall_pct, precision_pct, gt_total, tolerance_pct)) {
          out.emplace_back(s.tp, s.fp);
        }
        return out;
      },
      py::arg("recall_pct"), py::arg("precision_pct"), py::arg("gt_total"),
      py::arg("tolerance_pct") = 0.05);
}
