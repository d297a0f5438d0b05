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

#include "vcount/serialize.hpp"

#include <sstream>

namespace vcount {

namespace {

template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      f(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(Errc::parse, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, e.what());
  }
}

Json tile_grid_to_json(const TileGrid& grid) {
  Json origins = Json::array();
  for (const auto& o : grid.origins) origins.push_back({o.x, o.y});
  return {{"tile_size", grid.tile_size},
          {"overlap", grid.overlap},
          {"origins", origins},
          {"width", grid.width},
          {"height", grid.height}};
}

TileGrid tile_grid_from_json(const Json& j) {
  try {
    TileGrid g;
    g.tile_size = j.at("tile_size").get<int>();
    g.overlap = j.at("overlap").get<int>();
    for (const auto& o : j.at("origins")) {
      g.origins.push_back({o.at(0).get<int>(), o.at(1).get<int>()});
    }
    if (j.contains("width") && j.contains("height")) {
      g.width = j.at("width").get<int>();
      g.height = j.at("height").get<int>();
    } else {
      for (const auto& o : g.origins) {
        g.width = std::max(g.width, o.x + g.tile_size);
        g.height = std::max(g.height, o.y + g.tile_size);
      }
    }
    g.pad_x = std::max(0, g.tile_size - g.width);
    g.pad_y = std::max(0, g.tile_size - g.height);
    if (g.tile_size < 1 || g.overlap < 0 || g.overlap >= g.tile_size || g.origins.empty()) {
      throw Error(Errc::parse, "inconsistent tile grid descriptor");
    }
    return g;
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, std::string("tile grid descriptor: ") + e.what());
  }
}

std::string detections_to_jsonl(std::span<const Detection> dets) {
  std::string out;
  for (const auto& d : dets) {
    const Json j = {{"x_min", d.box.x_min}, {"y_min", d.box.y_min}, {"x_max", d.box.x_max},
                    {"y_max", d.box.y_max}, {"score", d.score},
                    {"source", std::string(source_name(d.source))}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Detection> detections_from_jsonl(std::string_view text) {
  std::vector<Detection> out;
  for_each_line(text, [&](const Json& j) {
    Detection d;
    d.box = {j.at("x_min").get<double>(), j.at("y_min").get<double>(),
             j.at("x_max").get<double>(), j.at("y_max").get<double>()};
    d.score = j.at("score").get<double>();
    d.source = j.contains("source") ? parse_source(j.at("source").get<std::string>())
                                    : Source::detector;
    if (!d.box.valid()) throw Error(Errc::parse, "detection box is empty");
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw Error(Errc::parse, "score outside [0, 1]");
    out.push_back(d);
  });
  return out;
}

Json box_to_json(const PixelBox& box) {
  return {{"x_min", box.x_min}, {"y_min", box.y_min}, {"x_max", box.x_max}, {"y_max", box.y_max}};
}

PixelBox box_from_json(const Json& j) {
  try {
    return make_box(j.at("x_min").get<int>(), j.at("y_min").get<int>(), j.at("x_max").get<int>(),
                    j.at("y_max").get<int>());
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, e.what());
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
}

std::string boxes_to_jsonl(std::span<const InstanceBox> boxes) {
  std::string out;
  for (const auto& b : boxes) {
    out += Json{{"id", b.id},
                {"x_min", b.box.x_min},
                {"y_min", b.box.y_min},
                {"x_max", b.box.x_max},
                {"y_max", b.box.y_max}}
               .dump();
    out += '\n';
  }
  return out;
}

std::vector<InstanceBox> boxes_from_jsonl(std::string_view text) {
  std::vector<InstanceBox> out;
  for_each_line(text, [&](const Json& j) {
    const auto id = j.contains("id") ? j.at("id").get<std::uint32_t>()
                                     : static_cast<std::uint32_t>(out.size() + 1);
    out.push_back({id, box_from_json(j)});
  });
  return out;
}

GroundTruth ground_truth_from_jsonl(std::string_view text) {
  GroundTruth gt;
  for (const auto& b : boxes_from_jsonl(text)) gt.boxes.push_back({b.id, b.box});
  validate(gt);
  return gt;
}

std::vector<Anchor> box_sizes_from_jsonl(std::string_view text) {
  std::vector<Anchor> out;
  for_each_line(text, [&](const Json& j) {
    Anchor a;
    if (j.contains("w")) {
      a = {j.at("w").get<double>(), j.at("h").get<double>()};
    } else {
      a = {j.at("x_max").get<double>() - j.at("x_min").get<double>(),
           j.at("y_max").get<double>() - j.at("y_min").get<double>()};
    }
    if (!(a.w > 0) || !(a.h > 0)) throw Error(Errc::parse, "box size must be positive");
    out.push_back(a);
  });
  return out;
}

Json anchors_to_json(std::span<const Anchor> anchors) {
  Json out = Json::array();
  for (const auto& a : anchors) out.push_back({{"w", a.w}, {"h", a.h}});
  return out;
}

Json count_report_to_json(const CountReport& report) {
  Json blobs = Json::array();
  for (const auto& bc : report.blobs) {
    Json runs = Json::array();
    for (const auto& r : bc.blob.runs()) runs.push_back({r.y, r.x_begin, r.x_end});
    blobs.push_back({{"area", bc.blob.area},
                     {"bounds", box_to_json(bc.blob.bounds)},
                     {"elongation", bc.blob.elongation},
                     {"count", bc.count},
                     {"runs", runs}});
  }
  return {{"total", report.total}, {"blobs", blobs}};
}

CountReport count_report_from_json(const Json& j) {
  try {
    CountReport report;
    report.total = j.at("total").get<long long>();
    for (const auto& b : j.at("blobs")) {
      std::vector<PixelRun> runs;
      for (const auto& r : b.at("runs")) {
        runs.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()});
      }
      report.blobs.push_back({Blob::from_runs(runs), b.at("count").get<int>()});
    }
    return report;
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, std::string("count report: ") + e.what());
  }
}

Json eval_report_to_json(const EvalReport& report) {
  Json j = {{"counted", report.counted},
            {"tp", report.tp},
            {"fp", report.fp},
            {"fn", report.fn},
            {"recall", report.recall ? Json(*report.recall) : Json(nullptr)},
            {"precision", report.precision ? Json(*report.precision) : Json(nullptr)}};
  if (report.estimator_count) j["estimator_count"] = *report.estimator_count;
  return j;
}

}  // namespace vcount
