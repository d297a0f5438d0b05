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

#include "vcount/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "vcount/png_io.hpp"

namespace vcount {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const std::string& key) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::invalid_config, key + ": cannot parse '" + std::string(s) + "'");
  }
  return v;
}

using Setter = std::function<void(PipelineConfig&, std::string_view, const std::string&)>;

template <class T>
Setter number(T PipelineConfig::*field) {
  return [field](PipelineConfig& c, std::string_view v, const std::string& key) {
    c.*field = parse_number<T>(v, key);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"tiling.tile_size", number(&PipelineConfig::tile_size)},
      {"tiling.overlap", number(&PipelineConfig::overlap)},
      {"annotate.fill_tolerance",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.fill.fill_tolerance = parse_number<double>(v, k);
       }},
      {"annotate.road_margin",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.fill.road_margin = parse_number<double>(v, k);
       }},
      {"counting.mean_px_lined",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.estimator.mean_px_lined = parse_number<double>(v, k);
       }},
      {"counting.mean_px_side_by_side",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.estimator.mean_px_side_by_side = parse_number<double>(v, k);
       }},
      {"counting.min_blob_area",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.estimator.min_blob_area = parse_number<double>(v, k);
       }},
      {"counting.elongation_threshold",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.estimator.elongation_threshold = parse_number<double>(v, k);
       }},
      {"detect.strides",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.strides.clear();
         for (auto item : split_list(v)) c.strides.push_back(parse_number<int>(item, k));
       }},
      {"detect.anchors",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.anchors.clear();
         for (auto item : split_list(v)) {
           const auto x = item.find('x');
           if (x == std::string_view::npos) {
             throw Error(Errc::invalid_config, k + ": anchors are written WxH");
           }
           c.anchors.push_back({parse_number<double>(trim(item.substr(0, x)), k),
                                parse_number<double>(trim(item.substr(x + 1)), k)});
         }
       }},
      {"detect.anchors_per_level", number(&PipelineConfig::anchors_per_level)},
      {"detect.nms_iou", number(&PipelineConfig::nms_iou)},
      {"detect.min_score", number(&PipelineConfig::min_score)},
      {"detect.kmeans_seed",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.kmeans.seed = parse_number<std::uint64_t>(v, k);
       }},
      {"detect.kmeans_restarts",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.kmeans.restarts = parse_number<int>(v, k);
       }},
      {"detect.kmeans_max_iterations",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.kmeans.max_iterations = parse_number<int>(v, k);
       }},
      {"fusion.t_high",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.fusion.t_high = parse_number<double>(v, k);
       }},
      {"fusion.t_low",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.fusion.t_low = parse_number<double>(v, k);
       }},
      {"fusion.overlap_rule",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         if (v == "center") {
           c.fusion.rule = OverlapRule::center_in_blob;
         } else if (v == "iou") {
           c.fusion.rule = OverlapRule::blob_iou;
         } else {
           throw Error(Errc::invalid_config, k + ": expected 'center' or 'iou'");
         }
       }},
      {"fusion.overlap_iou",
       [](PipelineConfig& c, std::string_view v, const std::string& k) {
         c.fusion.overlap_iou = parse_number<double>(v, k);
       }},
      {"eval.iou_min", number(&PipelineConfig::iou_min)},
  };
  return table;
}

std::string strip_quotes(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  if (cfg.tile_size < 1 || cfg.overlap < 0 || cfg.overlap >= cfg.tile_size) {
    throw Error(Errc::invalid_config, "tiling: need tile_size >= 1 and 0 <= overlap < tile_size");
  }
  validate(cfg.fill);
  validate(cfg.estimator);
  if (cfg.strides.empty() ||
      std::any_of(cfg.strides.begin(), cfg.strides.end(), [](int s) { return s < 1; })) {
    throw Error(Errc::invalid_config, "detect.strides must be positive");
  }
  if (cfg.anchors_per_level < 1) {
    throw Error(Errc::invalid_config, "detect.anchors_per_level must be >= 1");
  }
  for (const auto& a : cfg.anchors) {
    if (!(a.w > 0) || !(a.h > 0)) {
      throw Error(Errc::invalid_config, "detect.anchors must have positive sizes");
    }
  }
  if (!cfg.anchors.empty() &&
      cfg.anchors.size() != cfg.strides.size() * static_cast<std::size_t>(cfg.anchors_per_level)) {
    throw Error(Errc::invalid_config,
                "detect.anchors must hold anchors_per_level anchors for every stride");
  }
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(cfg.nms_iou) || !unit(cfg.min_score) || !unit(cfg.iou_min)) {
    throw Error(Errc::invalid_config, "nms_iou, min_score and iou_min must lie in [0, 1]");
  }
  if (cfg.kmeans.restarts < 1 || cfg.kmeans.max_iterations < 0) {
    throw Error(Errc::invalid_config, "k-means restarts must be >= 1");
  }
  validate(cfg.fusion);
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::set<std::string> seen;
  std::set<std::string> sections;
  for (const auto& [key, _] : setters()) sections.insert(key.substr(0, key.find('.')));

  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::invalid_config, where + "unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections.contains(section)) {
        throw Error(Errc::invalid_config, where + "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_config, where + "expected key = value");
    }
    const std::string name(trim(line.substr(0, eq)));
    const std::string value = strip_quotes(trim(line.substr(eq + 1)));
    const std::string key =
        section.empty() || name.find('.') != std::string::npos ? name : section + "." + name;
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(Errc::invalid_config, where + "unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw Error(Errc::invalid_config, where + "duplicate key '" + key + "'");
    }
    try {
      it->second(cfg, value, key);
    } catch (const Error& e) {
      throw Error(Errc::invalid_config, where + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  auto join_strides = [&] {
    std::string s;
    for (std::size_t i = 0; i < cfg.strides.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(cfg.strides[i]);
    }
    return s;
  };
  out << "[tiling]\n"
      << "tile_size = " << cfg.tile_size << "\n"
      << "overlap = " << cfg.overlap << "\n\n"
      << "[annotate]\n"
      << "fill_tolerance = " << cfg.fill.fill_tolerance << "\n"
      << "road_margin = " << cfg.fill.road_margin << "\n\n"
      << "[counting]\n"
      << "mean_px_lined = " << cfg.estimator.mean_px_lined << "\n"
      << "mean_px_side_by_side = " << cfg.estimator.mean_px_side_by_side << "\n"
      << "min_blob_area = " << cfg.estimator.min_blob_area << "\n"
      << "elongation_threshold = " << cfg.estimator.elongation_threshold << "\n\n"
      << "[detect]\n"
      << "strides = " << join_strides() << "\n";
  if (!cfg.anchors.empty()) {
    out << "anchors = ";
    for (std::size_t i = 0; i < cfg.anchors.size(); ++i) {
      if (i) out << ", ";
      out << cfg.anchors[i].w << "x" << cfg.anchors[i].h;
    }
    out << "\n";
  }
  out << "anchors_per_level = " << cfg.anchors_per_level << "\n"
      << "nms_iou = " << cfg.nms_iou << "\n"
      << "min_score = " << cfg.min_score << "\n"
      << "kmeans_seed = " << cfg.kmeans.seed << "\n"
      << "kmeans_restarts = " << cfg.kmeans.restarts << "\n"
      << "kmeans_max_iterations = " << cfg.kmeans.max_iterations << "\n\n"
      << "[fusion]\n"
      << "t_high = " << cfg.fusion.t_high << "\n"
      << "t_low = " << cfg.fusion.t_low << "\n"
      << "overlap_rule = "
      << (cfg.fusion.rule == OverlapRule::center_in_blob ? "center" : "iou") << "\n"
      << "overlap_iou = " << cfg.fusion.overlap_iou << "\n\n"
      << "[eval]\n"
      << "iou_min = " << cfg.iou_min << "\n";
  return out.str();
}

}  // namespace vcount
