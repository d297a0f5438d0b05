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

#include "vcount/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <thread>

#include "vcount/config.hpp"
#include "vcount/counting.hpp"
#include "vcount/detect.hpp"
#include "vcount/eval.hpp"
#include "vcount/fusion.hpp"
#include "vcount/png_io.hpp"
#include "vcount/serialize.hpp"
#include "vcount/service.hpp"
#include "vcount/tiling.hpp"

namespace vcount {

namespace fs = std::filesystem;

namespace {

BinaryMask load_binary_mask(const fs::path& path) {
  const Image16 img = read_png16(path);
  BinaryMask mask(img.width, img.height, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = img.data[i * img.channels] != 0 ? 1 : 0;
  }
  return mask;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string tile_name(Point o) {
  return "tile_" + std::to_string(o.x) + "_" + std::to_string(o.y) + ".png";
}

std::pair<double, double> parse_offset(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw Error(Errc::invalid_argument, "offset must be written x,y");
  }
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "bad offset '" + s + "'");
  }
}

struct Args {
  std::string config_path;

  // tile
  std::string image, out_dir, grid_path, tiles_dir;
  bool stitch_mode = false;
  std::optional<int> tile_size, overlap;

  // shared
  std::string out;
  std::string mask;
  std::string dets;

  // count
  std::string votes, tta, votes_out;

  // decode
  std::vector<std::string> grids, offsets;
  bool skip_nms = false;

  // nms / fuse / eval
  std::optional<double> iou, t_high, t_low, iou_min;
  std::string blobs, rule;
  std::string pred, gt, count_report, json_out, label = "method";

  // anchors
  std::string boxes;
  std::size_t k = 9;
  std::optional<std::uint64_t> seed;

  // calibrate
  std::vector<std::string> id_masks;

  // serve
  std::string image_root, state_dir, static_dir, host = "127.0.0.1";
  int port = 8080;
};

PipelineConfig resolve_config(const Args& a) {
  return a.config_path.empty() ? PipelineConfig{} : load_config(a.config_path);
}

int cmd_tile(const Args& a, std::ostream& out) {
  auto cfg = resolve_config(a);
  if (a.tile_size) cfg.tile_size = *a.tile_size;
  if (a.overlap) cfg.overlap = *a.overlap;

  if (a.stitch_mode) {
    if (a.grid_path.empty() || a.out.empty()) {
      throw Error(Errc::invalid_argument, "--stitch needs --grid and --out");
    }
    const TileGrid grid = tile_grid_from_json(parse_json(read_file(a.grid_path)));
    const fs::path dir = a.tiles_dir.empty() ? fs::path(a.grid_path).parent_path() : fs::path(a.tiles_dir);
    std::vector<Tile> tiles;
    for (const auto& o : grid.origins) {
      const auto path = dir / tile_name(o);
      std::error_code ec;
      if (!fs::exists(path, ec)) continue;  // stitch reports the gap
      tiles.push_back({o, read_png(path)});
    }
    write_png(a.out, stitch(tiles, grid));
    out << "stitched " << tiles.size() << " tiles into " << a.out << "\n";
    return 0;
  }

  if (a.image.empty() || a.out_dir.empty()) {
    throw Error(Errc::invalid_argument, "tile needs --image and --out-dir");
  }
  const RasterImage image = read_png(a.image);
  const TileGrid grid = plan_tiles(image.width(), image.height(), cfg.tile_size, cfg.overlap);
  fs::create_directories(a.out_dir);
  for (const auto& t : crop_tiles(image, grid)) {
    write_png(fs::path(a.out_dir) / tile_name(t.origin), t.image);
  }
  write_file(fs::path(a.out_dir) / "grid.json", tile_grid_to_json(grid).dump(2) + "\n");
  out << grid.origins.size() << " tiles written to " << a.out_dir << "\n";
  return 0;
}

ProbabilityMask aggregate_manifest(const fs::path& manifest) {
  const Json j = parse_json(read_file(manifest));
  try {
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    std::vector<Prediction> preds;
    for (const auto& p : j.at("predictions")) {
      const fs::path mask_path = manifest.parent_path() / p.at("mask").get<std::string>();
      preds.push_back({load_binary_mask(mask_path),
                       parse_transform(p.value("transform", std::string()))});
    }
    return aggregate_votes(preds, width, height);
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, "prediction manifest: " + std::string(e.what()));
  }
}

int cmd_count(const Args& a, std::ostream& out) {
  const auto cfg = resolve_config(a);
  const int sources = !a.mask.empty() + !a.votes.empty() + !a.tta.empty();
  if (sources != 1) {
    throw Error(Errc::invalid_argument, "count needs exactly one of --mask, --votes, --tta");
  }
  BinaryMask mask;
  if (!a.mask.empty()) {
    mask = load_binary_mask(a.mask);
  } else {
    const ProbabilityMask pmask =
        a.votes.empty() ? aggregate_manifest(a.tta) : votes_from_image16(read_png16(a.votes));
    if (!a.votes_out.empty()) write_png16(a.votes_out, votes_to_image16(pmask));
    mask = threshold_votes(pmask);
  }
  const CountReport report = count_image(mask, cfg.estimator);
  if (a.out.empty()) {
    out << count_report_to_json(report).dump() << "\n";
  } else {
    write_file(a.out, count_report_to_json(report).dump(2) + "\n");
    out << "total " << report.total << " (" << report.blobs.size() << " blobs)\n";
  }
  return 0;
}

int cmd_decode(const Args& a, std::ostream& out) {
  const auto cfg = resolve_config(a);
  if (a.grids.empty()) throw Error(Errc::invalid_argument, "decode needs at least one --grid");
  if (!a.offsets.empty() && a.offsets.size() != a.grids.size()) {
    throw Error(Errc::invalid_argument, "give one --offset per --grid, or none");
  }
  std::vector<std::future<std::vector<Detection>>> jobs;
  for (std::size_t i = 0; i < a.grids.size(); ++i) {
    const auto offset = a.offsets.empty() ? std::pair{0.0, 0.0} : parse_offset(a.offsets[i]);
    jobs.push_back(std::async(std::launch::async, [path = a.grids[i], offset, &cfg] {
      auto dets = decode_grid(read_grid(path), cfg.min_score);
      offset_detections(dets, offset.first, offset.second);
      return dets;
    }));
  }
  std::vector<Detection> all;
  for (auto& j : jobs) {
    auto dets = j.get();
    all.insert(all.end(), dets.begin(), dets.end());
  }
  if (!a.skip_nms) all = nms(std::move(all), a.iou.value_or(cfg.nms_iou));
  emit(detections_to_jsonl(all), a.out, out);
  return 0;
}

int cmd_nms(const Args& a, std::ostream& out) {
  const auto cfg = resolve_config(a);
  auto dets = detections_from_jsonl(read_file(a.dets));
  const double thr = a.iou.value_or(cfg.nms_iou);
  if (!(thr >= 0 && thr <= 1)) throw Error(Errc::invalid_argument, "--iou must lie in [0, 1]");
  emit(detections_to_jsonl(nms(std::move(dets), thr)), a.out, out);
  return 0;
}

int cmd_fuse(const Args& a, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(a);
  if (a.t_high) cfg.fusion.t_high = *a.t_high;
  if (a.t_low) cfg.fusion.t_low = *a.t_low;
  if (a.rule == "center") cfg.fusion.rule = OverlapRule::center_in_blob;
  if (a.rule == "iou") cfg.fusion.rule = OverlapRule::blob_iou;
  if (a.mask.empty() == a.blobs.empty()) {
    throw Error(Errc::invalid_argument, "fuse needs exactly one of --mask, --blobs");
  }
  std::vector<Blob> blobs;
  if (!a.mask.empty()) {
    blobs = connected_components(load_binary_mask(a.mask));
  } else {
    for (auto& bc : count_report_from_json(parse_json(read_file(a.blobs))).blobs) {
      blobs.push_back(std::move(bc.blob));
    }
  }
  const auto dets = detections_from_jsonl(read_file(a.dets));
  const auto fused = fuse(dets, blobs, cfg.fusion);
  emit(detections_to_jsonl(fused), a.out, out);
  err << "fused count " << fused_count(fused) << "\n";
  return 0;
}

int cmd_eval(const Args& a, std::ostream& out) {
  const auto cfg = resolve_config(a);
  const double iou_min = a.iou_min.value_or(cfg.iou_min);
  if (!(iou_min >= 0 && iou_min <= 1)) {
    throw Error(Errc::invalid_argument, "--iou-min must lie in [0, 1]");
  }
  const auto preds = detections_from_jsonl(read_file(a.pred));
  const auto gt = ground_truth_from_jsonl(read_file(a.gt));
  EvalReport report = evaluate_run(preds, gt, iou_min);
  if (!a.count_report.empty()) {
    report.estimator_count = count_report_from_json(parse_json(read_file(a.count_report))).total;
  }
  const std::vector<std::pair<std::string, EvalReport>> cols{{a.label, report}};
  out << format_table(cols);
  if (!a.json_out.empty()) {
    write_file(a.json_out, eval_report_to_json(report).dump(2) + "\n");
  }
  return 0;
}

int cmd_anchors(const Args& a, std::ostream& out) {
  auto cfg = resolve_config(a);
  if (a.seed) cfg.kmeans.seed = *a.seed;
  const auto sizes = box_sizes_from_jsonl(read_file(a.boxes));
  const AnchorFit fit = compute_anchors(sizes, a.k, cfg.kmeans);
  Json j = {{"anchors", anchors_to_json(fit.anchors)},
            {"mean_iou", 1.0 - fit.cost / static_cast<double>(sizes.size())}};
  if (fit.anchors.size() % cfg.strides.size() == 0) {
    Json levels = Json::object();
    for (const auto& [stride, anchors] : assign_anchors_to_levels(fit.anchors, cfg.strides)) {
      levels[std::to_string(stride)] = anchors_to_json(anchors);
    }
    j["levels"] = levels;
  }
  emit(j.dump(2) + "\n", a.out, out);
  return 0;
}

int cmd_calibrate(const Args& a, std::ostream& out) {
  const auto cfg = resolve_config(a);
  std::vector<InstanceMask> masks;
  for (const auto& p : a.id_masks) masks.push_back(mask_from_image16(read_png16(p)));
  const auto stats = calibrate_estimator(masks, cfg.estimator);
  out << "# lined: " << stats.lined_vehicles << " vehicles in " << stats.lined_groups
      << " groups; side by side: " << stats.side_by_side_vehicles << " vehicles in "
      << stats.side_by_side_groups << " groups\n"
      << "[counting]\n"
      << "mean_px_lined = " << stats.config.mean_px_lined << "\n"
      << "mean_px_side_by_side = " << stats.config.mean_px_side_by_side << "\n";
  return 0;
}

int cmd_serve(const Args& a, std::ostream& out) {
  ServiceOptions opts;
  opts.config = resolve_config(a);
  opts.image_root = a.image_root;
  opts.state_dir = a.state_dir;
  opts.static_dir = a.static_dir;
  opts.host = a.host;
  opts.port = a.port;

  // Block termination signals here so a dedicated thread can sigwait on them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(std::move(opts));
  const int port = service.bind();
  out << "listening on http://" << a.host << ":" << port << "\n" << std::flush;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  service.stop();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  out << "sessions flushed\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle counting toolkit for very-high-resolution satellite imagery", "vcount"};
  app.require_subcommand(1);
  app.fallthrough();
  Args a;
  app.add_option("--config", a.config_path, "Pipeline configuration file")->check(CLI::ExistingFile);

  auto* tile = app.add_subcommand("tile", "Split an image into fixed-size tiles, or stitch them back");
  tile->add_option("--image", a.image, "Source PNG");
  tile->add_option("--out-dir", a.out_dir, "Directory for tiles and grid.json");
  tile->add_option("--tile-size", a.tile_size, "Tile edge in pixels");
  tile->add_option("--overlap", a.overlap, "Overlap between tiles in pixels");
  tile->add_flag("--stitch", a.stitch_mode, "Reassemble tiles listed in --grid");
  tile->add_option("--grid", a.grid_path, "grid.json written by a previous tile run");
  tile->add_option("--tiles-dir", a.tiles_dir, "Directory holding the tiles (default: next to grid)");
  tile->add_option("--out", a.out, "Stitched output PNG");

  auto* count = app.add_subcommand("count", "Count vehicles in a segmentation mask");
  count->add_option("--mask", a.mask, "Binary mask PNG (nonzero = vehicle)");
  count->add_option("--votes", a.votes, "2-channel 16-bit vote PNG");
  count->add_option("--tta", a.tta, "JSON manifest of augmented predictions");
  count->add_option("--votes-out", a.votes_out, "Write aggregated votes PNG");
  count->add_option("--out", a.out, "Count report JSON");

  auto* decode = app.add_subcommand("decode", "Decode raw detection grids into boxes");
  decode->add_option("--grid", a.grids, "SCGRID01 file (repeatable)")->required();
  decode->add_option("--offset", a.offsets, "x,y tile origin per grid (repeatable)");
  decode->add_option("--iou", a.iou, "NMS IoU threshold");
  decode->add_flag("--no-nms", a.skip_nms, "Skip non-maximum suppression");
  decode->add_option("--out", a.out, "Detections JSON lines");

  auto* nms_cmd = app.add_subcommand("nms", "Non-maximum suppression on a detections file");
  nms_cmd->add_option("--dets", a.dets, "Detections JSON lines")->required();
  nms_cmd->add_option("--iou", a.iou, "IoU threshold");
  nms_cmd->add_option("--out", a.out, "Output detections");

  auto* fuse_cmd = app.add_subcommand("fuse", "Combine detector boxes with segmentation blobs");
  fuse_cmd->add_option("--dets", a.dets, "Detections JSON lines")->required();
  fuse_cmd->add_option("--mask", a.mask, "Binary segmentation mask PNG");
  fuse_cmd->add_option("--blobs", a.blobs, "Count report JSON with blob runs");
  fuse_cmd->add_option("--t-high", a.t_high, "High confidence threshold");
  fuse_cmd->add_option("--t-low", a.t_low, "Low confidence threshold");
  fuse_cmd->add_option("--rule", a.rule, "Overlap rule")->check(CLI::IsMember({"center", "iou"}));
  fuse_cmd->add_option("--out", a.out, "Output detections");

  auto* eval_cmd = app.add_subcommand("eval", "Precision/recall against ground truth");
  eval_cmd->add_option("--pred", a.pred, "Predicted detections JSON lines")->required();
  eval_cmd->add_option("--gt", a.gt, "Ground-truth boxes JSON lines")->required();
  eval_cmd->add_option("--iou-min", a.iou_min, "Minimum IoU for a match");
  eval_cmd->add_option("--count-report", a.count_report, "Attach an estimator count");
  eval_cmd->add_option("--label", a.label, "Column label");
  eval_cmd->add_option("--json", a.json_out, "Write the report as JSON");

  auto* anchors = app.add_subcommand("anchors", "Cluster box sizes into anchors");
  anchors->add_option("--boxes", a.boxes, "Boxes JSON lines")->required();
  anchors->add_option("--k", a.k, "Number of anchors")->check(CLI::PositiveNumber);
  anchors->add_option("--seed", a.seed, "k-means seed");
  anchors->add_option("--out", a.out, "Output JSON");

  auto* calibrate = app.add_subcommand("calibrate", "Derive per-vehicle pixel means from instance masks");
  calibrate->add_option("--mask", a.id_masks, "16-bit instance-id PNG (repeatable)")->required();

  auto* serve = app.add_subcommand("annotate-serve", "Run the annotation HTTP service");
  serve->add_option("--image-root", a.image_root, "Directory of PNG images")->required();
  serve->add_option("--state-dir", a.state_dir, "Session persistence directory");
  serve->add_option("--static-dir", a.static_dir, "UI bundle to serve at /");
  serve->add_option("--host", a.host, "Bind address");
  serve->add_option("--port", a.port, "Port (0 = any free port)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (tile->parsed()) return cmd_tile(a, out);
    if (count->parsed()) return cmd_count(a, out);
    if (decode->parsed()) return cmd_decode(a, out);
    if (nms_cmd->parsed()) return cmd_nms(a, out);
    if (fuse_cmd->parsed()) return cmd_fuse(a, out, err);
    if (eval_cmd->parsed()) return cmd_eval(a, out);
    if (anchors->parsed()) return cmd_anchors(a, out);
    if (calibrate->parsed()) return cmd_calibrate(a, out);
    if (serve->parsed()) return cmd_serve(a, out);
  } catch (const Error& e) {
    err << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vcount
