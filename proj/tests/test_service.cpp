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
#include <httplib.h>

#include <filesystem>
#include <random>
#include <thread>

#include "vcount/annotate.hpp"
#include "vcount/config.hpp"
#include "vcount/error.hpp"
#include "vcount/png_io.hpp"
#include "vcount/serialize.hpp"
#include "vcount/service.hpp"

using namespace vcount;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("vcount_" + name + "_" + std::to_string(std::random_device{}()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Gray road with four bright parked cars.
RasterImage parking_lot() {
  RasterImage img(40, 24, 3);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 40; ++x) {
      for (int c = 0; c < 3; ++c) img.set(x, y, c, 70);
    }
  }
  for (int car = 0; car < 4; ++car) {
    for (int y = 4; y < 12; ++y) {
      for (int x = 3 + car * 9; x < 8 + car * 9; ++x) {
        img.set(x, y, 0, 230);
        img.set(x, y, 1, static_cast<std::uint8_t>(200 - car * 30));
        img.set(x, y, 2, 40);
      }
    }
  }
  return img;
}

struct Running {
  explicit Running(ServiceOptions opts) : service(std::move(opts)) {
    port = service.bind();
    thread = std::thread([this] { service.run(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    for (int i = 0; i < 200; ++i) {
      if (auto r = client->Get("/healthz"); r && r->status == 200) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  ~Running() { shutdown(); }
  void shutdown() {
    if (!thread.joinable()) return;
    service.stop();
    thread.join();
  }

  Json post(const std::string& path, const Json& body, int expected = 200) {
    auto r = client->Post(path, body.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == expected);
    return r->body.empty() ? Json() : Json::parse(r->body);
  }

  Service service;
  int port = 0;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;
};

ServiceOptions options_for(const fs::path& root, const fs::path& state) {
  ServiceOptions o;
  o.port = 0;
  o.image_root = root;
  o.state_dir = state;
  return o;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto cfg = parse_config(R"(
# defaults for a 50 cm product
[tiling]
tile_size = 256
overlap = 32

[detect]
strides = 8, 4, 2
anchors = 5x8, 8x5, 12x6
anchors_per_level = 1
nms_iou = 0.25

fusion.t_low = 0.1
)");
  CHECK(cfg.tile_size == 256);
  CHECK(cfg.overlap == 32);
  CHECK(cfg.anchors == std::vector<Anchor>{{5, 8}, {8, 5}, {12, 6}});
  CHECK(cfg.nms_iou == 0.25);
  CHECK(cfg.fusion.t_low == 0.1);
  CHECK(parse_config(to_text(cfg)).anchors == cfg.anchors);

  for (const char* bad : {"[tiling]\ntile_sise = 3\n", "[bogus]\n", "[tiling]\noverlap = 1\noverlap = 2\n",
                          "[fusion]\nt_low = 0.9\n", "[tiling]\ntile_size = big\n",
                          "[tiling]\noverlap = 600\n"}) {
    try {
      parse_config(bad);
      FAIL("accepted: " << bad);
    } catch (const Error& e) {
      CHECK((e.code() == Errc::invalid_config || e.code() == Errc::parse));
    }
  }
}

TEST_CASE("http service end to end") {
  const auto root = scratch_dir("images");
  const auto state = scratch_dir("state");
  const auto image = parking_lot();
  write_png(root / "lot.png", image);

  std::string id;
  std::string mask_before_restart;
  {
    Running srv(options_for(root, state));
    auto& c = *srv.client;

    auto health = c.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->body == "ok");

    srv.post("/sessions", {{"image", "missing.png"}}, 404);
    srv.post("/sessions", {{"image", "../etc/passwd"}}, 400);

    const auto created = srv.post("/sessions", {{"image", "lot.png"}}, 201);
    id = created.at("session_id").get<std::string>();
    CHECK(created.at("width") == 40);
    CHECK(created.at("height") == 24);
    const std::string base = "/sessions/" + id;

    auto png = c.Get(base + "/image");
    REQUIRE(png);
    CHECK(decode_png(png->body) == image);

    // fill before the road colour is known
    const auto early = srv.post(base + "/floodfill", {{"x", 4}, {"y", 5}}, 409);
    CHECK(early.at("code") == "precondition");

    srv.post(base + "/road-color", {{"x", 1}, {"y", 1}});
    srv.post(base + "/floodfill", {{"x", 100}, {"y", 5}}, 400);
    const auto fill = srv.post(base + "/floodfill", {{"x", 4}, {"y", 5}});
    CHECK(fill.at("instance_id") == 1);
    CHECK(fill.at("pixel_count") == 40);
    srv.post(base + "/floodfill", {{"x", 4}, {"y", 5}}, 409);

    const auto second = srv.post(base + "/floodfill", {{"x", 13}, {"y", 5}});
    CHECK(second.at("instance_id") == 2);
    const auto stroke = srv.post(
        base + "/stroke", {{"kind", "line"}, {"points", Json::array({{30, 20}, {35, 20}})}});
    CHECK(stroke.at("pixel_count") == 6);

    auto del = c.Delete(base + "/instances/2");
    REQUIRE(del);
    CHECK(del->status == 200);
    auto del_missing = c.Delete(base + "/instances/9");
    REQUIRE(del_missing);
    CHECK(del_missing->status == 404);
    CHECK(srv.post(base + "/undo", Json::object()).at("reverted") == true);

    // boxes from the API equal boxes computed on the session's own mask
    auto boxes = c.Get(base + "/boxes");
    REQUIRE(boxes);
    const auto served = boxes_from_jsonl(boxes->body);
    const auto direct = srv.service.store().with_session(
        id, [](AnnotationSession& s) { return extract_boxes(s.mask()); });
    CHECK(served == direct);
    REQUIRE(served.size() == 3);
    CHECK(served[0].box == PixelBox{3, 4, 8, 12});

    auto ids = c.Get(base + "/mask?format=ids");
    REQUIRE(ids);
    mask_before_restart = ids->body;
    CHECK(mask_from_image16(decode_png16(ids->body)).labels ==
          srv.service.store().with_session(id, [](AnnotationSession& s) { return s.mask().labels; }));

    auto unknown = c.Get("/sessions/00000000deadbeef/boxes");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);

    srv.post(base + "/config", {{"fill_tolerance", 0.3}});
    srv.post(base + "/config", {{"fill_tolerance", 3.0}}, 400);
    srv.shutdown();
  }

  // a fresh service over the same state directory sees the same mask
  {
    Running srv(options_for(root, state));
    auto ids = srv.client->Get("/sessions/" + id + "/mask?format=ids");
    REQUIRE(ids);
    CHECK(ids->status == 200);
    CHECK(ids->body == mask_before_restart);
    const auto next = srv.post("/sessions/" + id + "/floodfill", {{"x", 22}, {"y", 6}});
    CHECK(next.at("instance_id") == 4);  // ids keep counting after a restart
  }

  fs::remove_all(root);
  fs::remove_all(state);
}

TEST_CASE("concurrent fills on separate sessions and on one session") {
  const auto root = scratch_dir("images_mt");
  write_png(root / "lot.png", parking_lot());
  Running srv(options_for(root, {}));

  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    ids.push_back(srv.post("/sessions", {{"image", "lot.png"}}, 201).at("session_id").get<std::string>());
    srv.post("/sessions/" + ids.back() + "/road-color", {{"x", 0}, {"y", 0}});
  }

  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  std::atomic<int> conflicts{0};
  for (int t = 0; t < 16; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", srv.port);
      const Json body{{"x", 4 + (t % 4) * 9}, {"y", 6}};
      auto r = c.Post("/sessions/" + ids[t / 4] + "/floodfill", body.dump(), "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflicts;
      if (!r || r->status != 200) {
        MESSAGE("fill failed: " << (r ? r->body : httplib::to_string(r.error())));
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(ok == 16);
  CHECK(conflicts == 0);

  // the same seed from many threads: exactly one wins
  const auto race = srv.post("/sessions", {{"image", "lot.png"}}, 201).at("session_id").get<std::string>();
  srv.post("/sessions/" + race + "/road-color", {{"x", 0}, {"y", 0}});
  const std::string target = "/sessions/" + race + "/floodfill";
  workers.clear();
  ok = 0;
  conflicts = 0;
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&] {
      httplib::Client c("127.0.0.1", srv.port);
      auto r = c.Post(target, Json{{"x", 31}, {"y", 6}}.dump(), "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflicts;
    });
  }
  for (auto& w : workers) w.join();
  CHECK(ok == 1);
  CHECK(conflicts == 7);
  CHECK(srv.service.store().with_session(race, [](AnnotationSession& s) { return s.mask().next_id; }) ==
        2);

  for (const auto& id : ids) {
    const auto n = srv.service.store().with_session(
        id, [](AnnotationSession& s) { return extract_boxes(s.mask()).size(); });
    CHECK(n == 4);
  }
  srv.shutdown();
  fs::remove_all(root);
}

TEST_CASE("startup errors") {
  ServiceOptions o;
  o.image_root = "/nonexistent/vcount/images";
  CHECK_THROWS_AS(Service{o}, Error);

  const auto root = scratch_dir("images_busy");
  Running first(options_for(root, {}));
  auto o2 = options_for(root, {});
  o2.port = first.port;
  Service second(o2);
  CHECK_THROWS_AS(second.bind(), Error);
  first.shutdown();
  fs::remove_all(root);
}
