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

#include "vcount/service.hpp"

#include <httplib.h>

#include <atomic>

#include "vcount/png_io.hpp"
#include "vcount/serialize.hpp"

namespace vcount {

namespace {

int http_status(Errc code) {
  switch (code) {
    case Errc::not_found: return 404;
    case Errc::precondition:
    case Errc::conflict: return 409;
    case Errc::coordinate:
    case Errc::invalid_argument:
    case Errc::invalid_config:
    case Errc::parse: return 400;
    case Errc::io:
    case Errc::incomplete_mosaic: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& msg) {
  send_json(res, {{"error", msg}, {"code", std::string(code)}}, status);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), errc_name(e.code()), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "parse", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json j = parse_json(req.body);
  if (!j.is_object()) throw Error(Errc::parse, "request body must be a JSON object");
  return j;
}

int int_field(const Json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_number_integer()) {
    throw Error(Errc::invalid_argument, std::string("missing integer field '") + name + "'");
  }
  return j.at(name).get<int>();
}

Json bounds_json(const std::optional<PixelBox>& b) {
  return b ? box_to_json(*b) : Json(nullptr);
}

Stroke stroke_from_json(const Json& j) {
  Stroke s;
  const auto kind = j.value("kind", std::string("freehand"));
  if (kind == "line" || kind == "straight-line" || kind == "straight_line") {
    s.kind = StrokeKind::straight_line;
  } else if (kind == "freehand") {
    s.kind = StrokeKind::freehand;
  } else {
    throw Error(Errc::invalid_argument, "unknown stroke kind '" + kind + "'");
  }
  if (!j.contains("points") || !j.at("points").is_array()) {
    throw Error(Errc::invalid_argument, "stroke needs a points array");
  }
  for (const auto& p : j.at("points")) {
    if (p.is_array()) {
      s.points.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    } else {
      s.points.push_back({p.at("x").get<int>(), p.at("y").get<int>()});
    }
  }
  s.brush_radius = j.value("radius", 0);
  return s;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o)
      : options(std::move(o)), store(options.image_root, options.state_dir, options.config.fill) {}

  ServiceOptions options;
  SessionStore store;
  httplib::Server server;
  int port = -1;
  std::atomic<bool> stopped{false};

  void routes();
};

void Service::Impl::routes() {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& id : store.ids()) {
      list.push_back({{"session_id", id}, {"image", store.image_name(id)}});
    }
    send_json(res, list);
  }));

  server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Json j = body_json(req);
    if (!j.contains("image") || !j.at("image").is_string()) {
      throw Error(Errc::invalid_argument, "missing string field 'image'");
    }
    const auto created = store.create(j.at("image").get<std::string>());
    send_json(res, {{"session_id", created.id}, {"width", created.width}, {"height", created.height}},
              201);
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/image)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto png = store.with_session(req.matches[1], [](AnnotationSession& s) {
                 return encode_png(s.image());
               });
               res.set_content(png, "image/png");
             }));

  server.Get(R"(/sessions/([0-9a-f]+)/mask)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const bool ids = req.has_param("format") && req.get_param_value("format") == "ids";
               auto png = store.with_session(req.matches[1], [ids](AnnotationSession& s) {
                 return ids ? encode_png16(mask_to_image16(s.mask()))
                            : encode_png(render_palette(s.mask()));
               });
               res.set_content(png, "image/png");
             }));

  server.Post(R"(/sessions/([0-9a-f]+)/road-color)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Json j = body_json(req);
                const int x = int_field(j, "x");
                const int y = int_field(j, "y");
                const auto c = store.with_session(
                    req.matches[1], [&](AnnotationSession& s) { return s.set_road_color(x, y); });
                send_json(res, {{"h", c.h}, {"s", c.s}, {"v", c.v}});
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/floodfill)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Json j = body_json(req);
                const int x = int_field(j, "x");
                const int y = int_field(j, "y");
                const auto r = store.with_session(
                    req.matches[1], [&](AnnotationSession& s) { return s.flood_fill(x, y); });
                send_json(res, {{"instance_id", r.instance_id},
                                {"pixel_count", r.pixels.size()},
                                {"bounds", bounds_json(r.bounds)}});
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/stroke)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Stroke stroke = stroke_from_json(body_json(req));
                const auto r = store.with_session(
                    req.matches[1], [&](AnnotationSession& s) { return s.apply_stroke(stroke); });
                send_json(res, {{"instance_id", r.instance_id},
                                {"pixel_count", r.pixels.size()},
                                {"bounds", bounds_json(r.bounds)}});
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/undo)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const bool reverted = store.with_session(
                    req.matches[1], [](AnnotationSession& s) { return s.undo(); });
                send_json(res, {{"reverted", reverted}});
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/redo)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const bool applied = store.with_session(
                    req.matches[1], [](AnnotationSession& s) { return s.redo(); });
                send_json(res, {{"reapplied", applied}});
              }));

  server.Delete(R"(/sessions/([0-9a-f]+)/instances/([0-9]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto iid = static_cast<std::uint32_t>(std::stoul(req.matches[2]));
                  const auto n = store.with_session(
                      req.matches[1], [&](AnnotationSession& s) { return s.erase_instance(iid); });
                  send_json(res, {{"cleared", n}});
                }));

  server.Get(R"(/sessions/([0-9a-f]+)/boxes)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto boxes = store.with_session(
                   req.matches[1], [](AnnotationSession& s) { return extract_boxes(s.mask()); });
               res.set_content(boxes_to_jsonl(boxes), "application/x-ndjson");
             }));

  server.Post(R"(/sessions/([0-9a-f]+)/config)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Json j = body_json(req);
                const auto applied = store.with_session(req.matches[1], [&](AnnotationSession& s) {
                  FillParams p = s.params();
                  if (j.contains("fill_tolerance")) p.fill_tolerance = j.at("fill_tolerance").get<double>();
                  if (j.contains("road_margin")) p.road_margin = j.at("road_margin").get<double>();
                  s.set_params(p);
                  return p;
                });
                send_json(res, {{"fill_tolerance", applied.fill_tolerance},
                                {"road_margin", applied.road_margin}});
              }));

  if (!options.static_dir.empty()) {
    if (!server.set_mount_point("/", options.static_dir.string())) {
      throw Error(Errc::io, "static directory " + options.static_dir.string() + " not found");
    }
  }
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  validate(impl_->options.config);
  impl_->store.restore();
  impl_->routes();
}

Service::~Service() {
  if (impl_ && impl_->port >= 0) stop();
}

int Service::bind() {
  auto& o = impl_->options;
  // The library default enables SO_REUSEPORT, which would let a second
  // service share a busy port instead of failing.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    impl_->port = o.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port < 0) {
    throw Error(Errc::io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return impl_->port;
}

void Service::run() {
  if (impl_->port < 0) throw Error(Errc::precondition, "service is not bound");
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_->stopped.exchange(true)) return;
  impl_->server.stop();
  impl_->store.flush();
}

SessionStore& Service::store() noexcept { return impl_->store; }

}  // namespace vcount
