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

#include <filesystem>
#include <memory>
#include <string>

#include "vcount/config.hpp"
#include "vcount/session_store.hpp"

namespace vcount {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path image_root;
  std::filesystem::path state_dir;
  std::filesystem::path static_dir;  // optional UI bundle
  PipelineConfig config;
};

/// JSON-over-HTTP annotation service.
///
///   GET    /healthz
///   GET    /sessions
///   POST   /sessions                      {image}
///   GET    /sessions/{id}/image           PNG
///   GET    /sessions/{id}/mask            PNG palette render, ?format=ids for 16-bit ids
///   POST   /sessions/{id}/road-color      {x, y}
///   POST   /sessions/{id}/floodfill       {x, y}
///   POST   /sessions/{id}/stroke          {kind, points, radius}
///   POST   /sessions/{id}/undo
///   POST   /sessions/{id}/redo
///   DELETE /sessions/{id}/instances/{iid}
///   GET    /sessions/{id}/boxes           JSON lines
///   POST   /sessions/{id}/config          {fill_tolerance?, road_margin?}
class Service {
 public:
  /// Validates the image root and restores persisted sessions.
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the port. Throws Errc::io when
  /// the address is unavailable.
  int bind();
  /// Serves until stop(); requires bind().
  void run();
  /// Stops accepting requests and flushes every session to disk.
  void stop();

  SessionStore& store() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vcount
