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
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "vcount/annotate.hpp"

namespace vcount {

/// Live annotation sessions keyed by opaque ids. Each session has its own
/// mutex; all access goes through with_session so mutations on one session
/// are serialized while distinct sessions proceed in parallel.
class SessionStore {
 public:
  /// state_dir may be empty, which disables persistence.
  SessionStore(std::filesystem::path image_root, std::filesystem::path state_dir,
               FillParams defaults = {});

  struct Created {
    std::string id;
    int width = 0;
    int height = 0;
  };

  /// Opens `image_name` (a plain file name under the image root).
  Created create(const std::string& image_name);

  template <class F>
  decltype(auto) with_session(const std::string& id, F&& f) {
    auto entry = find(id);
    std::lock_guard<std::mutex> lock(entry->mutex);
    return std::forward<F>(f)(entry->session);
  }

  std::vector<std::string> ids() const;
  std::string image_name(const std::string& id) const;

  /// Writes every session as <id>.mask.png (16-bit ids) plus <id>.json.
  /// Undo history is not persisted.
  void flush();
  /// Loads every persisted session from the state directory.
  std::size_t restore();

  const std::filesystem::path& image_root() const noexcept { return image_root_; }

 private:
  struct Entry {
    Entry(std::string name, AnnotationSession s) : image_name(std::move(name)), session(std::move(s)) {}
    std::string image_name;
    std::mutex mutex;
    AnnotationSession session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<const RasterImage> load_image(const std::string& name);
  std::string fresh_id();

  std::filesystem::path image_root_;
  std::filesystem::path state_dir_;
  FillParams defaults_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::shared_ptr<const RasterImage>> images_;
};

}  // namespace vcount
