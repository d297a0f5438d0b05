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

#include "vcount/session_store.hpp"

#include <random>

#include "vcount/png_io.hpp"
#include "vcount/serialize.hpp"

namespace vcount {

namespace fs = std::filesystem;

namespace {

bool plain_file_name(const std::string& name) {
  return !name.empty() && name.find('/') == std::string::npos &&
         name.find('\\') == std::string::npos && name != "." && name != "..";
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         id.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

SessionStore::SessionStore(fs::path image_root, fs::path state_dir, FillParams defaults)
    : image_root_(std::move(image_root)), state_dir_(std::move(state_dir)), defaults_(defaults) {
  validate(defaults_);
  std::error_code ec;
  if (!fs::is_directory(image_root_, ec)) {
    throw Error(Errc::io, "image root " + image_root_.string() + " is not a readable directory");
  }
  if (!state_dir_.empty()) {
    fs::create_directories(state_dir_, ec);
    if (ec) {
      throw Error(Errc::io, "cannot create state directory " + state_dir_.string());
    }
  }
}

std::shared_ptr<const RasterImage> SessionStore::load_image(const std::string& name) {
  if (!plain_file_name(name)) {
    throw Error(Errc::invalid_argument, "image name must be a plain file name");
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = images_.find(name); it != images_.end()) return it->second;
  }
  const fs::path path = image_root_ / name;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::not_found, "no image named '" + name + "'");
  }
  auto image = std::make_shared<const RasterImage>(read_png(path));
  std::lock_guard<std::mutex> lock(mutex_);
  return images_.try_emplace(name, std::move(image)).first->second;
}

std::string SessionStore::fresh_id() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  std::string id(16, '0');
  for (auto& c : id) c = kHex[rd() & 0xf];
  return id;
}

SessionStore::Created SessionStore::create(const std::string& image_name) {
  auto image = load_image(image_name);
  const Created created{"", image->width(), image->height()};
  auto entry = std::make_shared<Entry>(image_name, AnnotationSession(image, defaults_));
  std::lock_guard<std::mutex> lock(mutex_);
  std::string id;
  do {
    id = fresh_id();
  } while (sessions_.contains(id));
  sessions_.emplace(id, std::move(entry));
  return {id, created.width, created.height};
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(Errc::not_found, "no session '" + id + "'");
  }
  return it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::string SessionStore::image_name(const std::string& id) const { return find(id)->image_name; }

void SessionStore::flush() {
  if (state_dir_.empty()) return;
  std::map<std::string, std::shared_ptr<Entry>> snapshot;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    snapshot = sessions_;
  }
  for (const auto& [id, entry] : snapshot) {
    std::lock_guard<std::mutex> lock(entry->mutex);
    const auto& s = entry->session;
    write_png16(state_dir_ / (id + ".mask.png"), mask_to_image16(s.mask()));
    Json sidecar = {{"image", entry->image_name},
                    {"next_id", s.mask().next_id},
                    {"fill_tolerance", s.params().fill_tolerance},
                    {"road_margin", s.params().road_margin},
                    {"road_color", nullptr}};
    if (const auto& road = s.road_color()) {
      sidecar["road_color"] = {{"h", road->h}, {"s", road->s}, {"v", road->v}};
    }
    write_file(state_dir_ / (id + ".json"), sidecar.dump(2) + "\n");
  }
}

std::size_t SessionStore::restore() {
  if (state_dir_.empty()) return 0;
  std::size_t restored = 0;
  for (const auto& item : fs::directory_iterator(state_dir_)) {
    const auto path = item.path();
    if (path.extension() != ".json") continue;
    const std::string id = path.stem().string();
    if (!valid_id(id)) continue;
    const Json j = parse_json(read_file(path));
    try {
      auto image = load_image(j.at("image").get<std::string>());
      InstanceMask mask = mask_from_image16(read_png16(state_dir_ / (id + ".mask.png")));
      mask.next_id = std::max(mask.next_id, j.at("next_id").get<std::uint32_t>());
      std::optional<HsvColor> road;
      if (!j.at("road_color").is_null()) {
        const auto& r = j.at("road_color");
        road = HsvColor{r.at("h").get<double>(), r.at("s").get<double>(), r.at("v").get<double>()};
      }
      FillParams params{j.at("fill_tolerance").get<double>(), j.at("road_margin").get<double>()};
      auto entry = std::make_shared<Entry>(
          j.at("image").get<std::string>(),
          AnnotationSession(std::move(image), std::move(mask), road, params));
      std::lock_guard<std::mutex> lock(mutex_);
      sessions_[id] = std::move(entry);
      ++restored;
    } catch (const Json::exception& e) {
      throw Error(Errc::parse, "session sidecar " + path.string() + ": " + e.what());
    }
  }
  return restored;
}

}  // namespace vcount
