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

#include "vcount/error.hpp"

namespace vcount {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config: return "invalid_config";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::coordinate: return "coordinate";
    case Errc::precondition: return "precondition";
    case Errc::conflict: return "conflict";
    case Errc::not_found: return "not_found";
    case Errc::incomplete_mosaic: return "incomplete_mosaic";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
  }
  return "unknown";
}

}  // namespace vcount
