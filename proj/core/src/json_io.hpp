// Copyright 2026 The qdistill Authors
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

// JSON helpers shared by the library's serializers. Not installed.

#include <json.hpp>
#include <string>
#include <string_view>

#include "qdistill/encoding.hpp"
#include "qdistill/error.hpp"

namespace qdistill::detail {

using json = nlohmann::ordered_json;

json parse_json(std::string_view text);

template <class T>
T get_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw DataError(std::string("JSON: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(std::string("JSON: bad field '") + key + "': " + e.what());
    }
}

json scaler_json(const Scaler& s);
Scaler scaler_from_json(const json& j);

}  // namespace qdistill::detail
