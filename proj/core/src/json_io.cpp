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

#include "json_io.hpp"

namespace qdistill::detail {

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("JSON parse error: ") + e.what());
    }
}

json scaler_json(const Scaler& s) { return json{{"min", s.min}, {"max", s.max}}; }

Scaler scaler_from_json(const json& j) {
    Scaler s{get_field<std::vector<double>>(j, "min"), get_field<std::vector<double>>(j, "max")};
    if (s.min.size() != s.max.size()) throw DataError("scaler JSON: min/max length mismatch");
    for (std::size_t i = 0; i < s.min.size(); ++i)
        if (s.min[i] > s.max[i]) throw DataError("scaler JSON: min > max");
    return s;
}

}  // namespace qdistill::detail
