// Copyright 2026 The survey-bench Authors.
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

// Internal helpers shared by the document readers (terrain, scenario, trace,
// protocol). Not installed.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "survey_bench/error.hpp"
#include "survey_bench/geodesy.hpp"

namespace survey::detail {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Json parse_json(const std::string& text, ErrorCode on_error, std::string_view what);

// Field accessors that raise `code` with a path-qualified message.
const Json& require(const Json& obj, std::string_view key, ErrorCode code, std::string_view ctx);
double require_number(const Json& obj, std::string_view key, ErrorCode code, std::string_view ctx);
double number_or(const Json& obj, std::string_view key, double fallback, ErrorCode code,
                 std::string_view ctx);
std::string require_string(const Json& obj, std::string_view key, ErrorCode code,
                           std::string_view ctx);
std::int64_t require_int(const Json& obj, std::string_view key, ErrorCode code,
                         std::string_view ctx);
void check_format(const Json& obj, std::string_view key, int expected, ErrorCode code,
                  std::string_view ctx);
// Rejects keys outside `allowed`, so typos in hand-written documents surface.
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         ErrorCode code, std::string_view ctx);

Terrain terrain_from_json(const Json& doc);
Json terrain_to_json(const Terrain& terrain);

Vec3 vec3_from_json(const Json& v, ErrorCode code, std::string_view ctx);
Json vec3_to_json(const Vec3& v);

// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace survey::detail
