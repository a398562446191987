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

#include "json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace survey::detail {

namespace {

std::string qualified(std::string_view ctx, std::string_view key) {
    std::string out(ctx);
    if (!out.empty()) out += '.';
    out += key;
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorCode::IoError, "short write to '" + path + "'");
}

Json parse_json(const std::string& text, ErrorCode on_error, std::string_view what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(on_error, std::string(what) + ": " + e.what());
    }
}

const Json& require(const Json& obj, std::string_view key, ErrorCode code, std::string_view ctx) {
    if (!obj.is_object()) fail(code, std::string(ctx.empty() ? "document" : ctx) + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(code, "missing field '" + qualified(ctx, key) + "'");
    return *it;
}

double require_number(const Json& obj, std::string_view key, ErrorCode code, std::string_view ctx) {
    const Json& v = require(obj, key, code, ctx);
    if (!v.is_number()) fail(code, "field '" + qualified(ctx, key) + "' must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(code, "field '" + qualified(ctx, key) + "' must be finite");
    return d;
}

double number_or(const Json& obj, std::string_view key, double fallback, ErrorCode code,
                 std::string_view ctx) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return require_number(obj, key, code, ctx);
}

std::string require_string(const Json& obj, std::string_view key, ErrorCode code,
                           std::string_view ctx) {
    const Json& v = require(obj, key, code, ctx);
    if (!v.is_string()) fail(code, "field '" + qualified(ctx, key) + "' must be a string");
    return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, std::string_view key, ErrorCode code,
                         std::string_view ctx) {
    const Json& v = require(obj, key, code, ctx);
    if (!v.is_number_integer()) fail(code, "field '" + qualified(ctx, key) + "' must be an integer");
    return v.get<std::int64_t>();
}

void check_format(const Json& obj, std::string_view key, int expected, ErrorCode code,
                  std::string_view ctx) {
    std::int64_t got = require_int(obj, key, code, ctx);
    if (got != expected) {
        fail(code, "unsupported " + qualified(ctx, key) + " " + std::to_string(got) +
                       " (expected " + std::to_string(expected) + ")");
    }
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         ErrorCode code, std::string_view ctx) {
    if (!obj.is_object()) fail(code, std::string(ctx.empty() ? "document" : ctx) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(code, "unknown field '" + qualified(ctx, key) + "'");
        }
    }
}

Terrain terrain_from_json(const Json& doc) {
    constexpr auto code = ErrorCode::SchemaError;
    constexpr std::string_view ctx = "terrain";
    reject_unknown_keys(doc, {"format", "origin", "cell_size", "n_rows", "n_cols", "heights"}, code,
                        ctx);
    check_format(doc, "format", 1, code, ctx);
    const Json& origin = require(doc, "origin", code, ctx);
    if (!origin.is_array() || origin.size() != 2 || !origin[0].is_number() || !origin[1].is_number()) {
        fail(code, "terrain.origin must be [x, y]");
    }
    double cell = require_number(doc, "cell_size", code, ctx);
    std::int64_t rows = require_int(doc, "n_rows", code, ctx);
    std::int64_t cols = require_int(doc, "n_cols", code, ctx);
    const Json& h = require(doc, "heights", code, ctx);
    if (!h.is_array()) fail(code, "terrain.heights must be an array");
    if (rows < 2 || cols < 2) fail(code, "terrain needs n_rows >= 2 and n_cols >= 2");
    std::vector<double> heights;
    heights.reserve(h.size());
    for (const auto& v : h) {
        if (!v.is_number()) fail(code, "terrain.heights must contain only numbers");
        heights.push_back(v.get<double>());
    }
    try {
        return Terrain(origin[0].get<double>(), origin[1].get<double>(), cell,
                       static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                       std::move(heights));
    } catch (const Error& e) {
        fail(code, e.what());
    }
}

Json terrain_to_json(const Terrain& terrain) {
    Json doc;
    doc["format"] = 1;
    doc["origin"] = {terrain.origin_x(), terrain.origin_y()};
    doc["cell_size"] = terrain.cell_size();
    doc["n_rows"] = terrain.n_rows();
    doc["n_cols"] = terrain.n_cols();
    doc["heights"] = terrain.heights();
    return doc;
}

Vec3 vec3_from_json(const Json& v, ErrorCode code, std::string_view ctx) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
        fail(code, std::string(ctx) + " must be [x, y, z]");
    }
    Vec3 out{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    if (!is_finite(out)) fail(code, std::string(ctx) + " must be finite");
    return out;
}

Json vec3_to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace survey::detail
