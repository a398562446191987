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

#include "survey_bench/scenario.hpp"

#include <filesystem>
#include <numbers>

#include "json_io.hpp"

namespace survey {

namespace {

constexpr auto kSchema = ErrorCode::SchemaError;
constexpr double kDeg = std::numbers::pi / 180.0;

std::string resolve_path(const std::string& base_dir, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_absolute() || base_dir.empty()) return p.string();
    return (std::filesystem::path(base_dir) / p).string();
}

std::pair<double, double> xy_from_json(const Json& v, std::string_view ctx) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(kSchema, std::string(ctx) + " must be [x, y]");
    }
    double x = v[0].get<double>(), y = v[1].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y)) fail(kSchema, std::string(ctx) + " must be finite");
    return {x, y};
}

Benchmark benchmark_from_json(const Json& v, bool known, std::string_view ctx) {
    detail::reject_unknown_keys(v, {"id", "position"}, kSchema, ctx);
    Benchmark b;
    b.id = detail::require_string(v, "id", kSchema, ctx);
    b.position = detail::vec3_from_json(detail::require(v, "position", kSchema, ctx), kSchema,
                                        std::string(ctx) + ".position");
    b.elevation_known = known;
    return b;
}

FilterConfig filter_from_json(const Json& doc) {
    FilterConfig f;
    if (!doc.contains("filter")) return f;
    const Json& v = doc["filter"];
    detail::reject_unknown_keys(v, {"alpha", "deadzone_mps"}, kSchema, "filter");
    f.alpha = detail::number_or(v, "alpha", f.alpha, kSchema, "filter");
    f.deadzone_mps = detail::number_or(v, "deadzone_mps", f.deadzone_mps, kSchema, "filter");
    if (!(f.alpha > 0.0 && f.alpha <= 1.0)) fail(ErrorCode::InvalidConfig, "filter.alpha must be in (0, 1]");
    if (!(f.deadzone_mps >= 0.0)) fail(ErrorCode::InvalidConfig, "filter.deadzone_mps must be >= 0");
    return f;
}

InstrumentConfig instrument_from_json(const Json& doc) {
    InstrumentConfig c;
    if (!doc.contains("instrument")) return c;
    const Json& v = doc["instrument"];
    constexpr std::string_view ctx = "instrument";
    detail::reject_unknown_keys(v, {"alpha_screw_rad_per_mm", "bubble_radius", "bubble_gain_per_rad",
                                    "level_tolerance", "instrument_height_m", "splay_radius_m",
                                    "leg_lengths_m", "heading_deg", "ground_probe_radius_m"},
                                kSchema, ctx);
    c.alpha_screw = detail::number_or(v, "alpha_screw_rad_per_mm", c.alpha_screw, kSchema, ctx);
    c.bubble.radius = detail::number_or(v, "bubble_radius", c.bubble.radius, kSchema, ctx);
    c.bubble.gain = detail::number_or(v, "bubble_gain_per_rad", c.bubble.gain, kSchema, ctx);
    c.bubble.level_tolerance = detail::number_or(v, "level_tolerance", c.bubble.level_tolerance, kSchema, ctx);
    c.instrument_height = detail::number_or(v, "instrument_height_m", c.instrument_height, kSchema, ctx);
    c.splay_radius = detail::number_or(v, "splay_radius_m", c.splay_radius, kSchema, ctx);
    c.heading = detail::number_or(v, "heading_deg", 0.0, kSchema, ctx) * kDeg;
    c.ground_probe_radius = detail::number_or(v, "ground_probe_radius_m", c.ground_probe_radius, kSchema, ctx);
    if (v.contains("leg_lengths_m")) {
        const Json& legs = v["leg_lengths_m"];
        if (!legs.is_array() || legs.size() != 3) fail(kSchema, "instrument.leg_lengths_m must hold 3 numbers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!legs[i].is_number()) fail(kSchema, "instrument.leg_lengths_m must hold 3 numbers");
            c.leg_lengths[i] = legs[i].get<double>();
        }
    }
    if (!(c.alpha_screw > 0.0)) fail(ErrorCode::InvalidConfig, "instrument.alpha_screw_rad_per_mm must be > 0");
    if (!(c.bubble.radius > 0.0) || !(c.bubble.gain > 0.0)) {
        fail(ErrorCode::InvalidConfig, "bubble radius and gain must be > 0");
    }
    if (!(c.bubble.level_tolerance > 0.0 && c.bubble.level_tolerance < 1.0)) {
        fail(ErrorCode::InvalidConfig, "instrument.level_tolerance must be in (0, 1)");
    }
    if (!(c.instrument_height >= 0.0)) fail(ErrorCode::InvalidConfig, "instrument_height_m must be >= 0");
    if (!(c.ground_probe_radius > 0.0)) fail(ErrorCode::InvalidConfig, "ground_probe_radius_m must be > 0");
    return c;
}

LevelingExercise leveling_from_json(const Json& v) {
    constexpr std::string_view ctx = "leveling";
    detail::reject_unknown_keys(v, {"benchmark_a", "benchmark_b", "station", "rod_height_max_m", "noise_sd_m"},
                                kSchema, ctx);
    LevelingExercise ex;
    ex.benchmark_a = benchmark_from_json(detail::require(v, "benchmark_a", kSchema, ctx), true,
                                         "leveling.benchmark_a");
    ex.benchmark_b = benchmark_from_json(detail::require(v, "benchmark_b", kSchema, ctx), false,
                                         "leveling.benchmark_b");
    auto [sx, sy] = xy_from_json(detail::require(v, "station", kSchema, ctx), "leveling.station");
    ex.station_x = sx;
    ex.station_y = sy;
    ex.rod_height_max = detail::number_or(v, "rod_height_max_m", kDefaultRodHeightMax, kSchema, ctx);
    ex.noise_sd = detail::number_or(v, "noise_sd_m", 0.0, kSchema, ctx);
    validate(ex);
    return ex;
}

FlightParams physics_from_json(const Json& v) {
    constexpr std::string_view ctx = "flight.physics";
    detail::reject_unknown_keys(v, {"gravity_mps2", "tau_attitude_s", "max_climb_accel_mps2",
                                    "max_yaw_rate_deg_s", "drag_per_s", "max_tilt_deg", "hover_rpm",
                                    "battery_per_rev"},
                                kSchema, ctx);
    FlightParams p;
    p.gravity = detail::number_or(v, "gravity_mps2", p.gravity, kSchema, ctx);
    p.tau_attitude = detail::number_or(v, "tau_attitude_s", p.tau_attitude, kSchema, ctx);
    p.max_climb_accel = detail::number_or(v, "max_climb_accel_mps2", p.max_climb_accel, kSchema, ctx);
    if (v.contains("max_yaw_rate_deg_s")) p.max_yaw_rate = detail::require_number(v, "max_yaw_rate_deg_s", kSchema, ctx) * kDeg;
    p.drag = detail::number_or(v, "drag_per_s", p.drag, kSchema, ctx);
    if (v.contains("max_tilt_deg")) p.max_tilt = detail::require_number(v, "max_tilt_deg", kSchema, ctx) * kDeg;
    p.hover_rpm = detail::number_or(v, "hover_rpm", p.hover_rpm, kSchema, ctx);
    p.battery_per_rev = detail::number_or(v, "battery_per_rev", p.battery_per_rev, kSchema, ctx);
    validate(p);
    return p;
}

PathSpec path_from_json(const Json& v, std::size_t index) {
    std::string ctx = "flight.paths[" + std::to_string(index) + "]";
    detail::reject_unknown_keys(v, {"id", "origin", "heading_deg", "altitude_m", "capture_radius_m",
                                    "length_m", "radius_m", "sweep_deg", "count"},
                                kSchema, ctx);
    PathSpec spec;
    try {
        spec.id = parse_path_id(detail::require_string(v, "id", kSchema, ctx));
    } catch (const Error& e) {
        fail(kSchema, ctx + ": " + e.what());
    }
    auto [ox, oy] = xy_from_json(detail::require(v, "origin", kSchema, ctx), ctx + ".origin");
    spec.origin_x = ox;
    spec.origin_y = oy;
    spec.heading = detail::number_or(v, "heading_deg", 0.0, kSchema, ctx) * kDeg;
    spec.altitude = detail::require_number(v, "altitude_m", kSchema, ctx);
    spec.capture_radius = detail::number_or(v, "capture_radius_m", spec.capture_radius, kSchema, ctx);
    spec.length = detail::number_or(v, "length_m", spec.length, kSchema, ctx);
    spec.radius = detail::number_or(v, "radius_m", spec.radius, kSchema, ctx);
    if (v.contains("sweep_deg")) spec.sweep = detail::require_number(v, "sweep_deg", kSchema, ctx) * kDeg;
    if (v.contains("count")) {
        std::int64_t n = detail::require_int(v, "count", kSchema, ctx);
        if (n < 2) fail(ErrorCode::InvalidConfig, ctx + ".count must be >= 2");
        spec.count = static_cast<std::size_t>(n);
    }
    return spec;
}

void check_leveling_fits(const Scenario& s) {
    const LevelingExercise& ex = *s.leveling;
    const Terrain& t = *s.terrain;
    for (const Benchmark* b : {&ex.benchmark_a, &ex.benchmark_b}) {
        if (!t.contains(b->position.x, b->position.y)) {
            fail(ErrorCode::InvalidConfig, "benchmark " + b->id + " lies outside the terrain");
        }
    }
    TripodConfig tripod{ex.station_x, ex.station_y, s.instrument.heading, s.instrument.leg_lengths,
                        s.instrument.splay_radius};
    TripodSetup setup;
    try {
        setup = setup_tripod(tripod, t);
        read_level(setup, ScrewState{0, 0, 0, s.instrument.alpha_screw}, s.instrument.bubble);
    } catch (const Error& e) {
        fail(ErrorCode::InvalidConfig, std::string("initial tripod set-up: ") + e.what());
    }
    double hi = setup.head_center.z + s.instrument.instrument_height;
    for (const Benchmark* b : {&ex.benchmark_a, &ex.benchmark_b}) {
        double reading = hi - b->position.z;
        if (!(reading >= 0.0 && reading <= ex.rod_height_max)) {
            fail(ErrorCode::InvalidConfig, "rod on " + b->id + " is out of sight from the station (reading " +
                                               std::to_string(reading) + " m)");
        }
    }
}

void check_flight_fits(const Scenario& s) {
    const Terrain& t = *s.terrain;
    for (const PathSpec& spec : s.flight->paths) {
        WaypointPath path = make_path(spec);
        for (const WorldPoint& wp : path.waypoints()) {
            if (!t.contains(wp.x, wp.y)) {
                fail(ErrorCode::InvalidConfig, std::string(path_id_name(spec.id)) + " leaves the terrain");
            }
            if (!(wp.z > elevation_at(t, wp.x, wp.y))) {
                fail(ErrorCode::InvalidConfig, std::string(path_id_name(spec.id)) + " runs below ground");
            }
        }
    }
}

}  // namespace

const PathSpec* Scenario::find_path(PathId id) const {
    if (!flight) return nullptr;
    for (const auto& p : flight->paths) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

Scenario scenario_from_json(const Json& doc, const std::string& base_dir) {
    detail::reject_unknown_keys(doc, {"format", "id", "seed", "terrain", "filter", "instrument",
                                      "leveling", "flight"},
                                kSchema, "");
    detail::check_format(doc, "format", kScenarioFormat, kSchema, "");
    Scenario s;
    s.id = detail::require_string(doc, "id", kSchema, "");
    if (s.id.empty()) fail(kSchema, "scenario id must not be empty");
    const Json& seed = detail::require(doc, "seed", kSchema, "");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                      seed.get<std::int64_t>() < 0)) {
        fail(kSchema, "seed must be a non-negative 64-bit integer");
    }
    s.seed = seed.get<std::uint64_t>();

    const Json& terrain = detail::require(doc, "terrain", kSchema, "");
    Json terrain_doc;
    if (terrain.is_object() && terrain.contains("file")) {
        detail::reject_unknown_keys(terrain, {"file"}, kSchema, "terrain");
        std::string file = resolve_path(base_dir, detail::require_string(terrain, "file", kSchema, "terrain"));
        terrain_doc = detail::parse_json(detail::read_text_file(file), kSchema, "terrain file " + file);
    } else {
        terrain_doc = terrain;
    }
    s.terrain = std::make_shared<const Terrain>(detail::terrain_from_json(terrain_doc));

    s.filter = filter_from_json(doc);
    s.instrument = instrument_from_json(doc);
    TripodConfig probe{0, 0, s.instrument.heading, s.instrument.leg_lengths, s.instrument.splay_radius};
    validate(probe);

    if (doc.contains("leveling")) {
        s.leveling = leveling_from_json(doc["leveling"]);
        check_leveling_fits(s);
    }
    if (doc.contains("flight")) {
        const Json& f = doc["flight"];
        detail::reject_unknown_keys(f, {"physics", "paths"}, kSchema, "flight");
        FlightConfig fc;
        if (f.contains("physics")) fc.params = physics_from_json(f["physics"]);
        const Json& paths = detail::require(f, "paths", kSchema, "flight");
        if (!paths.is_array() || paths.empty()) fail(kSchema, "flight.paths must be a non-empty array");
        for (std::size_t i = 0; i < paths.size(); ++i) {
            PathSpec spec = path_from_json(paths[i], i);
            for (const auto& other : fc.paths) {
                if (other.id == spec.id) fail(kSchema, "duplicate path id " + std::string(path_id_name(spec.id)));
            }
            fc.paths.push_back(spec);
        }
        s.flight = std::move(fc);
        check_flight_fits(s);
    }
    if (!s.leveling && !s.flight) fail(kSchema, "scenario defines neither leveling nor flight");

    s.resolved = doc;
    s.resolved["terrain"] = terrain_doc;
    return s;
}

Scenario scenario_from_text(const std::string& text, const std::string& base_dir) {
    return scenario_from_json(detail::parse_json(text, kSchema, "scenario"), base_dir);
}

Scenario load_scenario_file(const std::string& path) {
    std::string base = std::filesystem::path(path).parent_path().string();
    return scenario_from_text(detail::read_text_file(path), base);
}

}  // namespace survey
