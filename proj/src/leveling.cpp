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

#include "survey_bench/leveling.hpp"

#include <algorithm>

#include "survey_bench/metrics.hpp"

namespace survey {

void validate(const LevelingExercise& ex) {
    if (ex.benchmark_a.id.empty() || ex.benchmark_b.id.empty()) {
        fail(ErrorCode::InvalidConfig, "benchmarks need ids");
    }
    if (ex.benchmark_a.id == ex.benchmark_b.id) {
        fail(ErrorCode::InvalidConfig, "benchmark ids must be unique");
    }
    if (!ex.benchmark_a.elevation_known) {
        fail(ErrorCode::InvalidConfig, "benchmark " + ex.benchmark_a.id + " must have a known elevation");
    }
    if (!is_finite(ex.benchmark_a.position) || !is_finite(ex.benchmark_b.position)) {
        fail(ErrorCode::InvalidConfig, "benchmark positions must be finite");
    }
    if (ex.benchmark_b.position.z == 0.0) {
        fail(ErrorCode::InvalidConfig, "benchmark " + ex.benchmark_b.id +
                                           " at elevation 0 cannot be graded by relative error");
    }
    auto same_xy = [](const WorldPoint& p, double x, double y) { return p.x == x && p.y == y; };
    if (same_xy(ex.benchmark_a.position, ex.station_x, ex.station_y) ||
        same_xy(ex.benchmark_b.position, ex.station_x, ex.station_y) ||
        same_xy(ex.benchmark_a.position, ex.benchmark_b.position.x, ex.benchmark_b.position.y)) {
        fail(ErrorCode::InvalidConfig, "station and benchmarks must be distinct");
    }
    if (!(ex.rod_height_max > 0.0)) fail(ErrorCode::InvalidConfig, "rod_height_max must be > 0");
    if (!(ex.noise_sd >= 0.0) || !std::isfinite(ex.noise_sd)) {
        fail(ErrorCode::InvalidConfig, "noise_sd must be >= 0");
    }
}

std::string_view sight_kind_name(SightKind kind) {
    return kind == SightKind::Backsight ? "backsight" : "foresight";
}

SightKind parse_sight_kind(std::string_view name) {
    if (name == "backsight") return SightKind::Backsight;
    if (name == "foresight") return SightKind::Foresight;
    fail(ErrorCode::InvalidArgument, "sight kind must be 'backsight' or 'foresight'");
}

double simulated_rod_reading(double instrument_hi, double rod_base_elevation, double noise_sd,
                             bool instrument_level, double rod_height_max, SessionRng& rng) {
    if (!instrument_level) fail(ErrorCode::NotLevel, "instrument is not level");
    double geometric = instrument_hi - rod_base_elevation;
    if (!(geometric >= 0.0 && geometric <= rod_height_max)) {
        fail(ErrorCode::RodOutOfRange, "line of sight misses the rod (reading " +
                                           std::to_string(geometric) + " m)");
    }
    double noisy = geometric + noise_sd * rng.normal();
    return std::clamp(noisy, 0.0, rod_height_max);
}

double height_of_instrument(double elev_a, double backsight) { return elev_a + backsight; }

double elevation_from_foresight(double hi, double foresight) { return hi - foresight; }

LevelingResult grade_exercise(const LevelingExercise& ex, const SightReading& bs,
                              const SightReading& fs) {
    if (bs.kind != SightKind::Backsight || bs.target != ex.benchmark_a.id) {
        fail(ErrorCode::WrongTarget, "backsight must be taken on " + ex.benchmark_a.id);
    }
    if (fs.kind != SightKind::Foresight || fs.target != ex.benchmark_b.id) {
        fail(ErrorCode::WrongTarget, "foresight must be taken on " + ex.benchmark_b.id);
    }
    LevelingResult out;
    out.hi = height_of_instrument(ex.benchmark_a.position.z, bs.value);
    out.computed_elevation_b = elevation_from_foresight(out.hi, fs.value);
    out.true_elevation_b = ex.benchmark_b.position.z;
    out.error = elevation_error(out.computed_elevation_b, out.true_elevation_b);
    return out;
}

}  // namespace survey
