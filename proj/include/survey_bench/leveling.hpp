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

#pragma once

#include <string>
#include <string_view>

#include "survey_bench/geodesy.hpp"
#include "survey_bench/random.hpp"

namespace survey {

inline constexpr double kDefaultRodHeightMax = 4.0;

struct LevelingExercise {
    Benchmark benchmark_a;  // known elevation
    Benchmark benchmark_b;  // elevation hidden from the operator
    double station_x = 0.0;
    double station_y = 0.0;
    double rod_height_max = kDefaultRodHeightMax;
    double noise_sd = 0.0;
};

void validate(const LevelingExercise& exercise);

enum class SightKind { Backsight, Foresight };

std::string_view sight_kind_name(SightKind kind);
SightKind parse_sight_kind(std::string_view name);  // InvalidArgument on anything else

struct SightReading {
    SightKind kind = SightKind::Backsight;
    double value = 0.0;  // metres on the rod
    std::string target;
    double taken_at = 0.0;
};

struct LevelingResult {
    double hi = 0.0;
    double computed_elevation_b = 0.0;
    double true_elevation_b = 0.0;
    double error = 0.0;  // relative, dimensionless
};

// Rod reading for a level line of sight at height `instrument_hi` over a rod
// standing at `rod_base_elevation`, plus N(0, noise_sd) drawn from `rng`.
// The noisy value is clamped to the rod; one normal draw per call.
double simulated_rod_reading(double instrument_hi, double rod_base_elevation, double noise_sd,
                             bool instrument_level, double rod_height_max, SessionRng& rng);

double height_of_instrument(double elev_a, double backsight);
double elevation_from_foresight(double hi, double foresight);

LevelingResult grade_exercise(const LevelingExercise& exercise, const SightReading& backsight,
                              const SightReading& foresight);

}  // namespace survey
