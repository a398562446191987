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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "survey_bench/flight.hpp"
#include "survey_bench/geodesy.hpp"
#include "survey_bench/input_filter.hpp"
#include "survey_bench/instrument.hpp"
#include "survey_bench/leveling.hpp"
#include "survey_bench/trace.hpp"

namespace survey {

inline constexpr int kScenarioFormat = 1;

struct FilterConfig {
    double alpha = kDefaultSmoothingAlpha;
    double deadzone_mps = kDefaultDeadzoneMps;
};

struct InstrumentConfig {
    BubbleCalibration bubble;
    double alpha_screw = kDefaultScrewAlpha;
    double instrument_height = 0.25;  // line of sight above the tripod head, m
    double splay_radius = 0.6;
    std::array<double, 3> leg_lengths{1.5, 1.5, 1.5};
    double heading = 0.0;
    // Disc radius for the terrain plane probe reported on the HUD.
    double ground_probe_radius = 0.5;
};

struct FlightConfig {
    FlightParams params;
    std::vector<PathSpec> paths;
};

struct Scenario {
    std::string id;
    std::uint64_t seed = 0;
    std::shared_ptr<const Terrain> terrain;
    FilterConfig filter;
    InstrumentConfig instrument;
    std::optional<LevelingExercise> leveling;
    std::optional<FlightConfig> flight;
    // The scenario document with the terrain inlined; embedded in traces.
    Json resolved;

    const PathSpec* find_path(PathId id) const;
};

// Parses and fully validates a scenario document. Terrain given as
// {"file": ...} is resolved relative to `base_dir`. SchemaError for shape
// problems, InvalidConfig for physically unusable set-ups.
Scenario scenario_from_json(const Json& doc, const std::string& base_dir);
Scenario scenario_from_text(const std::string& text, const std::string& base_dir);
Scenario load_scenario_file(const std::string& path);

}  // namespace survey
