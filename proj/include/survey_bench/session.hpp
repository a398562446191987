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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survey_bench/flight.hpp"
#include "survey_bench/input_filter.hpp"
#include "survey_bench/instrument.hpp"
#include "survey_bench/leveling.hpp"
#include "survey_bench/metrics.hpp"
#include "survey_bench/random.hpp"
#include "survey_bench/scenario.hpp"
#include "survey_bench/trace.hpp"

namespace survey {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kEngineVersion = "1.0.0";
inline constexpr int kTickRate = 50;

enum class Mode { Orientation, Leveling, Flight, Ended };

std::string_view mode_name(Mode mode);

// One exercise session: a deterministic state machine driven by protocol
// messages. Not thread-safe; callers serialize messages per session.
class Session {
public:
    explicit Session(Scenario scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

    // Applies one protocol message and returns the outbound messages. Never
    // throws for bad input: failures come back as a single `error` message
    // and leave the session untouched.
    std::vector<Json> apply_message(const Json& message);
    std::vector<std::string> apply_line(std::string_view line);

    Mode mode() const { return mode_; }
    std::int64_t clock() const { return clock_; }
    double time() const { return static_cast<double>(clock_) / kTickRate; }
    const Scenario& scenario() const { return scenario_; }
    std::uint64_t seed() const { return rng_.seed(); }

    const std::vector<TraceEvent>& events() const { return events_; }
    // Hex FNV-1a over the canonical state document, including a digest of
    // every trace event so far.
    std::string state_hash() const;
    Json state_document() const;
    SessionTrace record() const;

    // Read-only views for tooling and tests; null outside the exercise.
    const LevelReadout* level_readout() const;
    const TripodSetup* tripod_setup() const;
    const ScrewState* screws() const;
    std::optional<double> instrument_hi() const;
    const DroneState* drone() const;
    const TrailRun* trail() const;
    const WaypointPath* active_path() const;
    const FilterState& filter_state() const { return filter_; }

private:
    struct LevelingRun {
        std::int64_t attempt = 0;
        TripodConfig tripod;
        TripodSetup setup;
        ScrewState screws;
        LevelReadout readout;
        bool was_level = false;
        std::array<std::optional<SightReading>, 2> taken;   // [backsight, foresight]
        std::array<std::optional<SightReading>, 2> booked;
    };

    struct FlightRun {
        std::int64_t attempt = 0;
        WaypointPath path;
        DroneState drone;
        ControlInput held;
        TrailRun trail;
    };

    using Out = std::vector<Json>;

    Out dispatch(const std::string& verb, const Json& msg);
    Out on_hello(const Json& msg);
    Out on_status(const Json& msg);
    Out on_tick(const Json& msg);
    Out on_start_exercise(const Json& msg);
    Out on_set_leg_length(const Json& msg);
    Out on_rotate_tripod(const Json& msg);
    Out on_turn_screw(const Json& msg);
    Out on_auto_level(const Json& msg);
    Out on_take_reading(const Json& msg);
    Out on_book_reading(const Json& msg);
    Out on_finish_task(const Json& msg);
    Out on_control(const Json& msg);
    Out on_pointer(const Json& msg);
    Out on_exit(const Json& msg);

    void require_mode(Mode wanted, std::string_view verb) const;
    void record_input(const Json& msg);
    void emit(EventKind kind, std::string name, Json payload, Out* out);

    // Re-stands the tripod with new legs, heading or screws; throws before
    // anything is committed.
    LevelingRun restand(const TripodConfig& config, const ScrewState& screws) const;
    Out commit_run(LevelingRun next, const Json& msg);
    Json bubble_message() const;
    Json telemetry_message() const;
    void finish_flight(bool completed, bool aborted, Out* out);
    std::string task_name() const;
    std::int64_t next_attempt(const std::string& task) const;

    Scenario scenario_;
    Mode mode_ = Mode::Orientation;
    std::int64_t clock_ = 0;
    std::map<std::string, std::int64_t> attempts_;
    std::optional<LevelingRun> leveling_;
    std::optional<FlightRun> flight_;
    FilterState filter_;
    SessionRng rng_;
    std::vector<TraceEvent> events_;
    std::uint64_t trace_digest_;
};

struct ReplayResult {
    SessionTrace trace;
    SessionReport report;
};

// Re-executes the trace's inputs at their recorded ticks with the recorded
// seed. `scenario` overrides the embedded scenario (ids must match).
ReplayResult replay(const SessionTrace& trace, const Scenario* scenario = nullptr);

}  // namespace survey
