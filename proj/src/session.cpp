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

#include "survey_bench/session.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "json_io.hpp"

namespace survey {

namespace {

constexpr auto kBad = ErrorCode::MalformedMessage;
constexpr double kDeg = std::numbers::pi / 180.0;

const char* const kLevelingTask = "leveling";

Json error_message(ErrorCode code, const std::string& message, const std::string& verb) {
    Json j;
    j["type"] = "error";
    j["code"] = std::string(error_code_name(code));
    j["message"] = message;
    if (!verb.empty()) j["verb"] = verb;
    return j;
}

Json ack(std::string_view verb) {
    Json j;
    j["type"] = "ack";
    j["verb"] = std::string(verb);
    return j;
}

Json event_line(const TraceEvent& ev) {
    Json j;
    j["tick"] = ev.tick;
    j["t"] = ev.t;
    j["kind"] = std::string(event_kind_name(ev.kind));
    j["name"] = ev.name;
    j["payload"] = ev.payload;
    return j;
}

std::size_t sight_index(SightKind kind) { return kind == SightKind::Backsight ? 0 : 1; }

int version_major(const std::string& version) {
    std::size_t dot = version.find('.');
    std::string head = version.substr(0, dot);
    if (head.empty() || head.find_first_not_of("0123456789") != std::string::npos) {
        fail(ErrorCode::VersionMismatch, "unreadable engine version '" + version + "'");
    }
    return std::stoi(head);
}

Json screws_json(const ScrewState& s) { return {{"l", s.l}, {"r", s.r}, {"b", s.b}}; }

Json drone_json(const DroneState& d) {
    Json j;
    j["position"] = detail::vec3_to_json(d.position);
    j["velocity"] = detail::vec3_to_json(d.velocity);
    j["yaw"] = d.yaw;
    j["pitch"] = d.pitch;
    j["roll"] = d.roll;
    j["rotor_rpm"] = d.rotor_rpm;
    j["battery"] = d.battery;
    j["grounded"] = d.grounded;
    return j;
}

}  // namespace

std::string_view mode_name(Mode mode) {
    switch (mode) {
        case Mode::Orientation: return "orientation";
        case Mode::Leveling: return "leveling";
        case Mode::Flight: return "flight";
        case Mode::Ended: return "ended";
    }
    return "unknown";
}

Session::Session(Scenario scenario, std::optional<std::uint64_t> seed_override)
    : scenario_(std::move(scenario)),
      filter_(FilterState::make(scenario_.filter.alpha)),
      rng_(seed_override.value_or(scenario_.seed)),
      trace_digest_(detail::fnv1a("")) {
    emit(EventKind::Milestone, "session_start",
         {{"scenario_id", scenario_.id}, {"seed", rng_.seed()}}, nullptr);
}

std::vector<std::string> Session::apply_line(std::string_view line) {
    std::vector<Json> out;
    Json msg;
    try {
        msg = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        out.push_back(error_message(kBad, std::string("not JSON: ") + e.what(), ""));
    }
    if (out.empty()) out = apply_message(msg);
    std::vector<std::string> lines;
    lines.reserve(out.size());
    // Parse errors quote the offending bytes, which need not be UTF-8.
    for (const auto& j : out) lines.push_back(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    return lines;
}

std::vector<Json> Session::apply_message(const Json& msg) {
    std::string verb;
    try {
        if (!msg.is_object()) fail(kBad, "message must be a JSON object");
        auto proto = msg.find("proto");
        if (proto == msg.end() || !proto->is_number_integer()) fail(kBad, "missing integer 'proto'");
        if (proto->get<std::int64_t>() != kProtocolVersion) {
            fail(ErrorCode::VersionMismatch,
                 "protocol " + proto->dump() + " not supported (expected " +
                     std::to_string(kProtocolVersion) + ")");
        }
        verb = detail::require_string(msg, "verb", kBad, "");
        return dispatch(verb, msg);
    } catch (const Error& e) {
        return {error_message(e.code(), e.what(), verb)};
    } catch (const nlohmann::json::exception& e) {
        return {error_message(kBad, e.what(), verb)};
    } catch (const std::exception& e) {
        return {error_message(ErrorCode::InvalidArgument, e.what(), verb)};
    }
}

Session::Out Session::dispatch(const std::string& verb, const Json& msg) {
    if (verb == "hello") return on_hello(msg);
    if (verb == "status") return on_status(msg);
    if (mode_ == Mode::Ended) {
        if (verb == "tick" || verb == "start_exercise" || verb == "set_leg_length" ||
            verb == "rotate_tripod" || verb == "turn_screw" || verb == "auto_level" ||
            verb == "take_reading" || verb == "book_reading" || verb == "finish_task" ||
            verb == "control" || verb == "pointer" || verb == "exit") {
            fail(ErrorCode::IllegalInMode, "session has ended");
        }
    }
    if (verb == "tick") return on_tick(msg);
    if (verb == "start_exercise") return on_start_exercise(msg);
    if (verb == "set_leg_length") return on_set_leg_length(msg);
    if (verb == "rotate_tripod") return on_rotate_tripod(msg);
    if (verb == "turn_screw") return on_turn_screw(msg);
    if (verb == "auto_level") return on_auto_level(msg);
    if (verb == "take_reading") return on_take_reading(msg);
    if (verb == "book_reading") return on_book_reading(msg);
    if (verb == "finish_task") return on_finish_task(msg);
    if (verb == "control") return on_control(msg);
    if (verb == "pointer") return on_pointer(msg);
    if (verb == "exit") return on_exit(msg);
    fail(ErrorCode::UnknownVerb, "unknown verb '" + verb + "'");
}

void Session::require_mode(Mode wanted, std::string_view verb) const {
    if (mode_ != wanted) {
        fail(ErrorCode::IllegalInMode, std::string(verb) + " needs mode " +
                                           std::string(mode_name(wanted)) + ", session is in " +
                                           std::string(mode_name(mode_)));
    }
}

void Session::record_input(const Json& msg) {
    Json payload = Json::object();
    for (auto it = msg.begin(); it != msg.end(); ++it) {
        if (it.key() != "proto") payload[it.key()] = it.value();
    }
    emit(EventKind::Input, msg.at("verb").get<std::string>(), std::move(payload), nullptr);
}

void Session::emit(EventKind kind, std::string name, Json payload, Out* out) {
    TraceEvent ev{clock_, time(), kind, std::move(name), std::move(payload)};
    trace_digest_ = detail::fnv1a(event_line(ev).dump(), trace_digest_);
    if (out && kind != EventKind::Input) {
        Json j;
        j["type"] = "event";
        j["kind"] = std::string(event_kind_name(kind));
        j["name"] = ev.name;
        j["tick"] = ev.tick;
        j["t"] = ev.t;
        j["payload"] = ev.payload;
        out->push_back(std::move(j));
    }
    events_.push_back(std::move(ev));
}

std::string Session::task_name() const {
    if (leveling_) return kLevelingTask;
    if (flight_) return std::string(path_id_name(flight_->path.id()));
    return "";
}

std::int64_t Session::next_attempt(const std::string& task) const {
    auto it = attempts_.find(task);
    return (it == attempts_.end() ? 0 : it->second) + 1;
}

// --- status ---------------------------------------------------------------

Session::Out Session::on_hello(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb", "client"}, kBad, "hello");
    Json j;
    j["type"] = "hello";
    j["proto"] = kProtocolVersion;
    j["engine_version"] = std::string(kEngineVersion);
    j["scenario_id"] = scenario_.id;
    j["tick_rate"] = kTickRate;
    j["mode"] = std::string(mode_name(mode_));
    Json exercises = Json::array();
    if (scenario_.leveling) {
        const auto& ex = *scenario_.leveling;
        Json lv;
        lv["exercise"] = "leveling";
        lv["benchmark_a"] = {{"id", ex.benchmark_a.id},
                             {"position", detail::vec3_to_json(ex.benchmark_a.position)}};
        // Only the plan position of B is shown; its elevation is the answer.
        lv["benchmark_b"] = {{"id", ex.benchmark_b.id},
                             {"position", {ex.benchmark_b.position.x, ex.benchmark_b.position.y}}};
        lv["station"] = {ex.station_x, ex.station_y};
        lv["rod_height_max_m"] = ex.rod_height_max;
        exercises.push_back(std::move(lv));
    }
    if (scenario_.flight) {
        for (const auto& spec : scenario_.flight->paths) {
            WaypointPath path = make_path(spec);
            Json fl;
            fl["exercise"] = "flight";
            fl["path"] = std::string(path_id_name(spec.id));
            Json wps = Json::array();
            for (const auto& w : path.waypoints()) wps.push_back(detail::vec3_to_json(w));
            fl["waypoints"] = std::move(wps);
            fl["capture_radius_m"] = path.capture_radius();
            exercises.push_back(std::move(fl));
        }
    }
    j["exercises"] = std::move(exercises);
    return {std::move(j)};
}

Session::Out Session::on_status(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb"}, kBad, "status");
    Json j;
    j["type"] = "status";
    j["mode"] = std::string(mode_name(mode_));
    j["clock"] = clock_;
    j["t"] = time();
    j["task"] = task_name();
    j["state_hash"] = state_hash();
    Out out{std::move(j)};
    if (leveling_) out.push_back(bubble_message());
    if (flight_) out.push_back(telemetry_message());
    return out;
}

// --- clock ----------------------------------------------------------------

Session::Out Session::on_tick(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb"}, kBad, "tick");
    Out out;
    if (!flight_) {
        ++clock_;
        Json j = ack("tick");
        j["clock"] = clock_;
        out.push_back(std::move(j));
        return out;
    }
    // Nothing below can fail for a validated session, so state is advanced
    // in place.
    auto& run = *flight_;
    FlightStep step =
        step_dynamics(run.drone, run.held, scenario_.flight->params, scenario_.terrain.get());
    ++clock_;
    run.drone = step.state;
    std::size_t hit_before = run.trail.waypoints_hit;
    run.trail = update_progress(std::move(run.trail), run.drone, run.path, time());
    out.push_back(telemetry_message());
    std::string task = task_name();
    if (step.touched_down) {
        emit(EventKind::Milestone, "touchdown",
             {{"task", task},
              {"attempt", run.attempt},
              {"position", detail::vec3_to_json(run.drone.position)}},
             &out);
    }
    if (run.trail.waypoints_hit > hit_before) {
        emit(EventKind::Milestone, "waypoint_hit",
             {{"task", task},
              {"attempt", run.attempt},
              {"index", run.trail.waypoints_hit},
              {"of", run.path.waypoints().size()}},
             &out);
    }
    if (run.trail.completed) finish_flight(true, false, &out);
    return out;
}

// --- exercises ------------------------------------------------------------

Session::Out Session::on_start_exercise(const Json& msg) {
    require_mode(Mode::Orientation, "start_exercise");
    detail::reject_unknown_keys(msg, {"proto", "verb", "exercise", "path"}, kBad, "start_exercise");
    std::string exercise = detail::require_string(msg, "exercise", kBad, "start_exercise");
    Out out;
    if (exercise == "leveling") {
        if (msg.contains("path")) fail(kBad, "start_exercise.path only applies to flight");
        if (!scenario_.leveling) fail(ErrorCode::IllegalInMode, "scenario has no leveling exercise");
        const auto& ins = scenario_.instrument;
        LevelingRun run;
        run.attempt = next_attempt(kLevelingTask);
        run.tripod = TripodConfig{scenario_.leveling->station_x, scenario_.leveling->station_y,
                                  ins.heading, ins.leg_lengths, ins.splay_radius};
        run.setup = setup_tripod(run.tripod, *scenario_.terrain);
        run.screws.alpha_screw = ins.alpha_screw;
        run.readout = read_level(run.setup, run.screws, ins.bubble);
        run.was_level = run.readout.level;

        record_input(msg);
        attempts_[kLevelingTask] = run.attempt;
        leveling_ = std::move(run);
        mode_ = Mode::Leveling;
        out.push_back(ack("start_exercise"));
        emit(EventKind::Milestone, "task_start",
             {{"task", kLevelingTask}, {"attempt", leveling_->attempt}}, &out);
        out.push_back(bubble_message());
        if (leveling_->was_level) {
            emit(EventKind::Milestone, "level_achieved",
                 {{"task", kLevelingTask}, {"attempt", leveling_->attempt}}, &out);
        }
        return out;
    }
    if (exercise == "flight") {
        if (!scenario_.flight) fail(ErrorCode::IllegalInMode, "scenario has no flight exercise");
        PathId id = PathId::Path1;
        try {
            id = parse_path_id(detail::require_string(msg, "path", kBad, "start_exercise"));
        } catch (const Error& e) {
            fail(kBad, e.what());
        }
        const PathSpec* spec = scenario_.find_path(id);
        if (!spec) fail(ErrorCode::IllegalInMode, "scenario does not define " + std::string(path_id_name(id)));
        std::string task(path_id_name(id));
        FlightRun run;
        run.attempt = next_attempt(task);
        run.path = make_path(*spec);
        // The drone is handed over hovering at the first waypoint, facing
        // along the path.
        run.drone.position = run.path.waypoints().front();
        run.drone.yaw = spec->heading;
        run.drone.rotor_rpm = scenario_.flight->params.hover_rpm;
        run.trail.path_id = id;

        record_input(msg);
        attempts_[task] = run.attempt;
        flight_ = std::move(run);
        mode_ = Mode::Flight;
        out.push_back(ack("start_exercise"));
        emit(EventKind::Milestone, "task_start", {{"task", task}, {"attempt", flight_->attempt}}, &out);
        out.push_back(telemetry_message());
        return out;
    }
    fail(kBad, "start_exercise.exercise must be 'leveling' or 'flight'");
}

Session::LevelingRun Session::restand(const TripodConfig& config, const ScrewState& screws) const {
    LevelingRun next = *leveling_;
    next.tripod = config;
    next.setup = setup_tripod(config, *scenario_.terrain);
    next.screws = screws;
    next.readout = read_level(next.setup, next.screws, scenario_.instrument.bubble);
    return next;
}

Session::Out Session::commit_run(LevelingRun next, const Json& msg) {
    record_input(msg);
    bool became_level = next.readout.level && !leveling_->was_level;
    next.was_level = next.readout.level;
    leveling_ = std::move(next);
    Out out{bubble_message()};
    if (became_level) {
        emit(EventKind::Milestone, "level_achieved",
             {{"task", kLevelingTask}, {"attempt", leveling_->attempt}}, &out);
    }
    return out;
}

Json Session::bubble_message() const {
    const auto& run = *leveling_;
    const auto& rd = run.readout;
    BubbleAngles angles = bubble_angles(rd.bubble);
    Json j;
    j["type"] = "bubble";
    j["task"] = kLevelingTask;
    j["attempt"] = run.attempt;
    j["dx"] = rd.bubble.dx;
    j["dy"] = rd.bubble.dy;
    j["r"] = rd.bubble.r;
    j["level"] = rd.level;
    j["theta_x_deg"] = angles.theta_x / kDeg;
    j["theta_y_deg"] = angles.theta_y / kDeg;
    j["tilt_u_deg"] = rd.tilt.u() / kDeg;
    j["tilt_v_deg"] = rd.tilt.v() / kDeg;
    j["axis_x"] = rd.axis.x;
    j["axis_z"] = rd.axis.z;
    j["misalignment_m"] = misalignment_distance(run.setup.contacts);
    j["foot_height_sd_m"] = height_stddev(run.setup.contacts.ground_points);
    j["screws_mm"] = screws_json(run.screws);
    j["leg_lengths_m"] = run.tripod.leg_lengths;
    j["heading_deg"] = run.tripod.heading / kDeg;
    return j;
}

Json Session::telemetry_message() const {
    const auto& run = *flight_;
    const auto& d = run.drone;
    Json j;
    j["type"] = "telemetry";
    j["task"] = std::string(path_id_name(run.path.id()));
    j["attempt"] = run.attempt;
    j["clock"] = clock_;
    j["t"] = time();
    j["position"] = detail::vec3_to_json(d.position);
    j["velocity"] = detail::vec3_to_json(d.velocity);
    j["yaw_deg"] = d.yaw / kDeg;
    j["pitch_deg"] = d.pitch / kDeg;
    j["roll_deg"] = d.roll / kDeg;
    j["rotor_rpm"] = d.rotor_rpm;
    j["battery"] = d.battery;
    j["grounded"] = d.grounded;
    j["cross_track_m"] = run.trail.samples.empty() ? cross_track_error(d.position, run.path)
                                                   : run.trail.samples.back().cross_track;
    j["waypoints_hit"] = run.trail.waypoints_hit;
    j["waypoint_count"] = run.path.waypoints().size();
    return j;
}

void Session::finish_flight(bool completed, bool aborted, Out* out) {
    auto& run = *flight_;
    std::string task = task_name();
    Json summary;
    summary["task"] = task;
    summary["attempt"] = run.attempt;
    summary["completed"] = completed;
    if (run.trail.samples.empty()) {
        summary["trailing_accuracy_m"] = nullptr;
    } else {
        summary["trailing_accuracy_m"] = trailing_accuracy(run.trail);
    }
    summary["samples"] = run.trail.samples.size();
    summary["waypoints_hit"] = run.trail.waypoints_hit;
    summary["waypoint_count"] = run.path.waypoints().size();
    emit(EventKind::Engine, "trail_summary", std::move(summary), out);
    Json end = {{"task", task}, {"attempt", run.attempt}, {"completed", completed}};
    if (aborted) end["aborted"] = true;
    emit(EventKind::Milestone, "task_end", std::move(end), out);
    flight_.reset();
    mode_ = Mode::Orientation;
}

// --- leveling -------------------------------------------------------------

Session::Out Session::on_set_leg_length(const Json& msg) {
    require_mode(Mode::Leveling, "set_leg_length");
    detail::reject_unknown_keys(msg, {"proto", "verb", "leg", "length_m"}, kBad, "set_leg_length");
    std::int64_t leg = detail::require_int(msg, "leg", kBad, "set_leg_length");
    if (leg < 0 || leg > 2) fail(ErrorCode::InvalidArgument, "leg must be 0, 1 or 2");
    double length = detail::require_number(msg, "length_m", kBad, "set_leg_length");
    TripodConfig config = leveling_->tripod;
    config.leg_lengths[static_cast<std::size_t>(leg)] = length;
    return commit_run(restand(config, leveling_->screws), msg);
}

Session::Out Session::on_rotate_tripod(const Json& msg) {
    require_mode(Mode::Leveling, "rotate_tripod");
    detail::reject_unknown_keys(msg, {"proto", "verb", "heading_deg"}, kBad, "rotate_tripod");
    double heading = detail::require_number(msg, "heading_deg", kBad, "rotate_tripod");
    TripodConfig config = leveling_->tripod;
    config.heading = heading * kDeg;
    return commit_run(restand(config, leveling_->screws), msg);
}

Session::Out Session::on_turn_screw(const Json& msg) {
    require_mode(Mode::Leveling, "turn_screw");
    detail::reject_unknown_keys(msg, {"proto", "verb", "screw", "delta_mm"}, kBad, "turn_screw");
    std::string which = detail::require_string(msg, "screw", kBad, "turn_screw");
    double delta = detail::require_number(msg, "delta_mm", kBad, "turn_screw");
    ScrewState screws = leveling_->screws;
    double* target = which == "l" ? &screws.l : which == "r" ? &screws.r : which == "b" ? &screws.b : nullptr;
    if (!target) fail(ErrorCode::InvalidArgument, "screw must be 'l', 'r' or 'b'");
    *target += delta;
    if (std::abs(*target) > kScrewTravelLimit) {
        fail(ErrorCode::OutOfRange, "screw " + which + " would travel past " +
                                        std::to_string(kScrewTravelLimit) + " mm");
    }
    return commit_run(restand(leveling_->tripod, screws), msg);
}

Session::Out Session::on_auto_level(const Json& msg) {
    require_mode(Mode::Leveling, "auto_level");
    detail::reject_unknown_keys(msg, {"proto", "verb"}, kBad, "auto_level");
    const auto& tilt = leveling_->readout.tilt;
    ScrewState screws = solve_screws(-tilt.u_base, -tilt.v_base, leveling_->screws.alpha_screw);
    return commit_run(restand(leveling_->tripod, screws), msg);
}

Session::Out Session::on_take_reading(const Json& msg) {
    require_mode(Mode::Leveling, "take_reading");
    detail::reject_unknown_keys(msg, {"proto", "verb", "kind", "target"}, kBad, "take_reading");
    SightKind kind = parse_sight_kind(detail::require_string(msg, "kind", kBad, "take_reading"));
    std::string target = detail::require_string(msg, "target", kBad, "take_reading");
    const auto& ex = *scenario_.leveling;
    const Benchmark& expected = kind == SightKind::Backsight ? ex.benchmark_a : ex.benchmark_b;
    if (target != expected.id) {
        fail(ErrorCode::WrongTarget, std::string(sight_kind_name(kind)) + " must be taken on " + expected.id);
    }
    double hi = *instrument_hi();
    // Draws from the session stream only once the sight is known to succeed.
    double value = simulated_rod_reading(hi, expected.position.z, ex.noise_sd, leveling_->readout.level,
                                         ex.rod_height_max, rng_);
    record_input(msg);
    leveling_->taken[sight_index(kind)] = SightReading{kind, value, target, time()};
    Out out;
    Json r;
    r["type"] = "reading";
    r["kind"] = std::string(sight_kind_name(kind));
    r["target"] = target;
    r["value_m"] = value;
    out.push_back(std::move(r));
    emit(EventKind::Milestone, "reading_taken",
         {{"task", kLevelingTask},
          {"attempt", leveling_->attempt},
          {"kind", std::string(sight_kind_name(kind))},
          {"target", target},
          {"value_m", value}},
         &out);
    return out;
}

Session::Out Session::on_book_reading(const Json& msg) {
    require_mode(Mode::Leveling, "book_reading");
    detail::reject_unknown_keys(msg, {"proto", "verb", "kind", "target", "value_m"}, kBad, "book_reading");
    SightKind kind = parse_sight_kind(detail::require_string(msg, "kind", kBad, "book_reading"));
    std::string target = detail::require_string(msg, "target", kBad, "book_reading");
    double value = detail::require_number(msg, "value_m", kBad, "book_reading");
    const auto& ex = *scenario_.leveling;
    const Benchmark& expected = kind == SightKind::Backsight ? ex.benchmark_a : ex.benchmark_b;
    if (target != expected.id) {
        fail(ErrorCode::WrongTarget, std::string(sight_kind_name(kind)) + " belongs to " + expected.id);
    }
    if (value < 0.0 || value > ex.rod_height_max) {
        fail(ErrorCode::RodOutOfRange, "booked value is off the rod");
    }
    record_input(msg);
    leveling_->booked[sight_index(kind)] = SightReading{kind, value, target, time()};
    return {ack("book_reading")};
}

Session::Out Session::on_finish_task(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb"}, kBad, "finish_task");
    Out out;
    if (mode_ == Mode::Flight) {
        record_input(msg);
        finish_flight(false, false, &out);
        return out;
    }
    require_mode(Mode::Leveling, "finish_task");
    auto& run = *leveling_;
    auto pick = [&](std::size_t i) -> const SightReading& {
        const auto& chosen = run.booked[i] ? run.booked[i] : run.taken[i];
        if (!chosen) {
            fail(ErrorCode::IllegalInMode, std::string(i == 0 ? "backsight" : "foresight") +
                                               " has not been read or booked");
        }
        return *chosen;
    };
    const SightReading& bs = pick(0);
    const SightReading& fs = pick(1);
    LevelingResult result = grade_exercise(*scenario_.leveling, bs, fs);

    record_input(msg);
    Json graded;
    graded["task"] = kLevelingTask;
    graded["attempt"] = run.attempt;
    graded["backsight_m"] = bs.value;
    graded["foresight_m"] = fs.value;
    graded["hi"] = result.hi;
    graded["computed_elevation_b"] = result.computed_elevation_b;
    graded["true_elevation_b"] = result.true_elevation_b;
    graded["error"] = result.error;
    Json reply = graded;
    reply["type"] = "graded";
    out.push_back(std::move(reply));
    emit(EventKind::Engine, "leveling_graded", std::move(graded), &out);
    emit(EventKind::Milestone, "task_end",
         {{"task", kLevelingTask}, {"attempt", run.attempt}, {"completed", true}}, &out);
    leveling_.reset();
    mode_ = Mode::Orientation;
    return out;
}

// --- flight and pointer ---------------------------------------------------

Session::Out Session::on_control(const Json& msg) {
    require_mode(Mode::Flight, "control");
    detail::reject_unknown_keys(msg, {"proto", "verb", "throttle", "pitch", "roll", "yaw_rate"}, kBad,
                                "control");
    ControlInput in;
    in.throttle = detail::require_number(msg, "throttle", kBad, "control");
    in.pitch_cmd = detail::require_number(msg, "pitch", kBad, "control");
    in.roll_cmd = detail::require_number(msg, "roll", kBad, "control");
    in.yaw_rate_cmd = detail::require_number(msg, "yaw_rate", kBad, "control");
    validate(in);
    record_input(msg);
    flight_->held = in;
    return {ack("control")};
}

Session::Out Session::on_pointer(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb", "t", "position", "velocity"}, kBad, "pointer");
    RawSample raw;
    raw.t = detail::require_number(msg, "t", kBad, "pointer");
    raw.position = detail::vec3_from_json(detail::require(msg, "position", kBad, "pointer"), kBad,
                                          "pointer.position");
    raw.velocity = detail::vec3_from_json(detail::require(msg, "velocity", kBad, "pointer"), kBad,
                                          "pointer.velocity");
    SesStep step = ses_step(filter_, raw);
    record_input(msg);
    filter_ = step.state;
    Vec3 v = apply_deadzone(step.output.velocity, scenario_.filter.deadzone_mps);
    Json j;
    j["type"] = "pointer";
    j["t"] = raw.t;
    j["position"] = detail::vec3_to_json(step.output.position);
    j["velocity"] = detail::vec3_to_json(v);
    j["still"] = v == Vec3{};
    return {std::move(j)};
}

Session::Out Session::on_exit(const Json& msg) {
    detail::reject_unknown_keys(msg, {"proto", "verb"}, kBad, "exit");
    record_input(msg);
    Out out;
    if (flight_) finish_flight(false, true, &out);
    if (leveling_) {
        emit(EventKind::Milestone, "task_end",
             {{"task", kLevelingTask}, {"attempt", leveling_->attempt}, {"completed", false}, {"aborted", true}},
             &out);
        leveling_.reset();
    }
    mode_ = Mode::Ended;
    emit(EventKind::Milestone, "session_end", {{"end_tick", clock_}}, &out);
    return out;
}

// --- state ----------------------------------------------------------------

Json Session::state_document() const {
    Json doc;
    doc["scenario_id"] = scenario_.id;
    doc["seed"] = rng_.seed();
    doc["rng_draws"] = rng_.draws();
    doc["mode"] = std::string(mode_name(mode_));
    doc["clock"] = clock_;
    Json attempts = Json::object();
    for (const auto& [task, n] : attempts_) attempts[task] = n;
    doc["attempts"] = std::move(attempts);
    if (leveling_) {
        const auto& run = *leveling_;
        Json lv;
        lv["attempt"] = run.attempt;
        lv["center"] = {run.tripod.center_x, run.tripod.center_y};
        lv["heading"] = run.tripod.heading;
        lv["leg_lengths"] = run.tripod.leg_lengths;
        lv["screws"] = screws_json(run.screws);
        lv["head_center"] = detail::vec3_to_json(run.setup.head_center);
        lv["bubble"] = {run.readout.bubble.dx, run.readout.bubble.dy};
        lv["level"] = run.readout.level;
        Json sights = Json::array();
        for (const auto* set : {&run.taken, &run.booked}) {
            for (const auto& s : *set) {
                sights.push_back(s ? Json{{"value", s->value}, {"target", s->target}, {"at", s->taken_at}}
                                   : Json(nullptr));
            }
        }
        lv["sights"] = std::move(sights);
        doc["leveling"] = std::move(lv);
    } else {
        doc["leveling"] = nullptr;
    }
    if (flight_) {
        const auto& run = *flight_;
        Json fl;
        fl["attempt"] = run.attempt;
        fl["path"] = std::string(path_id_name(run.path.id()));
        fl["drone"] = drone_json(run.drone);
        fl["held"] = {run.held.throttle, run.held.pitch_cmd, run.held.roll_cmd, run.held.yaw_rate_cmd};
        fl["samples"] = run.trail.samples.size();
        fl["waypoints_hit"] = run.trail.waypoints_hit;
        double sum = 0.0;
        for (const auto& s : run.trail.samples) sum += s.cross_track;
        fl["cross_track_sum"] = sum;
        doc["flight"] = std::move(fl);
    } else {
        doc["flight"] = nullptr;
    }
    Json filter;
    filter["initialized"] = filter_.initialized;
    filter["last_t"] = filter_.last_t ? Json(*filter_.last_t) : Json(nullptr);
    filter["position"] = detail::vec3_to_json(filter_.smoothed.position);
    filter["velocity"] = detail::vec3_to_json(filter_.smoothed.velocity);
    doc["filter"] = std::move(filter);
    doc["events"] = events_.size();
    doc["events_digest"] = detail::hex64(trace_digest_);
    return doc;
}

std::string Session::state_hash() const { return detail::hex64(detail::fnv1a(state_document().dump())); }

SessionTrace Session::record() const {
    SessionTrace trace;
    trace.header.scenario_id = scenario_.id;
    trace.header.seed = rng_.seed();
    trace.header.engine_version = std::string(kEngineVersion);
    trace.header.tick_rate = kTickRate;
    trace.header.scenario = scenario_.resolved;
    trace.events = events_;
    trace.end_tick = clock_;
    trace.final_state_hash = state_hash();
    return trace;
}

const LevelReadout* Session::level_readout() const { return leveling_ ? &leveling_->readout : nullptr; }
const TripodSetup* Session::tripod_setup() const { return leveling_ ? &leveling_->setup : nullptr; }
const ScrewState* Session::screws() const { return leveling_ ? &leveling_->screws : nullptr; }
const DroneState* Session::drone() const { return flight_ ? &flight_->drone : nullptr; }
const TrailRun* Session::trail() const { return flight_ ? &flight_->trail : nullptr; }
const WaypointPath* Session::active_path() const { return flight_ ? &flight_->path : nullptr; }

std::optional<double> Session::instrument_hi() const {
    if (!leveling_) return std::nullopt;
    return leveling_->setup.head_center.z + scenario_.instrument.instrument_height;
}

// --- replay ---------------------------------------------------------------

ReplayResult replay(const SessionTrace& trace, const Scenario* scenario) {
    const auto& header = trace.header;
    if (version_major(header.engine_version) != version_major(std::string(kEngineVersion))) {
        fail(ErrorCode::VersionMismatch, "trace from engine " + header.engine_version +
                                             ", this is " + std::string(kEngineVersion));
    }
    if (header.tick_rate != kTickRate) {
        fail(ErrorCode::VersionMismatch, "trace tick rate " + std::to_string(header.tick_rate) +
                                             " Hz, engine runs " + std::to_string(kTickRate));
    }
    std::optional<Scenario> embedded;
    if (!scenario) {
        try {
            embedded = scenario_from_json(header.scenario, "");
        } catch (const Error& e) {
            fail(ErrorCode::CorruptTrace, std::string("embedded scenario: ") + e.what());
        }
        scenario = &*embedded;
    }
    if (scenario->id != header.scenario_id) {
        fail(ErrorCode::ScenarioMismatch,
             "trace is for scenario '" + header.scenario_id + "', got '" + scenario->id + "'");
    }

    Session session(*scenario, header.seed);
    const Json tick = {{"proto", kProtocolVersion}, {"verb", "tick"}};
    auto advance_to = [&](std::int64_t target) {
        if (target < session.clock()) fail(ErrorCode::CorruptTrace, "trace events go back in time");
        while (session.clock() < target) {
            auto out = session.apply_message(tick);
            if (!out.empty() && out.front().value("type", "") == "error") {
                fail(ErrorCode::CorruptTrace, "tick " + std::to_string(session.clock()) +
                                                  " rejected: " + out.front().value("message", ""));
            }
        }
    };
    for (const auto& ev : trace.events) {
        if (ev.kind != EventKind::Input) continue;
        advance_to(ev.tick);
        Json msg = ev.payload;
        msg["proto"] = kProtocolVersion;
        auto out = session.apply_message(msg);
        if (!out.empty() && out.front().value("type", "") == "error") {
            fail(ErrorCode::CorruptTrace, "input '" + ev.name + "' at tick " + std::to_string(ev.tick) +
                                              " rejected: " + out.front().value("message", ""));
        }
    }
    advance_to(trace.end_tick);

    ReplayResult result;
    result.trace = session.record();
    // Engine and milestone events are derived, so they must come out of the
    // replay exactly as recorded; otherwise a trace could carry forged
    // grades under a valid hash.
    const auto& replayed = result.trace.events;
    for (std::size_t i = 0; i < std::max(replayed.size(), trace.events.size()); ++i) {
        if (i >= replayed.size() || i >= trace.events.size() ||
            event_line(replayed[i]).dump() != event_line(trace.events[i]).dump()) {
            fail(ErrorCode::CorruptTrace, "replay diverged at event " + std::to_string(i));
        }
    }
    if (result.trace.final_state_hash != trace.final_state_hash) {
        fail(ErrorCode::CorruptTrace, "replay diverged: state hash " + result.trace.final_state_hash +
                                          ", trace recorded " + trace.final_state_hash);
    }
    result.report = evaluate_trace(result.trace);
    return result;
}

}  // namespace survey
