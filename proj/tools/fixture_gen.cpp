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

// Regenerates everything under fixtures/: terrain, scenarios, recorded
// traces and their golden reports. Output is deterministic; a test re-runs
// this into a scratch directory and diffs against the committed copies.
//
//   fixture_gen <out_dir>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "survey_bench/flight.hpp"
#include "survey_bench/geodesy.hpp"
#include "survey_bench/instrument.hpp"
#include "survey_bench/metrics.hpp"
#include "survey_bench/scenario.hpp"
#include "survey_bench/session.hpp"
#include "survey_bench/trace.hpp"

namespace fs = std::filesystem;
using survey::Json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kHz = survey::kTickRate;

double round_to(double v, double step) { return std::round(v / step) * step; }

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

// --- terrain ---------------------------------------------------------------

constexpr double kOrigin = -150.0;
constexpr double kCell = 5.0;
constexpr std::size_t kNodes = 61;

double raw_height(double x, double y) {
    return 1.8 * std::sin(x / 41.0) + 1.2 * std::cos(y / 33.0) + 0.012 * x - 0.008 * y;
}

// Rolling field whose surface passes close to 100 m at benchmark B.
survey::Terrain make_field(double bx, double by) {
    double offset = 100.0 - raw_height(bx, by);
    std::vector<double> h;
    h.reserve(kNodes * kNodes);
    for (std::size_t r = 0; r < kNodes; ++r) {
        for (std::size_t c = 0; c < kNodes; ++c) {
            double x = kOrigin + kCell * static_cast<double>(c);
            double y = kOrigin + kCell * static_cast<double>(r);
            h.push_back(round_to(raw_height(x, y) + offset, 0.001));
        }
    }
    return survey::Terrain(kOrigin, kOrigin, kCell, kNodes, kNodes, std::move(h));
}

// --- session driving -------------------------------------------------------

std::vector<Json> send(survey::Session& s, Json msg) {
    msg["proto"] = 1;
    auto out = s.apply_message(msg);
    if (!out.empty() && out.front()["type"] == "error") {
        throw std::runtime_error("rejected " + msg.dump() + ": " + out.front().dump());
    }
    return out;
}

void idle(survey::Session& s, std::int64_t ticks) {
    for (std::int64_t i = 0; i < ticks; ++i) send(s, {{"verb", "tick"}});
}

void idle_until(survey::Session& s, std::int64_t tick) {
    if (tick < s.clock()) throw std::runtime_error("schedule runs backwards");
    idle(s, tick - s.clock());
}

// --- leveling trainee ------------------------------------------------------

struct LevelingAttempt {
    double seconds;       // task_start to task_end
    int actions;          // counted interactions
    int sliders;          // of which leg/heading commits
    double error;         // booked relative error of B
    double sign;          // direction of the booking slip
    bool rotate;          // re-orient the tripod first
};

survey::AngularPair base_tilt(const survey::TripodConfig& cfg, const survey::Terrain& terrain) {
    auto setup = survey::setup_tripod(cfg, terrain);
    return survey::base_tilt_from_normal(setup.head_normal);
}

// Legs 1 and 2 that zero the base tilt with leg 0 held, via Newton steps.
std::array<double, 3> rough_level_legs(survey::TripodConfig cfg, const survey::Terrain& terrain) {
    for (int it = 0; it < 20; ++it) {
        auto t0 = base_tilt(cfg, terrain);
        if (std::hypot(t0.u, t0.v) < 1e-12) break;
        constexpr double h = 1e-5;
        survey::TripodConfig c1 = cfg, c2 = cfg;
        c1.leg_lengths[1] += h;
        c2.leg_lengths[2] += h;
        auto t1 = base_tilt(c1, terrain);
        auto t2 = base_tilt(c2, terrain);
        double a = (t1.u - t0.u) / h, b = (t2.u - t0.u) / h;
        double c = (t1.v - t0.v) / h, d = (t2.v - t0.v) / h;
        double det = a * d - b * c;
        cfg.leg_lengths[1] -= (d * t0.u - b * t0.v) / det;
        cfg.leg_lengths[2] -= (-c * t0.u + a * t0.v) / det;
    }
    return cfg.leg_lengths;
}

struct Action {
    Json msg;
};

std::vector<Action> plan_leveling(const survey::Scenario& sc, const LevelingAttempt& a, int index) {
    const auto& ex = *sc.leveling;
    const auto& ins = sc.instrument;
    survey::TripodConfig cfg{ex.station_x, ex.station_y, ins.heading, ins.leg_lengths, ins.splay_radius};
    std::vector<Action> plan;

    int sliders = a.sliders;
    if (a.rotate) {
        double heading = ins.heading / kDeg + 7.0 + 3.0 * index;
        cfg.heading = heading * kDeg;
        plan.push_back({{{"verb", "rotate_tripod"}, {"heading_deg", heading}}});
        --sliders;
    }
    // Leg commits walk each leg toward rough level, overshooting less each
    // pass. The last pass leaves a residual a few tenths of a degree.
    auto target = rough_level_legs(cfg, *sc.terrain);
    std::array<double, 3> legs = cfg.leg_lengths;
    for (int k = 0; k < sliders; ++k) {
        std::size_t leg = static_cast<std::size_t>((k % 2) + 1);
        if (k % 5 == 4) leg = 0;
        double remaining = static_cast<double>(sliders - k);
        double overshoot = (k % 3 == 1 ? -0.35 : 0.25) / remaining;
        double next = legs[leg] + (target[leg] - legs[leg]) * (1.0 + overshoot);
        if (leg == 0) next = legs[0] + 0.004 * ((k % 2) ? -1.0 : 1.0);
        next = round_to(next, 0.001);
        legs[leg] = next;
        plan.push_back({{{"verb", "set_leg_length"}, {"leg", leg}, {"length_m", next}}});
    }
    cfg.leg_lengths = legs;

    // Fine leveling on the tribrach: the exact screw solution split into
    // clicks, with the odd wrong-way click taken back.
    auto tilt = base_tilt(cfg, *sc.terrain);
    auto goal = survey::solve_screws(-tilt.u, -tilt.v, ins.alpha_screw);
    int clicks = a.actions - a.sliders;
    int misdirected = clicks >= 12 ? 2 : (clicks >= 8 ? 1 : 0);
    int productive = clicks - 2 * misdirected;
    std::array<double, 3> want{goal.l, goal.r, goal.b};
    const char* names[3] = {"l", "r", "b"};
    std::array<int, 3> per{productive / 3, productive / 3, productive - 2 * (productive / 3)};
    std::array<double, 3> at{0.0, 0.0, 0.0};
    for (int m = 0; m < misdirected; ++m) {
        std::size_t sidx = static_cast<std::size_t>(m % 3);
        double wrong = want[sidx] >= 0 ? -0.5 : 0.5;
        plan.push_back({{{"verb", "turn_screw"}, {"screw", names[sidx]}, {"delta_mm", wrong}}});
        plan.push_back({{{"verb", "turn_screw"}, {"screw", names[sidx]}, {"delta_mm", -wrong}}});
    }
    for (std::size_t sidx = 0; sidx < 3; ++sidx) {
        for (int c = 0; c < per[sidx]; ++c) {
            double step = c + 1 < per[sidx] ? round_to(want[sidx] / per[sidx], 0.01) : want[sidx] - at[sidx];
            at[sidx] += step;
            plan.push_back({{{"verb", "turn_screw"}, {"screw", names[sidx]}, {"delta_mm", step}}});
        }
    }
    return plan;
}

void run_leveling_attempt(survey::Session& s, const LevelingAttempt& a, int index) {
    const auto& sc = s.scenario();
    const auto& ex = *sc.leveling;
    std::int64_t start = s.clock();
    std::int64_t end = start + static_cast<std::int64_t>(std::llround(a.seconds * kHz));
    send(s, {{"verb", "start_exercise"}, {"exercise", "leveling"}});

    auto plan = plan_leveling(sc, a, index);
    // Set-up takes the first 70% of the attempt; sighting and booking the
    // rest.
    std::int64_t setup_span = (end - start) * 7 / 10;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        idle_until(s, start + 1 + setup_span * static_cast<std::int64_t>(i + 1) /
                                      static_cast<std::int64_t>(plan.size() + 1));
        send(s, plan[i].msg);
    }
    if (!s.level_readout() || !s.level_readout()->level) throw std::runtime_error("trainee failed to level");

    std::int64_t rest = end - (start + setup_span);
    idle_until(s, start + setup_span + rest / 5);
    auto bs_out = send(s, {{"verb", "take_reading"}, {"kind", "backsight"}, {"target", ex.benchmark_a.id}});
    idle_until(s, start + setup_span + 2 * rest / 5);
    send(s, {{"verb", "take_reading"}, {"kind", "foresight"}, {"target", ex.benchmark_b.id}});

    double bs = round_to(bs_out.front()["value_m"].get<double>(), 0.001);
    double truth = ex.benchmark_b.position.z;
    double fs_value = round_to(ex.benchmark_a.position.z + bs - truth * (1.0 + a.sign * a.error), 0.001);
    idle_until(s, start + setup_span + 3 * rest / 5);
    send(s, {{"verb", "book_reading"}, {"kind", "backsight"}, {"target", ex.benchmark_a.id}, {"value_m", bs}});
    idle_until(s, start + setup_span + 4 * rest / 5);
    send(s, {{"verb", "book_reading"}, {"kind", "foresight"}, {"target", ex.benchmark_b.id}, {"value_m", fs_value}});
    idle_until(s, end);
    send(s, {{"verb", "finish_task"}});
}

// --- pilot -----------------------------------------------------------------

struct Pulse {
    double at;        // seconds after task start
    double roll;      // signed stick deflection
    double duration;  // seconds
};

struct FlightAttempt {
    survey::PathId path;
    double cruise;        // m/s
    double hesitation;    // seconds hovering before moving off
    std::vector<Pulse> pulses;
};

// Alternating roll corrections; n pulses give n - 1 reversals.
std::vector<Pulse> corrections(int n, double first_at, double spacing, double amp, double duration) {
    std::vector<Pulse> out;
    for (int i = 0; i < n; ++i) {
        out.push_back({first_at + spacing * i, (i % 2 ? -amp : amp), duration});
    }
    return out;
}

bool clear_of_waypoints(const survey::DroneState& d, const survey::WaypointPath& path, std::size_t hit) {
    const auto& wps = path.waypoints();
    if (hit == 0 || hit >= wps.size()) return false;
    double behind = survey::distance(d.position, wps[hit - 1]);
    double ahead = survey::distance(d.position, wps[hit]);
    return behind > 3.0 && ahead > 8.0;
}

double quant(double v) { return round_to(v, 0.005) + 0.0; }

void run_flight_attempt(survey::Session& s, const FlightAttempt& a) {
    const auto& sc = s.scenario();
    send(s, {{"verb", "start_exercise"}, {"exercise", "flight"}, {"path", std::string(survey::path_id_name(a.path))}});
    std::int64_t start = s.clock();
    survey::PursuitGains gains;
    gains.cruise_speed = a.cruise;
    survey::ControlInput last{};
    bool sent_any = false;
    std::size_t active = 0;
    double pulse_end = -1.0;
    while (s.mode() == survey::Mode::Flight) {
        double t = static_cast<double>(s.clock() - start) / kHz;
        if (t > 600.0) {
            const auto& d = *s.drone();
            throw std::runtime_error("pilot never finished " + std::string(survey::path_id_name(a.path)) +
                                     ": at (" + std::to_string(d.position.x) + ", " +
                                     std::to_string(d.position.y) + ", " + std::to_string(d.position.z) +
                                     ") after " + std::to_string(s.trail()->waypoints_hit) + " waypoints");
        }
        survey::ControlInput in{};
        if (t >= a.hesitation) {
            in = survey::pursuit_control(*s.drone(), *s.active_path(), sc.flight->params, gains);
            // Gentle hands: steady-state stick stays inside the deadband.
            in.throttle = std::clamp(in.throttle, -0.19, 0.19);
            in.pitch_cmd = std::clamp(in.pitch_cmd, -0.19, 0.19);
            in.roll_cmd = std::clamp(in.roll_cmd, -0.19, 0.19);
            in.yaw_rate_cmd = std::clamp(in.yaw_rate_cmd, -0.19, 0.19);
            // Corrections go in mid-leg, never just before a waypoint, so a
            // pulse cannot carry the drone past one.
            if (active < a.pulses.size() && pulse_end < 0.0 && t >= a.pulses[active].at &&
                clear_of_waypoints(*s.drone(), *s.active_path(), s.trail()->waypoints_hit)) {
                pulse_end = t + a.pulses[active].duration;
            }
            if (pulse_end >= 0.0) {
                if (t < pulse_end) {
                    in.roll_cmd = a.pulses[active].roll;
                } else {
                    pulse_end = -1.0;
                    ++active;
                }
            }
        }
        in = {quant(in.throttle), quant(in.pitch_cmd), quant(in.roll_cmd), quant(in.yaw_rate_cmd)};
        bool changed = !sent_any || std::abs(in.throttle - last.throttle) >= 0.02 ||
                       std::abs(in.pitch_cmd - last.pitch_cmd) >= 0.02 ||
                       std::abs(in.roll_cmd - last.roll_cmd) >= 0.02 ||
                       std::abs(in.yaw_rate_cmd - last.yaw_rate_cmd) >= 0.02 ||
                       ((in.roll_cmd == 0.0) != (last.roll_cmd == 0.0));
        if (changed) {
            send(s, {{"verb", "control"},
                     {"throttle", in.throttle},
                     {"pitch", in.pitch_cmd},
                     {"roll", in.roll_cmd},
                     {"yaw_rate", in.yaw_rate_cmd}});
            last = in;
            sent_any = true;
        }
        send(s, {{"verb", "tick"}});
    }
}

// --- scenarios -------------------------------------------------------------

Json leveling_scenario_doc() {
    Json doc;
    doc["format"] = 1;
    doc["id"] = "leveling-field-a";
    doc["seed"] = 20240611;
    doc["terrain"] = {{"file", "../terrain/field.json"}};
    doc["filter"] = {{"alpha", 0.2}, {"deadzone_mps", 0.01}};
    doc["instrument"] = {{"alpha_screw_rad_per_mm", 0.02},
                         {"bubble_radius", 10.0},
                         {"bubble_gain_per_rad", 100.0},
                         {"level_tolerance", 0.02},
                         {"instrument_height_m", 0.25},
                         {"splay_radius_m", 0.6},
                         {"leg_lengths_m", {1.5, 1.5, 1.5}},
                         {"heading_deg", 0.0},
                         {"ground_probe_radius_m", 0.5}};
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: fixture_gen <out_dir>\n");
        return 2;
    }
    try {
        fs::path out(argv[1]);
        constexpr double bx = 24.0, by = -9.0;
        const double ax = -22.0, ay = 6.0;
        survey::Terrain field = make_field(bx, by);
        write_file(out / "terrain/field.json", survey::terrain_to_json_text(field));

        // Leveling: A is a known benchmark, B sits at exactly 100 m so the
        // booked slips land on round millimetres.
        Json lv = leveling_scenario_doc();
        double az = round_to(survey::elevation_at(field, ax, ay) + 0.12, 0.001);
        lv["leveling"] = {{"benchmark_a", {{"id", "BM-A"}, {"position", {ax, ay, az}}}},
                          {"benchmark_b", {{"id", "BM-B"}, {"position", {bx, by, 100.0}}}},
                          {"station", {2.0, 1.0}},
                          {"rod_height_max_m", 4.0},
                          {"noise_sd_m", 0.0015}};
        write_file(out / "scenarios/leveling.json", lv.dump(2) + "\n");

        Json dr;
        dr["format"] = 1;
        dr["id"] = "waypoint-field-a";
        dr["seed"] = 20240612;
        dr["terrain"] = {{"file", "../terrain/field.json"}};
        dr["flight"] = {{"physics",
                         {{"gravity_mps2", 9.80665},
                          {"tau_attitude_s", 0.15},
                          {"max_climb_accel_mps2", 2.0 * 9.80665},
                          {"max_yaw_rate_deg_s", 90.0},
                          {"drag_per_s", 0.3},
                          {"max_tilt_deg", 30.0},
                          {"hover_rpm", 5000.0},
                          {"battery_per_rev", 1e-5}}},
                        {"paths",
                         {{{"id", "path1"},
                           {"origin", {-50.0, -20.0}},
                           {"heading_deg", 0.0},
                           {"altitude_m", 130.0},
                           {"capture_radius_m", 2.0},
                           {"length_m", 100.0}},
                          {{"id", "path2"},
                           {"origin", {-30.0, 40.0}},
                           {"heading_deg", 0.0},
                           {"altitude_m", 130.0},
                           {"capture_radius_m", 2.0},
                           {"radius_m", 60.0},
                           {"sweep_deg", 90.0}}}}};
        write_file(out / "scenarios/drone.json", dr.dump(2) + "\n");

        // Five leveling attempts.
        {
            auto sc = survey::load_scenario_file((out / "scenarios/leveling.json").string());
            survey::Session s(sc);
            const LevelingAttempt attempts[] = {
                {320.0, 30, 9, 0.0040, +1.0, true},
                {300.0, 24, 7, 0.0025, -1.0, false},
                {310.0, 32, 10, 0.0038, +1.0, true},
                {265.0, 20, 6, 0.0012, -1.0, false},
                {275.0, 15, 4, 0.0005, +1.0, false},
            };
            idle(s, 10 * kHz);
            for (int i = 0; i < 5; ++i) {
                run_leveling_attempt(s, attempts[i], i);
                idle(s, 45 * kHz);
            }
            send(s, {{"verb", "exit"}});
            auto trace = s.record();
            write_file(out / "traces/leveling_5attempts.trace", survey::serialize_trace(trace));
            write_file(out / "reports/leveling_5attempts.report.json",
                       survey::emit_report(survey::evaluate_trace(trace)));
        }

        // Five attempts on each path, interleaved.
        {
            auto sc = survey::load_scenario_file((out / "scenarios/drone.json").string());
            survey::Session s(sc);
            using survey::PathId;
            const FlightAttempt attempts[] = {
                {PathId::Path1, 0.86, 6.0, corrections(7, 20.0, 11.0, 0.32, 0.8)},
                {PathId::Path2, 0.74, 9.0, corrections(12, 15.0, 9.0, 0.30, 0.7)},
                {PathId::Path1, 0.88, 4.0, corrections(8, 18.0, 12.0, 0.40, 1.2)},
                {PathId::Path2, 0.92, 5.0, corrections(9, 15.0, 10.0, 0.28, 0.6)},
                {PathId::Path1, 0.90, 4.0, corrections(7, 22.0, 13.0, 0.30, 0.8)},
                {PathId::Path2, 0.84, 5.0, corrections(13, 12.0, 8.0, 0.45, 1.3)},
                {PathId::Path1, 0.90, 3.0, corrections(6, 18.0, 14.0, 0.26, 0.7)},
                {PathId::Path2, 0.86, 4.0, corrections(10, 14.0, 10.0, 0.36, 1.0)},
                {PathId::Path1, 0.91, 3.0, corrections(7, 14.0, 12.0, 0.24, 0.5)},
                {PathId::Path2, 0.85, 4.0, corrections(10, 14.0, 10.0, 0.34, 0.9)},
            };
            idle(s, 5 * kHz);
            for (const auto& a : attempts) {
                run_flight_attempt(s, a);
                idle(s, 20 * kHz);
            }
            send(s, {{"verb", "exit"}});
            auto trace = s.record();
            write_file(out / "traces/drone_5attempts.trace", survey::serialize_trace(trace));
            write_file(out / "reports/drone_5attempts.report.json",
                       survey::emit_report(survey::evaluate_trace(trace)));
            std::fputs(survey::render_report_text(survey::evaluate_trace(trace)).c_str(), stderr);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fixture_gen: %s\n", e.what());
        return 1;
    }
    return 0;
}
