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

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "survey_bench/geodesy.hpp"

namespace survey {

inline constexpr double kStandardGravity = 9.80665;
inline constexpr double kTickSeconds = 0.02;  // 50 Hz, fixed
inline constexpr double kDefaultCaptureRadius = 2.0;

// Kinematic quadrotor constants. Defaults are the engine's; scenarios may
// override any of them except dt.
struct FlightParams {
    double dt = kTickSeconds;
    double gravity = kStandardGravity;
    double tau_attitude = 0.15;                 // s
    double max_climb_accel = 2.0 * kStandardGravity;  // m/s^2 at full throttle
    double max_yaw_rate = 1.5707963267948966;   // rad/s
    double drag = 0.3;                          // 1/s, linear
    double max_tilt = 0.5235987755982988;       // rad, command envelope (30 deg)
    double hover_rpm = 5000.0;
    double battery_per_rev = 1e-5;              // battery fraction per rotor revolution
};

void validate(const FlightParams& params);

struct DroneState {
    WorldPoint position;
    Vec3 velocity;
    double yaw = 0.0;  // rad, counter-clockwise from +x (east)
    double pitch = 0.0;  // rad, positive accelerates forward
    double roll = 0.0;   // rad, positive accelerates to the right
    double rotor_rpm = 0.0;
    double battery = 1.0;
    bool grounded = false;
};

// All axes in [-1, 1]. Throttle 0 holds altitude.
struct ControlInput {
    double throttle = 0.0;
    double pitch_cmd = 0.0;
    double roll_cmd = 0.0;
    double yaw_rate_cmd = 0.0;
};

void validate(const ControlInput& input);

struct FlightStep {
    DroneState state;
    bool touched_down = false;  // airborne -> ground contact this tick
};

// One fixed tick. `terrain` may be null (no ground contact); positions off
// the terrain footprint are not clamped.
FlightStep step_dynamics(const DroneState& state, const ControlInput& input,
                         const FlightParams& params, const Terrain* terrain);

enum class PathId { Path1, Path2 };

std::string_view path_id_name(PathId id);
PathId parse_path_id(std::string_view name);

struct PathSpec {
    PathId id = PathId::Path1;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double heading = 0.0;  // rad, direction of travel at the first waypoint
    double altitude = 30.0;  // absolute z of the centreline
    double capture_radius = kDefaultCaptureRadius;
    // path1
    double length = 100.0;
    // path2
    double radius = 60.0;
    double sweep = 1.5707963267948966;  // rad; positive turns left
    std::size_t count = 0;  // 0 selects 5 for path1, 8 for path2
};

class WaypointPath {
public:
    struct Closest {
        double s = 0.0;  // arc length along the centreline
        WorldPoint point;
        double distance = 0.0;
    };

    PathId id() const { return id_; }
    const std::vector<WorldPoint>& waypoints() const { return waypoints_; }
    double capture_radius() const { return capture_radius_; }
    bool is_arc() const { return arc_.has_value(); }
    double length() const { return length_; }

    // Arc centre and radius, path2 only.
    WorldPoint arc_center() const;
    double arc_radius() const;

    WorldPoint point_at(double s) const;
    Vec3 tangent_at(double s) const;
    Closest closest(const WorldPoint& p) const;

    friend WaypointPath make_path(const PathSpec& spec);

private:
    struct Arc {
        WorldPoint center;
        double radius;
        double start_angle;
        double sweep;
    };

    PathId id_ = PathId::Path1;
    std::vector<WorldPoint> waypoints_;
    std::vector<double> cumulative_;  // straight paths: arc length at each waypoint
    double capture_radius_ = kDefaultCaptureRadius;
    double length_ = 0.0;
    std::optional<Arc> arc_;
};

// path1: `count` (default 5) equally spaced waypoints on a straight segment.
// path2: `count` (default 8) waypoints on a circular arc. Constant altitude.
WaypointPath make_path(const PathSpec& spec);

// Minimum 3-D distance from `position` to the path centreline.
double cross_track_error(const WorldPoint& position, const WaypointPath& path);

struct TrackSample {
    double t = 0.0;
    double cross_track = 0.0;
};

struct TrailRun {
    PathId path_id = PathId::Path1;
    std::vector<TrackSample> samples;
    std::size_t waypoints_hit = 0;
    bool completed = false;
};

// Appends a cross-track sample and captures the next waypoint when inside
// its capture radius. Waypoints are only ever captured in order.
TrailRun update_progress(TrailRun run, const DroneState& state, const WaypointPath& path, double t);

// Mean cross-track error over the run's samples. EmptyRun if none.
double trailing_accuracy(const TrailRun& run);

struct PursuitGains {
    double cruise_speed = 6.0;   // m/s
    double lookahead = 6.0;      // m
    double k_velocity = 1.2;     // 1/s
    double k_altitude = 1.0;     // 1/s^2
    double k_climb_damping = 1.5;  // 1/s
    double k_yaw = 2.0;          // 1/s
};

// Pure-pursuit autopilot: chase a carrot `lookahead` metres ahead of the
// closest centreline point, hold the centreline altitude, face along the
// path tangent.
ControlInput pursuit_control(const DroneState& state, const WaypointPath& path,
                             const FlightParams& params, const PursuitGains& gains = {});

}  // namespace survey
