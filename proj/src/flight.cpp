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

#include "survey_bench/flight.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace survey {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool in_unit_range(double v) { return v >= -1.0 && v <= 1.0; }

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

// Closest point on segment [a, b].
WorldPoint closest_on_segment(const WorldPoint& p, const WorldPoint& a, const WorldPoint& b,
                              double* fraction) {
    Vec3 ab = b - a;
    double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    *fraction = t;
    return a + ab * t;
}

}  // namespace

void validate(const FlightParams& p) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (p.dt != kTickSeconds) fail(ErrorCode::InvalidConfig, "flight dt is fixed at 0.02 s");
    if (!positive(p.gravity) || !positive(p.tau_attitude) || !positive(p.max_climb_accel) ||
        !positive(p.max_yaw_rate) || !positive(p.max_tilt) || !positive(p.hover_rpm)) {
        fail(ErrorCode::InvalidConfig, "flight constants must be positive");
    }
    if (p.max_tilt > 0.5235987755982988 + 1e-12) {
        fail(ErrorCode::InvalidConfig, "max_tilt may not exceed 30 degrees");
    }
    if (!(p.drag >= 0.0) || !(p.battery_per_rev >= 0.0)) {
        fail(ErrorCode::InvalidConfig, "drag and battery_per_rev must be >= 0");
    }
}

void validate(const ControlInput& in) {
    if (!in_unit_range(in.throttle) || !in_unit_range(in.pitch_cmd) || !in_unit_range(in.roll_cmd) ||
        !in_unit_range(in.yaw_rate_cmd)) {
        fail(ErrorCode::InvalidArgument, "control axes must lie in [-1, 1]");
    }
}

FlightStep step_dynamics(const DroneState& state, const ControlInput& input,
                         const FlightParams& params, const Terrain* terrain) {
    validate(input);
    const double dt = params.dt;
    FlightStep out{state, false};
    DroneState& s = out.state;

    const bool powered = state.battery > 0.0;
    s.rotor_rpm = powered ? params.hover_rpm * (1.0 + input.throttle) : 0.0;

    double blend = 1.0 - std::exp(-dt / params.tau_attitude);
    s.pitch += (input.pitch_cmd * params.max_tilt - s.pitch) * blend;
    s.roll += (input.roll_cmd * params.max_tilt - s.roll) * blend;
    s.yaw = wrap_angle(s.yaw + input.yaw_rate_cmd * params.max_yaw_rate * dt);

    Vec3 accel;
    if (powered) {
        double forward = params.gravity * std::tan(s.pitch);
        double right = params.gravity * std::tan(s.roll);
        double cy = std::cos(s.yaw), sy = std::sin(s.yaw);
        accel.x = forward * cy + right * sy;
        accel.y = forward * sy - right * cy;
        accel.z = input.throttle * params.max_climb_accel;
    } else {
        accel.z = -params.gravity;
    }
    accel -= s.velocity * params.drag;

    s.velocity += accel * dt;
    s.position += s.velocity * dt;

    s.battery = std::max(0.0, s.battery - params.battery_per_rev * s.rotor_rpm * dt / 60.0);

    if (terrain != nullptr && terrain->contains(s.position.x, s.position.y)) {
        double ground = elevation_at(*terrain, s.position.x, s.position.y);
        if (s.position.z <= ground && s.velocity.z <= 0.0) {
            out.touched_down = !state.grounded;
            s.position.z = ground;
            s.velocity = {};
            s.grounded = true;
        } else {
            s.grounded = false;
        }
    } else {
        s.grounded = false;
    }
    return out;
}

std::string_view path_id_name(PathId id) { return id == PathId::Path1 ? "path1" : "path2"; }

PathId parse_path_id(std::string_view name) {
    if (name == "path1") return PathId::Path1;
    if (name == "path2") return PathId::Path2;
    fail(ErrorCode::InvalidArgument, "path id must be 'path1' or 'path2'");
}

WaypointPath make_path(const PathSpec& spec) {
    if (!(spec.capture_radius > 0.0)) fail(ErrorCode::InvalidConfig, "capture_radius must be > 0");
    if (!std::isfinite(spec.origin_x) || !std::isfinite(spec.origin_y) ||
        !std::isfinite(spec.heading) || !std::isfinite(spec.altitude)) {
        fail(ErrorCode::InvalidConfig, "path origin, heading and altitude must be finite");
    }
    WaypointPath path;
    path.id_ = spec.id;
    path.capture_radius_ = spec.capture_radius;
    const double hx = std::cos(spec.heading), hy = std::sin(spec.heading);

    if (spec.id == PathId::Path1) {
        std::size_t count = spec.count == 0 ? 5 : spec.count;
        if (count < 2) fail(ErrorCode::InvalidConfig, "a path needs at least 2 waypoints");
        if (!(spec.length > 0.0)) fail(ErrorCode::InvalidConfig, "path1 length must be > 0");
        for (std::size_t k = 0; k < count; ++k) {
            double d = spec.length * static_cast<double>(k) / static_cast<double>(count - 1);
            path.waypoints_.push_back({spec.origin_x + d * hx, spec.origin_y + d * hy, spec.altitude});
        }
        path.cumulative_.push_back(0.0);
        for (std::size_t k = 1; k < count; ++k) {
            path.cumulative_.push_back(path.cumulative_.back() +
                                       distance(path.waypoints_[k - 1], path.waypoints_[k]));
        }
        path.length_ = path.cumulative_.back();
    } else {
        std::size_t count = spec.count == 0 ? 8 : spec.count;
        if (count < 2) fail(ErrorCode::InvalidConfig, "a path needs at least 2 waypoints");
        if (!(spec.radius > 0.0)) fail(ErrorCode::InvalidConfig, "path2 radius must be > 0");
        if (!(std::abs(spec.sweep) > 0.0 && std::abs(spec.sweep) < kTwoPi)) {
            fail(ErrorCode::InvalidConfig, "path2 sweep must be non-zero and under a full turn");
        }
        double side = spec.sweep > 0.0 ? 1.0 : -1.0;  // left turn: centre on the left
        WaypointPath::Arc arc;
        arc.radius = spec.radius;
        arc.center = {spec.origin_x - side * spec.radius * hy, spec.origin_y + side * spec.radius * hx,
                      spec.altitude};
        arc.start_angle = std::atan2(spec.origin_y - arc.center.y, spec.origin_x - arc.center.x);
        arc.sweep = spec.sweep;
        for (std::size_t k = 0; k < count; ++k) {
            double a = arc.start_angle +
                       arc.sweep * static_cast<double>(k) / static_cast<double>(count - 1);
            path.waypoints_.push_back({arc.center.x + arc.radius * std::cos(a),
                                       arc.center.y + arc.radius * std::sin(a), spec.altitude});
        }
        path.length_ = arc.radius * std::abs(arc.sweep);
        path.arc_ = arc;
    }
    for (std::size_t k = 1; k < path.waypoints_.size(); ++k) {
        if (path.waypoints_[k] == path.waypoints_[k - 1]) {
            fail(ErrorCode::InvalidConfig, "consecutive waypoints must be distinct");
        }
    }
    return path;
}

WorldPoint WaypointPath::arc_center() const {
    if (!arc_) fail(ErrorCode::InvalidArgument, "path1 has no arc centre");
    return arc_->center;
}

double WaypointPath::arc_radius() const {
    if (!arc_) fail(ErrorCode::InvalidArgument, "path1 has no arc radius");
    return arc_->radius;
}

WorldPoint WaypointPath::point_at(double s) const {
    s = std::clamp(s, 0.0, length_);
    if (arc_) {
        double a = arc_->start_angle + std::copysign(s / arc_->radius, arc_->sweep);
        return {arc_->center.x + arc_->radius * std::cos(a), arc_->center.y + arc_->radius * std::sin(a),
                arc_->center.z};
    }
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t seg = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0)),
        waypoints_.size() - 2);
    double seg_len = cumulative_[seg + 1] - cumulative_[seg];
    double f = (s - cumulative_[seg]) / seg_len;
    return waypoints_[seg] + (waypoints_[seg + 1] - waypoints_[seg]) * f;
}

Vec3 WaypointPath::tangent_at(double s) const {
    s = std::clamp(s, 0.0, length_);
    if (arc_) {
        double a = arc_->start_angle + std::copysign(s / arc_->radius, arc_->sweep);
        double dir = arc_->sweep > 0.0 ? 1.0 : -1.0;
        return {-std::sin(a) * dir, std::cos(a) * dir, 0.0};
    }
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t seg = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0)),
        waypoints_.size() - 2);
    Vec3 d = waypoints_[seg + 1] - waypoints_[seg];
    return d * (1.0 / norm(d));
}

WaypointPath::Closest WaypointPath::closest(const WorldPoint& p) const {
    Closest best;
    if (arc_) {
        double wx = p.x - arc_->center.x, wy = p.y - arc_->center.y;
        double rho = std::hypot(wx, wy);
        double rel = 0.0;
        bool inside = false;
        if (rho > 0.0) {
            double ang = std::atan2(wy, wx);
            // Angle travelled from the start in the sweep direction, in [0, 2pi).
            rel = std::fmod((ang - arc_->start_angle) * (arc_->sweep > 0.0 ? 1.0 : -1.0), kTwoPi);
            if (rel < 0.0) rel += kTwoPi;
            inside = rel <= std::abs(arc_->sweep);
        } else {
            inside = true;  // every arc point is equidistant
        }
        if (inside) {
            best.s = arc_->radius * rel;
            best.point = point_at(best.s);
            best.distance = std::hypot(rho - arc_->radius, p.z - arc_->center.z);
            return best;
        }
        double d0 = distance(p, waypoints_.front());
        double d1 = distance(p, waypoints_.back());
        if (d0 <= d1) {
            best = {0.0, waypoints_.front(), d0};
        } else {
            best = {length_, waypoints_.back(), d1};
        }
        return best;
    }
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < waypoints_.size(); ++k) {
        double f = 0.0;
        WorldPoint q = closest_on_segment(p, waypoints_[k], waypoints_[k + 1], &f);
        double d = distance(p, q);
        if (d < best.distance) {
            best.distance = d;
            best.point = q;
            best.s = cumulative_[k] + f * (cumulative_[k + 1] - cumulative_[k]);
        }
    }
    return best;
}

double cross_track_error(const WorldPoint& position, const WaypointPath& path) {
    return path.closest(position).distance;
}

TrailRun update_progress(TrailRun run, const DroneState& state, const WaypointPath& path, double t) {
    if (run.completed) return run;
    if (!run.samples.empty() && t < run.samples.back().t) {
        fail(ErrorCode::NonMonotoneTime, "trail samples must be time-ordered");
    }
    run.samples.push_back({t, cross_track_error(state.position, path)});
    const auto& wps = path.waypoints();
    if (run.waypoints_hit < wps.size() &&
        distance(state.position, wps[run.waypoints_hit]) <= path.capture_radius()) {
        ++run.waypoints_hit;
        run.completed = run.waypoints_hit == wps.size();
    }
    return run;
}

double trailing_accuracy(const TrailRun& run) {
    if (run.samples.empty()) fail(ErrorCode::EmptyRun, "trail run has no samples");
    double sum = 0.0;
    for (const auto& s : run.samples) sum += s.cross_track;
    return sum / static_cast<double>(run.samples.size());
}

ControlInput pursuit_control(const DroneState& state, const WaypointPath& path,
                             const FlightParams& params, const PursuitGains& gains) {
    auto here = path.closest(state.position);
    WorldPoint carrot = path.point_at(here.s + gains.lookahead);

    Vec3 to_carrot = carrot - state.position;
    to_carrot.z = 0.0;
    double dist = norm(to_carrot);
    Vec3 v_des = dist > 1e-9 ? to_carrot * (gains.cruise_speed / dist) : Vec3{};

    Vec3 v_h{state.velocity.x, state.velocity.y, 0.0};
    Vec3 a_des = (v_des - v_h) * gains.k_velocity + v_des * params.drag;

    double cy = std::cos(state.yaw), sy = std::sin(state.yaw);
    double a_forward = a_des.x * cy + a_des.y * sy;
    double a_right = a_des.x * sy - a_des.y * cy;

    ControlInput in;
    in.pitch_cmd = std::clamp(std::atan(a_forward / params.gravity) / params.max_tilt, -1.0, 1.0);
    in.roll_cmd = std::clamp(std::atan(a_right / params.gravity) / params.max_tilt, -1.0, 1.0);

    Vec3 tangent = path.tangent_at(here.s);
    double yaw_err = wrap_angle(std::atan2(tangent.y, tangent.x) - state.yaw);
    in.yaw_rate_cmd = std::clamp(gains.k_yaw * yaw_err / params.max_yaw_rate, -1.0, 1.0);

    double a_z = gains.k_altitude * (here.point.z - state.position.z) -
                 gains.k_climb_damping * state.velocity.z;
    in.throttle = std::clamp(a_z / params.max_climb_accel, -1.0, 1.0);
    return in;
}

}  // namespace survey
