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

#include "survey_bench/instrument.hpp"

#include <numbers>
#include <string>

namespace survey {

namespace {

// Rotation carrying +z onto the unit vector n (Rodrigues).
Vec3 rotate_z_onto(const Vec3& n, const Vec3& v) {
    Vec3 axis = cross(Vec3{0, 0, 1}, n);
    double s = norm(axis);
    if (s == 0.0) return v;
    axis *= 1.0 / s;
    double c = n.z;
    return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

}  // namespace

void validate(const TripodConfig& config) {
    if (!std::isfinite(config.center_x) || !std::isfinite(config.center_y) ||
        !std::isfinite(config.heading)) {
        fail(ErrorCode::InvalidConfig, "tripod position and heading must be finite");
    }
    for (double len : config.leg_lengths) {
        if (!(len >= kMinLegLength && len <= kMaxLegLength)) {
            fail(ErrorCode::InvalidConfig, "leg length " + std::to_string(len) + " m outside [" +
                                               std::to_string(kMinLegLength) + ", " +
                                               std::to_string(kMaxLegLength) + "]");
        }
    }
    if (!(config.splay_radius > kHeadHingeRadius) || !std::isfinite(config.splay_radius)) {
        fail(ErrorCode::InvalidConfig, "splay radius must exceed the head hinge radius");
    }
    if (config.splay_radius - kHeadHingeRadius >= kMinLegLength) {
        fail(ErrorCode::InvalidConfig, "splay radius too wide for the shortest leg");
    }
}

TripodSetup setup_tripod(const TripodConfig& config, const Terrain& terrain) {
    validate(config);
    const double reach = config.splay_radius - kHeadHingeRadius;

    TripodSetup out;
    // Leg tops taken over the feet: the rigid head sits parallel to the plane
    // through them, so equal legs on a planar slope tilt it by the slope.
    std::array<WorldPoint, 3> tops;
    std::array<Vec3, 3> hinge_local;
    for (int i = 0; i < 3; ++i) {
        double a = config.heading + 2.0 * std::numbers::pi * i / 3.0;
        double c = std::cos(a), s = std::sin(a);
        double fx = config.center_x + config.splay_radius * c;
        double fy = config.center_y + config.splay_radius * s;
        out.contacts.ground_points[i] = {fx, fy, elevation_at(terrain, fx, fy)};
        double len = config.leg_lengths[i];
        double rise = std::sqrt(len * len - reach * reach);
        tops[i] = {fx, fy, out.contacts.ground_points[i].z + rise};
        hinge_local[i] = {kHeadHingeRadius * c, kHeadHingeRadius * s, 0.0};
    }
    out.head_center = centroid(tops);

    Vec3 n = plane_normal(tops[0], tops[1], tops[2]);
    if (n.z < 0) n = -n;
    out.head_normal = n * (1.0 / norm(n));
    for (int i = 0; i < 3; ++i) {
        out.hinge_points[i] = out.head_center + rotate_z_onto(out.head_normal, hinge_local[i]);
    }

    double drop = out.head_center.z - centroid(out.contacts.ground_points).z;
    for (int i = 0; i < 3; ++i) {
        const WorldPoint& g = out.contacts.ground_points[i];
        Vec3 local{g.x - config.center_x, g.y - config.center_y, -drop};
        out.contacts.object_points[i] = out.head_center + rotate_z_onto(out.head_normal, local);
    }
    return out;
}

ContactSet drop_tripod(const TripodConfig& config, const Terrain& terrain) {
    return setup_tripod(config, terrain).contacts;
}

WorldPoint centroid(const std::array<WorldPoint, 3>& points) {
    constexpr double n = 3.0;
    return {(points[0].x + points[1].x + points[2].x) / n,
            (points[0].y + points[1].y + points[2].y) / n,
            (points[0].z + points[1].z + points[2].z) / n};
}

double misalignment_distance(const ContactSet& contacts) {
    return distance(centroid(contacts.object_points), centroid(contacts.ground_points));
}

Vec3 plane_normal(const WorldPoint& a, const WorldPoint& b, const WorldPoint& c) {
    Vec3 n = cross(b - a, c - a);
    if (!(norm(n) >= kDegenerateNormal)) {
        fail(ErrorCode::DegenerateTriangle, "points are collinear (|n| < 1e-9)");
    }
    return n;
}

double height_stddev(const std::array<WorldPoint, 3>& points) {
    double mean = (points[0].z + points[1].z + points[2].z) / 3.0;
    double ss = 0.0;
    for (const auto& p : points) ss += (p.z - mean) * (p.z - mean);
    return std::sqrt(ss / 3.0);
}

AngularPair base_tilt_from_normal(const Vec3& normal) {
    if (!(normal.z > 0.0)) fail(ErrorCode::InvertedNormal, "surface normal must point up");
    return {std::atan2(normal.x, normal.z), std::atan2(normal.y, normal.z)};
}

AxisAlignment instrument_axis(const TiltState& tilt) {
    double u = tilt.u(), v = tilt.v();
    if (!(std::abs(u) < kSmallAngleLimit && std::abs(v) < kSmallAngleLimit)) {
        fail(ErrorCode::SmallAngleViolation, "tilt (" + std::to_string(u) + ", " +
                                                 std::to_string(v) + ") rad beyond pi/4");
    }
    return {u * std::sqrt(1.0 - v * v / 2.0), v * std::sqrt(1.0 - u * u / 2.0)};
}

BubbleState bubble_from_axis(const AxisAlignment& axis, double r, double gain) {
    if (!(r > 0.0) || !(gain > 0.0)) fail(ErrorCode::InvalidArgument, "bubble radius and gain must be > 0");
    BubbleState b{gain * axis.x, gain * axis.z, r};
    double off = std::hypot(b.dx, b.dy);
    if (off > r) {
        b.dx *= r / off;
        b.dy *= r / off;
    }
    return b;
}

BubbleAngles bubble_angles(const BubbleState& bubble) {
    if (!(bubble.r > 0.0)) fail(ErrorCode::InvalidArgument, "bubble radius must be > 0");
    return {std::atan(bubble.dx / bubble.r), std::atan(bubble.dy / bubble.r)};
}

AngularPair screw_correction(const ScrewState& s) {
    return {s.alpha_screw * (s.l / 2.0 - s.r / 2.0), s.alpha_screw * (s.b - (s.l / 2.0 + s.r / 2.0))};
}

AngularPair screw_increment(double dl, double dr, double db, double alpha_screw) {
    return {alpha_screw * (dl - dr) / 2.0, alpha_screw * (db - (dl + dr) / 2.0)};
}

ScrewState solve_screws(double u_target, double v_target, double alpha_screw) {
    if (!(alpha_screw > 0.0)) fail(ErrorCode::InvalidArgument, "alpha_screw must be > 0");
    // u = a(l - r)/2, v = a(b - (l + r)/2), l + r + b = 0.
    double diff = 2.0 * u_target / alpha_screw;          // l - r
    double sum = -2.0 * v_target / (3.0 * alpha_screw);  // l + r
    ScrewState s{(sum + diff) / 2.0, (sum - diff) / 2.0, -sum, alpha_screw};
    for (double travel : {s.l, s.r, s.b}) {
        if (!(std::abs(travel) <= kScrewTravelLimit)) {
            fail(ErrorCode::OutOfRange, "correction needs " + std::to_string(travel) +
                                            " mm of screw travel");
        }
    }
    return s;
}

bool is_level(const BubbleState& bubble, double tol_fraction) {
    if (!(tol_fraction > 0.0 && tol_fraction < 1.0)) {
        fail(ErrorCode::InvalidArgument, "level tolerance must be in (0, 1)");
    }
    return std::hypot(bubble.dx, bubble.dy) <= tol_fraction * bubble.r;
}

LevelReadout read_level(const TripodSetup& setup, const ScrewState& screws,
                        const BubbleCalibration& calibration) {
    LevelReadout out;
    AngularPair base = base_tilt_from_normal(setup.head_normal);
    AngularPair adj = screw_correction(screws);
    out.tilt = {base.u, base.v, adj.u, adj.v};
    out.axis = instrument_axis(out.tilt);
    out.bubble = bubble_from_axis(out.axis, calibration.radius, calibration.gain);
    out.level = is_level(out.bubble, calibration.level_tolerance);
    return out;
}

}  // namespace survey
