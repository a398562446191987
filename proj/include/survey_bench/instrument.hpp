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

#include "survey_bench/geodesy.hpp"

namespace survey {

// Tripod, circular level and tribrach. Angles are radians, screw travel is
// millimetres, bubble offsets are level-circle units.

inline constexpr double kMinLegLength = 0.6;
inline constexpr double kMaxLegLength = 1.8;
// Radius of the leg hinges on the tripod head.
inline constexpr double kHeadHingeRadius = 0.08;
inline constexpr double kScrewTravelLimit = 10.0;
inline constexpr double kDefaultScrewAlpha = 0.02;  // rad per mm
inline constexpr double kSmallAngleLimit = 0.7853981633974483;  // pi/4
inline constexpr double kDegenerateNormal = 1e-9;

struct TripodConfig {
    double center_x = 0.0;
    double center_y = 0.0;
    double heading = 0.0;
    std::array<double, 3> leg_lengths{1.5, 1.5, 1.5};
    double splay_radius = 0.6;
};

struct ContactSet {
    std::array<WorldPoint, 3> object_points;
    std::array<WorldPoint, 3> ground_points;
};

// Everything produced by standing the tripod on the terrain.
struct TripodSetup {
    ContactSet contacts;
    std::array<WorldPoint, 3> hinge_points;
    WorldPoint head_center;
    Vec3 head_normal;  // unit, z > 0
};

struct TiltState {
    double u_base = 0.0;  // from terrain and legs
    double v_base = 0.0;
    double u_adj = 0.0;  // from the tribrach screws
    double v_adj = 0.0;

    double u() const { return u_base + u_adj; }
    double v() const { return v_base + v_adj; }
};

struct BubbleState {
    double dx = 0.0;
    double dy = 0.0;
    double r = 10.0;
};

struct ScrewState {
    double l = 0.0;
    double r = 0.0;
    double b = 0.0;
    double alpha_screw = kDefaultScrewAlpha;
};

struct BubbleCalibration {
    double radius = 10.0;
    double gain = 100.0;  // units per radian
    double level_tolerance = 0.02;  // fraction of radius
};

struct AngularPair {
    double u = 0.0;
    double v = 0.0;
};

struct AxisAlignment {
    double x = 0.0;
    double z = 0.0;
};

struct BubbleAngles {
    double theta_x = 0.0;
    double theta_y = 0.0;
};

void validate(const TripodConfig& config);

// Feet at 120 degree spacing around the centre, rotated by heading. Ground
// points sample the terrain; object points are where the tripod model puts
// its feet given the head tilt, so their centroid drifts from the ground
// centroid by the plumb offset of a tilted head.
TripodSetup setup_tripod(const TripodConfig& config, const Terrain& terrain);
ContactSet drop_tripod(const TripodConfig& config, const Terrain& terrain);

WorldPoint centroid(const std::array<WorldPoint, 3>& points);

// Distance between the object-point and ground-point centroids.
double misalignment_distance(const ContactSet& contacts);

// (b - a) x (c - a); DegenerateTriangle when shorter than 1e-9.
Vec3 plane_normal(const WorldPoint& a, const WorldPoint& b, const WorldPoint& c);

// Population standard deviation of the z components.
double height_stddev(const std::array<WorldPoint, 3>& points);

AngularPair base_tilt_from_normal(const Vec3& normal);

// X = u*sqrt(1 - v^2/2), Z = v*sqrt(1 - u^2/2). SmallAngleViolation once
// |u| or |v| reaches pi/4.
AxisAlignment instrument_axis(const TiltState& tilt);

BubbleState bubble_from_axis(const AxisAlignment& axis, double r, double gain);
BubbleAngles bubble_angles(const BubbleState& bubble);

AngularPair screw_correction(const ScrewState& screws);
AngularPair screw_increment(double dl, double dr, double db, double alpha_screw);

// Minimal-norm screw travel (l + r + b = 0) producing the requested
// corrections. OutOfRange when any screw would exceed +/-10 mm.
ScrewState solve_screws(double u_target, double v_target, double alpha_screw);

bool is_level(const BubbleState& bubble, double tol_fraction);

// Full instrument readout used by the session and the HUD.
struct LevelReadout {
    TiltState tilt;
    AxisAlignment axis;
    BubbleState bubble;
    bool level = false;
};

LevelReadout read_level(const TripodSetup& setup, const ScrewState& screws,
                        const BubbleCalibration& calibration);

}  // namespace survey
