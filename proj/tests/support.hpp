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

// Shared helpers for the unit and property tests: seeded generators and
// small terrain builders.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "survey_bench/geodesy.hpp"

#ifndef SURVEY_FIXTURE_DIR
#error "SURVEY_FIXTURE_DIR must point at fixtures/"
#endif

namespace testing_support {

inline std::string fixture(const std::string& rel) { return std::string(SURVEY_FIXTURE_DIR) + "/" + rel; }

// Hand-rolled property-test generator. Every property uses its own seed so
// failures reproduce from the test name alone.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
    }
    int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin() { return (rng_() & 1) != 0; }
    double normal() {
        double u1 = 1.0 - uniform(0.0, 1.0);
        double u2 = uniform(0.0, 1.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    survey::Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Planar terrain z = z0 + gx*x + gy*y sampled on a grid.
inline survey::Terrain planar_terrain(double z0, double gx, double gy, double origin = -50.0,
                                      double cell = 1.0, std::size_t nodes = 101) {
    std::vector<double> h;
    h.reserve(nodes * nodes);
    for (std::size_t r = 0; r < nodes; ++r) {
        for (std::size_t c = 0; c < nodes; ++c) {
            double x = origin + cell * static_cast<double>(c);
            double y = origin + cell * static_cast<double>(r);
            h.push_back(z0 + gx * x + gy * y);
        }
    }
    return survey::Terrain(origin, origin, cell, nodes, nodes, std::move(h));
}

// Random smooth-ish terrain for property tests.
inline survey::Terrain random_terrain(Gen& g, double origin = -50.0, double cell = 2.0, std::size_t nodes = 51) {
    double a = g.uniform(-2.0, 2.0), b = g.uniform(-2.0, 2.0);
    double kx = g.uniform(10.0, 40.0), ky = g.uniform(10.0, 40.0);
    double sx = g.uniform(-0.05, 0.05), sy = g.uniform(-0.05, 0.05);
    double base = g.uniform(50.0, 150.0);
    std::vector<double> h;
    h.reserve(nodes * nodes);
    for (std::size_t r = 0; r < nodes; ++r) {
        for (std::size_t c = 0; c < nodes; ++c) {
            double x = origin + cell * static_cast<double>(c);
            double y = origin + cell * static_cast<double>(r);
            h.push_back(base + a * std::sin(x / kx) + b * std::cos(y / ky) + sx * x + sy * y);
        }
    }
    return survey::Terrain(origin, origin, cell, nodes, nodes, std::move(h));
}

}  // namespace testing_support
