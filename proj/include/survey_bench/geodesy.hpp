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

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "survey_bench/error.hpp"

namespace survey {

// Plain 3-vector in meters (or meters/second where noted). x east, y north,
// z up.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

using WorldPoint = Vec3;

struct Benchmark {
    std::string id;
    WorldPoint position;
    bool elevation_known = false;
};

// Regular-grid heightfield. Row r lies at y = origin_y + r * cell_size and
// column c at x = origin_x + c * cell_size; heights are stored row-major.
// Immutable after construction.
class Terrain {
public:
    Terrain(double origin_x, double origin_y, double cell_size, std::size_t n_rows,
            std::size_t n_cols, std::vector<double> heights);

    // Uniform-height grid covering [x0, x0 + (n_cols-1)*cs] x [y0, ...].
    static Terrain flat(double origin_x, double origin_y, double cell_size,
                        std::size_t n_rows, std::size_t n_cols, double height);

    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }
    double cell_size() const { return cell_size_; }
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    const std::vector<double>& heights() const { return heights_; }

    double height(std::size_t row, std::size_t col) const { return heights_[row * n_cols_ + col]; }
    double node_x(std::size_t col) const { return origin_x_ + static_cast<double>(col) * cell_size_; }
    double node_y(std::size_t row) const { return origin_y_ + static_cast<double>(row) * cell_size_; }

    double max_x() const { return node_x(n_cols_ - 1); }
    double max_y() const { return node_y(n_rows_ - 1); }

    bool contains(double x, double y) const;

private:
    double origin_x_;
    double origin_y_;
    double cell_size_;
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<double> heights_;
};

// Bilinear interpolation of the four surrounding grid nodes. Exact (bitwise)
// at nodes. Throws OutOfBounds outside the grid footprint.
double elevation_at(const Terrain& terrain, double x, double y);

struct SurfacePlane {
    Vec3 normal;  // unit length, normal.z > 0
    double mean_elevation = 0.0;
};

// Least-squares plane z = a + b*dx + c*dy over a fixed polar sampling of the
// disc of the given radius around (x, y). The whole disc must lie inside the
// terrain.
SurfacePlane surface_plane_at(const Terrain& terrain, double x, double y, double radius);

// Terrain document, `format: 1`. Layout in README.md.
Terrain terrain_from_json_text(const std::string& text);
Terrain load_terrain_file(const std::string& path);
std::string terrain_to_json_text(const Terrain& terrain);

}  // namespace survey
