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

#include "survey_bench/geodesy.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "json_io.hpp"

namespace survey {

namespace {

// Grid coordinates within this many cells of an integer are treated as lying
// on the node, so node positions computed as origin + k*cell hit the stored
// height exactly even when cell_size is not a dyadic fraction.
constexpr double kNodeSnap = 1e-9;

double to_grid(double coord, double origin, double cell) {
    double g = (coord - origin) / cell;
    double r = std::round(g);
    return std::abs(g - r) <= kNodeSnap ? r : g;
}

// a + t*(b - a) is exact for a == b and for t == 0; t == 1 is special-cased.
double lerp_exact(double a, double b, double t) {
    if (t == 1.0) return b;
    return a + t * (b - a);
}

std::string point_str(double x, double y) {
    std::ostringstream os;
    os << "(" << x << ", " << y << ")";
    return os.str();
}

}  // namespace

Terrain::Terrain(double origin_x, double origin_y, double cell_size, std::size_t n_rows,
                 std::size_t n_cols, std::vector<double> heights)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      n_rows_(n_rows),
      n_cols_(n_cols),
      heights_(std::move(heights)) {
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
        fail(ErrorCode::InvalidArgument, "terrain origin must be finite");
    }
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        fail(ErrorCode::InvalidArgument, "terrain cell_size must be > 0");
    }
    if (n_rows < 2 || n_cols < 2) {
        fail(ErrorCode::InvalidArgument, "terrain needs at least 2 rows and 2 columns");
    }
    if (heights_.size() != n_rows * n_cols) {
        fail(ErrorCode::InvalidArgument, "terrain has " + std::to_string(heights_.size()) +
                                             " heights, expected " +
                                             std::to_string(n_rows * n_cols));
    }
    if (!std::all_of(heights_.begin(), heights_.end(), [](double h) { return std::isfinite(h); })) {
        fail(ErrorCode::InvalidArgument, "terrain heights must be finite");
    }
}

Terrain Terrain::flat(double origin_x, double origin_y, double cell_size, std::size_t n_rows,
                      std::size_t n_cols, double height) {
    return Terrain(origin_x, origin_y, cell_size, n_rows, n_cols,
                   std::vector<double>(n_rows * n_cols, height));
}

bool Terrain::contains(double x, double y) const {
    double gx = to_grid(x, origin_x_, cell_size_);
    double gy = to_grid(y, origin_y_, cell_size_);
    return gx >= 0.0 && gy >= 0.0 && gx <= static_cast<double>(n_cols_ - 1) &&
           gy <= static_cast<double>(n_rows_ - 1);
}

double elevation_at(const Terrain& terrain, double x, double y) {
    double gx = to_grid(x, terrain.origin_x(), terrain.cell_size());
    double gy = to_grid(y, terrain.origin_y(), terrain.cell_size());
    // Written so NaN fails the test too.
    if (!(gx >= 0.0 && gy >= 0.0 && gx <= static_cast<double>(terrain.n_cols() - 1) &&
          gy <= static_cast<double>(terrain.n_rows() - 1))) {
        fail(ErrorCode::OutOfBounds, "elevation query " + point_str(x, y) + " outside terrain");
    }
    auto col = std::min(static_cast<std::size_t>(gx), terrain.n_cols() - 2);
    auto row = std::min(static_cast<std::size_t>(gy), terrain.n_rows() - 2);
    double fx = gx - static_cast<double>(col);
    double fy = gy - static_cast<double>(row);

    double south = lerp_exact(terrain.height(row, col), terrain.height(row, col + 1), fx);
    if (fy == 0.0) return south;
    double north = lerp_exact(terrain.height(row + 1, col), terrain.height(row + 1, col + 1), fx);
    return lerp_exact(south, north, fy);
}

SurfacePlane surface_plane_at(const Terrain& terrain, double x, double y, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        fail(ErrorCode::InvalidArgument, "probe radius must be > 0");
    }
    if (!terrain.contains(x - radius, y - radius) || !terrain.contains(x + radius, y + radius)) {
        fail(ErrorCode::OutOfBounds, "probe disc at " + point_str(x, y) + " leaves the terrain");
    }

    // Centre plus four rings; ring k carries 8k samples.
    constexpr int kRings = 4;
    struct Sample {
        double dx, dy, z;
    };
    std::vector<Sample> samples;
    samples.push_back({0.0, 0.0, elevation_at(terrain, x, y)});
    for (int k = 1; k <= kRings; ++k) {
        double ring = radius * k / kRings;
        int count = 8 * k;
        for (int j = 0; j < count; ++j) {
            double a = 2.0 * std::numbers::pi * j / count;
            double dx = ring * std::cos(a);
            double dy = ring * std::sin(a);
            samples.push_back({dx, dy, elevation_at(terrain, x + dx, y + dy)});
        }
    }

    double n = static_cast<double>(samples.size());
    double mx = 0, my = 0, mz = 0;
    for (const auto& s : samples) {
        mx += s.dx;
        my += s.dy;
        mz += s.z;
    }
    mx /= n;
    my /= n;
    mz /= n;
    double sxx = 0, syy = 0, sxy = 0, sxz = 0, syz = 0;
    for (const auto& s : samples) {
        double ex = s.dx - mx, ey = s.dy - my, ez = s.z - mz;
        sxx += ex * ex;
        syy += ey * ey;
        sxy += ex * ey;
        sxz += ex * ez;
        syz += ey * ez;
    }
    double det = sxx * syy - sxy * sxy;
    double scale = (sxx + syy) * (sxx + syy);
    if (!(scale > 0.0) || !(det > 1e-12 * scale)) {
        fail(ErrorCode::DegenerateSamples, "probe samples are collinear");
    }
    double slope_x = (sxz * syy - syz * sxy) / det;
    double slope_y = (syz * sxx - sxz * sxy) / det;

    Vec3 normal{-slope_x, -slope_y, 1.0};
    normal *= 1.0 / norm(normal);
    return {normal, mz};
}

Terrain terrain_from_json_text(const std::string& text) {
    return detail::terrain_from_json(detail::parse_json(text, ErrorCode::SchemaError, "terrain"));
}

Terrain load_terrain_file(const std::string& path) {
    return terrain_from_json_text(detail::read_text_file(path));
}

std::string terrain_to_json_text(const Terrain& terrain) {
    return detail::terrain_to_json(terrain).dump() + "\n";
}

}  // namespace survey
