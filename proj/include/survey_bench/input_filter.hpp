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

#include <optional>
#include <span>

#include "survey_bench/geodesy.hpp"

namespace survey {

inline constexpr double kDefaultSmoothingAlpha = 0.2;
inline constexpr double kDefaultDeadzoneMps = 0.01;

struct RawSample {
    double t = 0.0;  // seconds, strictly increasing within a stream
    Vec3 position;
    Vec3 velocity;
};

struct SmoothedSample {
    Vec3 position;
    Vec3 velocity;
};

// Single-exponential-smoothing state for one controller stream. A value
// type: copy it to fork a stream, never share it between writers.
struct FilterState {
    double alpha = kDefaultSmoothingAlpha;
    SmoothedSample smoothed;
    bool initialized = false;
    std::optional<double> last_t;

    // Unseeded: the first sample is copied through unchanged.
    static FilterState make(double alpha);
    // Seeded with a previous smoothed value, as if a stream had already run.
    static FilterState seeded(double alpha, const SmoothedSample& previous);
};

struct SesStep {
    FilterState state;
    SmoothedSample output;
};

// smoothed = alpha*raw + (1 - alpha)*previous, per axis, for position and
// velocity. Throws NonMonotoneTime if sample.t does not advance.
SesStep ses_step(const FilterState& state, const RawSample& sample);

// Expanded geometric-weight sum
//   alpha * sum_{i=0}^{n-1} (1-alpha)^i * raw[n-1-i] + (1-alpha)^n * initial
// evaluated directly. Used as the oracle for ses_step.
double ses_closed_form(std::span<const double> raws, double initial, double alpha);
SmoothedSample ses_closed_form(std::span<const RawSample> history, const SmoothedSample& initial,
                               double alpha);

// Zero when ||velocity|| < threshold, otherwise the input untouched.
Vec3 apply_deadzone(const Vec3& velocity, double threshold);

}  // namespace survey
