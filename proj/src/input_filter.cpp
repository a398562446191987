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

#include "survey_bench/input_filter.hpp"

#include <string>

namespace survey {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "smoothing alpha must be in (0, 1], got " + std::to_string(alpha));
    }
}

Vec3 blend(double alpha, const Vec3& raw, const Vec3& prev) {
    return {alpha * raw.x + (1.0 - alpha) * prev.x, alpha * raw.y + (1.0 - alpha) * prev.y,
            alpha * raw.z + (1.0 - alpha) * prev.z};
}

}  // namespace

FilterState FilterState::make(double alpha) {
    check_alpha(alpha);
    FilterState s;
    s.alpha = alpha;
    return s;
}

FilterState FilterState::seeded(double alpha, const SmoothedSample& previous) {
    check_alpha(alpha);
    if (!is_finite(previous.position) || !is_finite(previous.velocity)) {
        fail(ErrorCode::InvalidArgument, "filter seed must be finite");
    }
    FilterState s;
    s.alpha = alpha;
    s.smoothed = previous;
    s.initialized = true;
    return s;
}

SesStep ses_step(const FilterState& state, const RawSample& sample) {
    check_alpha(state.alpha);
    if (!std::isfinite(sample.t) || !is_finite(sample.position) || !is_finite(sample.velocity)) {
        fail(ErrorCode::InvalidArgument, "raw sample must be finite");
    }
    if (state.last_t && !(sample.t > *state.last_t)) {
        fail(ErrorCode::NonMonotoneTime, "sample time " + std::to_string(sample.t) +
                                             " does not advance past " +
                                             std::to_string(*state.last_t));
    }
    SesStep out{state, {}};
    if (!state.initialized) {
        out.state.smoothed = {sample.position, sample.velocity};
        out.state.initialized = true;
    } else {
        out.state.smoothed.position = blend(state.alpha, sample.position, state.smoothed.position);
        out.state.smoothed.velocity = blend(state.alpha, sample.velocity, state.smoothed.velocity);
    }
    out.state.last_t = sample.t;
    out.output = out.state.smoothed;
    return out;
}

double ses_closed_form(std::span<const double> raws, double initial, double alpha) {
    check_alpha(alpha);
    if (raws.empty()) fail(ErrorCode::EmptyHistory, "closed-form smoothing needs at least one sample");
    const std::size_t n = raws.size();
    const double decay = 1.0 - alpha;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::pow(decay, static_cast<double>(i)) * raws[n - 1 - i];
    }
    return alpha * sum + std::pow(decay, static_cast<double>(n)) * initial;
}

SmoothedSample ses_closed_form(std::span<const RawSample> history, const SmoothedSample& initial,
                               double alpha) {
    if (history.empty()) fail(ErrorCode::EmptyHistory, "closed-form smoothing needs at least one sample");
    std::vector<double> axis(history.size());
    auto component = [&](auto pick, double seed) {
        for (std::size_t i = 0; i < history.size(); ++i) axis[i] = pick(history[i]);
        return ses_closed_form(axis, seed, alpha);
    };
    SmoothedSample out;
    out.position.x = component([](const RawSample& s) { return s.position.x; }, initial.position.x);
    out.position.y = component([](const RawSample& s) { return s.position.y; }, initial.position.y);
    out.position.z = component([](const RawSample& s) { return s.position.z; }, initial.position.z);
    out.velocity.x = component([](const RawSample& s) { return s.velocity.x; }, initial.velocity.x);
    out.velocity.y = component([](const RawSample& s) { return s.velocity.y; }, initial.velocity.y);
    out.velocity.z = component([](const RawSample& s) { return s.velocity.z; }, initial.velocity.z);
    return out;
}

Vec3 apply_deadzone(const Vec3& velocity, double threshold) {
    if (norm(velocity) < threshold) return {};
    return velocity;
}

}  // namespace survey
