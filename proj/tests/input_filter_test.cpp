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

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "support.hpp"
#include "survey_bench/error.hpp"
#include "survey_bench/input_filter.hpp"

using namespace survey;
using testing_support::Gen;

namespace {

RawSample sample(double t, double p, double v = 0.0) { return {t, {p, p, p}, {v, v, v}}; }

std::vector<double> axis_x(const std::vector<RawSample>& s) {
    std::vector<double> out;
    for (const auto& r : s) out.push_back(r.position.x);
    return out;
}

}  // namespace

TEST(Ses, AlphaOneIsIdentity) {
    Gen g(21);
    FilterState st = FilterState::make(1.0);
    for (int i = 0; i < 100; ++i) {
        RawSample r{i * 0.02, g.vec3(-5, 5), g.vec3(-1, 1)};
        auto step = ses_step(st, r);
        EXPECT_EQ(step.output.position, r.position);
        EXPECT_EQ(step.output.velocity, r.velocity);
        st = step.state;
    }
}

TEST(Ses, ConstantInputIsFixedPoint) {
    FilterState st = FilterState::make(0.2);
    for (int i = 0; i < 100; ++i) {
        auto step = ses_step(st, sample(i, 3.25, -0.5));
        EXPECT_DOUBLE_EQ(step.output.position.y, 3.25);
        EXPECT_DOUBLE_EQ(step.output.velocity.z, -0.5);
        st = step.state;
    }
}

TEST(Ses, HandUnrollFromZero) {
    FilterState st = FilterState::seeded(0.2, {});
    auto a = ses_step(st, sample(0.0, 1.0));
    EXPECT_NEAR(a.output.position.x, 0.2, 1e-15);
    auto b = ses_step(a.state, sample(0.1, 1.0));
    EXPECT_NEAR(b.output.position.x, 0.36, 1e-15);
}

TEST(Ses, FirstSampleCopiesThrough) {
    auto step = ses_step(FilterState::make(0.2), RawSample{0.0, {1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(step.output.position, (Vec3{1, 2, 3}));
    EXPECT_EQ(step.output.velocity, (Vec3{4, 5, 6}));
}

TEST(Ses, RejectsNonMonotoneTime) {
    auto a = ses_step(FilterState::make(0.2), sample(1.0, 0.0));
    try {
        ses_step(a.state, sample(1.0, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonMonotoneTime);
    }
    EXPECT_THROW(FilterState::make(0.0), Error);
    EXPECT_THROW(FilterState::make(1.5), Error);
}

TEST(SesClosedForm, Examples) {
    std::vector<double> one{4.5};
    EXPECT_DOUBLE_EQ(ses_closed_form(one, 4.5, 0.2), 4.5);
    std::vector<double> ones{1.0, 1.0};
    EXPECT_NEAR(ses_closed_form(ones, 0.0, 0.2), 0.36, 1e-15);
    std::vector<double> many{3.0, -1.0, 8.0, 2.5};
    EXPECT_DOUBLE_EQ(ses_closed_form(many, 100.0, 1.0), 2.5);
    try {
        ses_closed_form(std::span<const double>{}, 0.0, 0.2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyHistory);
    }
}

TEST(SesClosedForm, OracleEquivalenceProperty) {
    Gen g(22);
    for (double alpha : {0.1, 0.2, 0.5, 0.9}) {
        for (int trial = 0; trial < 5; ++trial) {
            int n = g.integer(1, 1000);
            std::vector<RawSample> stream;
            FilterState st = FilterState::make(alpha);
            SmoothedSample out;
            for (int i = 0; i < n; ++i) {
                stream.push_back({i * 0.02, g.vec3(-10, 10), g.vec3(-2, 2)});
                auto step = ses_step(st, stream.back());
                st = step.state;
                out = step.output;
            }
            SmoothedSample seed{stream.front().position, stream.front().velocity};
            SmoothedSample oracle = ses_closed_form(stream, seed, alpha);
            ASSERT_NEAR(out.position.x, oracle.position.x, 1e-9);
            ASSERT_NEAR(out.position.y, oracle.position.y, 1e-9);
            ASSERT_NEAR(out.position.z, oracle.position.z, 1e-9);
            ASSERT_NEAR(out.velocity.x, oracle.velocity.x, 1e-9);
            ASSERT_NEAR(out.velocity.y, oracle.velocity.y, 1e-9);
            ASSERT_NEAR(out.velocity.z, oracle.velocity.z, 1e-9);
        }
    }
}

TEST(Ses, BoundednessProperty) {
    Gen g(23);
    for (int trial = 0; trial < 50; ++trial) {
        double alpha = g.uniform(0.01, 1.0);
        double init = g.uniform(-5, 5);
        FilterState st = FilterState::seeded(alpha, {{init, init, init}, {}});
        double lo = init, hi = init;
        for (int i = 0; i < 300; ++i) {
            double p = g.uniform(-20, 20);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
            auto step = ses_step(st, sample(i, p));
            ASSERT_GE(step.output.position.x, lo - 1e-12);
            ASSERT_LE(step.output.position.x, hi + 1e-12);
            st = step.state;
        }
    }
}

TEST(Ses, WhiteNoiseVarianceDrops) {
    Gen g(24);
    FilterState st = FilterState::make(0.2);
    std::vector<RawSample> raw;
    std::vector<double> smooth;
    for (int i = 0; i < 10000; ++i) {
        raw.push_back(sample(i * 0.01, g.normal()));
        auto step = ses_step(st, raw.back());
        smooth.push_back(step.output.position.x);
        st = step.state;
    }
    auto variance = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= v.size();
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / v.size();
    };
    double vr = variance(axis_x(raw));
    double vs = variance(smooth);
    EXPECT_LT(vs, vr);
    // Stationary variance of SES on unit white noise is alpha / (2 - alpha).
    EXPECT_NEAR(vs / vr, 0.2 / 1.8, 0.02);
}

TEST(Deadzone, Examples) {
    Vec3 v{0.003, 0.0, 0.004};  // norm 0.005
    EXPECT_EQ(apply_deadzone(v, 0.0), v);
    Vec3 small{0.0, 0.004, 0.0};
    EXPECT_EQ(apply_deadzone(small, 0.01), (Vec3{}));
    Vec3 big{0.3, 0.4, 0.0};  // norm 0.5
    EXPECT_EQ(apply_deadzone(big, 0.01), big);
    // Norm-based: each axis is under the threshold but the vector is not.
    Vec3 diagonal{0.008, 0.008, 0.0};
    EXPECT_EQ(apply_deadzone(diagonal, 0.01), diagonal);
}

TEST(Deadzone, IdempotentProperty) {
    Gen g(25);
    for (int i = 0; i < 1000; ++i) {
        Vec3 v = g.vec3(-0.02, 0.02);
        double tau = g.uniform(0.0, 0.03);
        ASSERT_EQ(apply_deadzone(apply_deadzone(v, tau), tau), apply_deadzone(v, tau));
    }
}
