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
#include <cmath>

#include "support.hpp"
#include "survey_bench/error.hpp"
#include "survey_bench/instrument.hpp"
#include "survey_bench/leveling.hpp"
#include "survey_bench/metrics.hpp"

using namespace survey;
using testing_support::Gen;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode{};
}

LevelingExercise simple_exercise(double elev_a, double elev_b) {
    LevelingExercise ex;
    ex.benchmark_a = {"A", {-10, 0, elev_a}, true};
    ex.benchmark_b = {"B", {10, 0, elev_b}, false};
    return ex;
}

SightReading bs(double v, std::string target = "A") { return {SightKind::Backsight, v, std::move(target), 0.0}; }
SightReading fs(double v, std::string target = "B") { return {SightKind::Foresight, v, std::move(target), 0.0}; }

}  // namespace

TEST(RodReading, Examples) {
    SessionRng rng(1);
    EXPECT_EQ(simulated_rod_reading(101.25, 100.0, 0.0, true, 4.0, rng), 1.25);
    EXPECT_EQ(simulated_rod_reading(100.0, 100.0, 0.0, true, 4.0, rng), 0.0);
    EXPECT_EQ(code_of([&] { simulated_rod_reading(99.0, 100.0, 0.0, true, 4.0, rng); }), ErrorCode::RodOutOfRange);
    EXPECT_EQ(code_of([&] { simulated_rod_reading(105.0, 100.0, 0.0, true, 4.0, rng); }), ErrorCode::RodOutOfRange);
    EXPECT_EQ(code_of([&] { simulated_rod_reading(101.0, 100.0, 0.0, false, 4.0, rng); }), ErrorCode::NotLevel);
}

TEST(RodReading, RejectedReadingsConsumeNoRandomness) {
    SessionRng rng(2);
    EXPECT_THROW(simulated_rod_reading(101.0, 100.0, 0.01, false, 4.0, rng), Error);
    EXPECT_THROW(simulated_rod_reading(90.0, 100.0, 0.01, true, 4.0, rng), Error);
    EXPECT_EQ(rng.draws(), 0u);
    simulated_rod_reading(101.0, 100.0, 0.01, true, 4.0, rng);
    EXPECT_EQ(rng.draws(), 2u);
}

TEST(RodReading, SeededNoiseIsReproducibleAndClamped) {
    SessionRng a(77), b(77);
    for (int i = 0; i < 1000; ++i) {
        double ra = simulated_rod_reading(100.001, 100.0, 0.05, true, 4.0, a);
        double rb = simulated_rod_reading(100.001, 100.0, 0.05, true, 4.0, b);
        ASSERT_EQ(ra, rb);
        ASSERT_GE(ra, 0.0);
        ASSERT_LE(ra, 4.0);
    }
}

TEST(RodReading, NoiseStatisticsMatchSd) {
    SessionRng rng(78);
    const int n = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double e = simulated_rod_reading(102.0, 100.0, 0.003, true, 4.0, rng) - 2.0;
        sum += e;
        sq += e * e;
    }
    double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 1e-4);
    EXPECT_NEAR(sd, 0.003, 1e-4);
}

TEST(HeightOfInstrument, Examples) {
    EXPECT_EQ(height_of_instrument(100.0, 0.0), 100.0);
    EXPECT_EQ(height_of_instrument(100.0, 1.25), 101.25);
    Gen g(50);
    for (int i = 0; i < 1000; ++i) {
        double e = g.uniform(-500, 500), b = g.uniform(0, 4), c = g.uniform(-100, 100);
        ASSERT_NEAR(height_of_instrument(e + c, b), height_of_instrument(e, b) + c, 1e-12);
    }
}

TEST(ElevationFromForesight, Examples) {
    EXPECT_EQ(elevation_from_foresight(101.25, 0.75), 100.5);
    EXPECT_EQ(elevation_from_foresight(101.25, 0.0), 101.25);
    Gen g(51);
    for (int i = 0; i < 1000; ++i) {
        double e = g.uniform(-500, 500), s = g.uniform(0, 4);
        ASSERT_NEAR(elevation_from_foresight(height_of_instrument(e, s), s), e, 1e-12);
    }
}

TEST(Grade, Examples) {
    LevelingExercise ex = simple_exercise(100.0, 100.0);
    LevelingResult exact = grade_exercise(ex, bs(1.5), fs(1.5));
    EXPECT_EQ(exact.hi, 101.5);
    EXPECT_EQ(exact.computed_elevation_b, 100.0);
    EXPECT_EQ(exact.error, 0.0);

    LevelingResult high = grade_exercise(ex, bs(1.5), fs(1.1));  // h_comp = 100.4
    EXPECT_NEAR(high.error, 0.004, 1e-12);
    LevelingResult low = grade_exercise(ex, bs(1.5), fs(1.55));  // h_comp = 99.95
    EXPECT_NEAR(low.error, 0.0005, 1e-12);
    EXPECT_NEAR(low.true_elevation_b, 100.0, 0.0);
}

TEST(Grade, Errors) {
    LevelingExercise ex = simple_exercise(100.0, 100.0);
    EXPECT_EQ(code_of([&] { grade_exercise(ex, bs(1.0, "B"), fs(1.0)); }), ErrorCode::WrongTarget);
    EXPECT_EQ(code_of([&] { grade_exercise(ex, bs(1.0), fs(1.0, "A")); }), ErrorCode::WrongTarget);
    EXPECT_EQ(code_of([&] { grade_exercise(ex, fs(1.0, "A"), fs(1.0)); }), ErrorCode::WrongTarget);
    LevelingExercise zero = simple_exercise(1.0, 0.0);
    EXPECT_EQ(code_of([&] { grade_exercise(zero, bs(1.0), fs(2.0)); }), ErrorCode::ZeroTrueElevation);
}

TEST(Grade, BiasMonotonicityProperty) {
    Gen g(52);
    for (int i = 0; i < 1000; ++i) {
        double truth = g.uniform(10, 500);
        LevelingExercise ex = simple_exercise(truth + g.uniform(-1, 1), truth);
        double s_b = g.uniform(1, 2);
        double s_f = ex.benchmark_a.position.z + s_b - truth;
        double d1 = g.uniform(0, 0.5), d2 = g.uniform(0, 0.5);
        if (std::abs(d1 - d2) < 1e-6) continue;
        double sign = g.coin() ? 1.0 : -1.0;
        double e1 = grade_exercise(ex, bs(s_b), fs(s_f + sign * d1)).error;
        double e2 = grade_exercise(ex, bs(s_b), fs(s_f + sign * d2)).error;
        ASSERT_EQ(d1 < d2, e1 < e2) << d1 << " " << d2;
    }
}

TEST(Grade, EqualBiasCancelsProperty) {
    Gen g(53);
    for (int i = 0; i < 1000; ++i) {
        LevelingExercise ex = simple_exercise(g.uniform(50, 150), g.uniform(50, 150));
        double b = g.uniform(0, 3), f = g.uniform(0, 3), d = g.uniform(-0.5, 0.5);
        double plain = grade_exercise(ex, bs(b), fs(f)).computed_elevation_b;
        double biased = grade_exercise(ex, bs(b + d), fs(f + d)).computed_elevation_b;
        ASSERT_NEAR(plain, biased, 1e-12);
    }
}

TEST(Grade, ScaleInvarianceProperty) {
    Gen g(54);
    for (int i = 0; i < 1000; ++i) {
        double comp = g.uniform(1, 500), act = g.uniform(1, 500), k = g.uniform(0.01, 100);
        ASSERT_NEAR(elevation_error(comp * k, act * k), elevation_error(comp, act), 1e-12);
        ASSERT_GE(elevation_error(comp, act), 0.0);
    }
}

// Full pipeline on random noiseless scenarios: terrain, tripod, rough and
// fine leveling, two readings, grading.
TEST(Grade, ClosedLoopExactnessProperty) {
    Gen g(55);
    BubbleCalibration cal;
    const double instrument_height = 0.25;
    for (int trial = 0; trial < 200; ++trial) {
        Terrain t = testing_support::random_terrain(g);
        double sx = g.uniform(-25, 25), sy = g.uniform(-25, 25);
        auto bench = [&](const char* id, bool known) {
            double ang = g.uniform(-3.14159, 3.14159), dist = g.uniform(5, 15);
            double x = sx + dist * std::cos(ang), y = sy + dist * std::sin(ang);
            return Benchmark{id, {x, y, elevation_at(t, x, y) + g.uniform(0, 0.2)}, known};
        };
        LevelingExercise ex;
        ex.benchmark_a = bench("A", true);
        ex.benchmark_b = bench("B", false);
        ex.station_x = sx;
        ex.station_y = sy;
        validate(ex);

        // Rough level: pick legs that put every leg top at the same height,
        // then leave a few millimetres for the screws.
        TripodConfig cfg{sx, sy, g.uniform(-3, 3), {1.5, 1.5, 1.5}, 0.6};
        ContactSet feet = drop_tripod(cfg, t);
        double top = std::max({feet.ground_points[0].z, feet.ground_points[1].z, feet.ground_points[2].z}) + 1.3;
        double reach = cfg.splay_radius - kHeadHingeRadius;
        for (int i = 0; i < 3; ++i) {
            double rise = top - feet.ground_points[i].z + g.uniform(-0.005, 0.005);
            cfg.leg_lengths[i] = std::sqrt(rise * rise + reach * reach);
        }
        TripodSetup setup = setup_tripod(cfg, t);
        AngularPair base = base_tilt_from_normal(setup.head_normal);
        ScrewState screws = solve_screws(-base.u, -base.v, kDefaultScrewAlpha);
        LevelReadout r = read_level(setup, screws, cal);
        ASSERT_TRUE(r.level);

        double hi = setup.head_center.z + instrument_height;
        SessionRng rng(static_cast<std::uint64_t>(trial));
        double b = simulated_rod_reading(hi, ex.benchmark_a.position.z, 0.0, r.level, ex.rod_height_max, rng);
        double f = simulated_rod_reading(hi, ex.benchmark_b.position.z, 0.0, r.level, ex.rod_height_max, rng);
        LevelingResult res = grade_exercise(ex, bs(b), fs(f));
        ASSERT_LT(res.error, 1e-12) << "trial " << trial;
        ASSERT_NEAR(res.hi, hi, 1e-12);
    }
}

TEST(Exercise, Validation) {
    LevelingExercise ex = simple_exercise(100, 101);
    EXPECT_NO_THROW(validate(ex));
    LevelingExercise same = ex;
    same.benchmark_b.position = {same.benchmark_a.position.x, same.benchmark_a.position.y, 3.0};
    EXPECT_EQ(code_of([&] { validate(same); }), ErrorCode::InvalidConfig);
    LevelingExercise bad = ex;
    bad.noise_sd = -1;
    EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_sight_kind("sidesight"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(parse_sight_kind(sight_kind_name(SightKind::Foresight)), SightKind::Foresight);
}
