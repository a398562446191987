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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survey_bench/trace.hpp"

namespace survey {

inline constexpr int kReportFormat = 1;
// A joystick correction is a sign reversal of an axis beyond this deflection.
inline constexpr double kReversalDeadband = 0.2;

// |(computed - actual) / actual|. ZeroTrueElevation when actual == 0.
double elevation_error(double computed, double actual);

// One [task_start, task_end] window for a task, as indices into the event
// list (inclusive).
struct AttemptWindow {
    std::string task;
    std::int64_t attempt = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// All closed windows of `task`, in trace order. MissingMilestone when the
// task never starts, or a start has no matching end.
std::vector<AttemptWindow> find_attempts(const std::vector<TraceEvent>& events, std::string_view task);

struct InteractionCounts {
    std::int64_t screw_turns = 0;
    std::int64_t slider_commits = 0;
    std::int64_t joystick_reversals = 0;

    std::int64_t total() const { return screw_turns + slider_commits + joystick_reversals; }
};

InteractionCounts count_interactions(const std::vector<TraceEvent>& events, const AttemptWindow& window);

// Per-attempt durations, t(task_end) - t(task_start).
std::vector<double> completion_time(const std::vector<TraceEvent>& events, std::string_view task);
// Per-attempt counted inputs.
std::vector<std::int64_t> interaction_count(const std::vector<TraceEvent>& events,
                                            std::string_view task);

struct MetricsReport {
    std::string scenario_id;
    std::string task;
    std::int64_t attempt = 0;
    bool completed = false;
    std::optional<double> elevation_error;
    double completion_time = 0.0;
    std::int64_t interaction_count = 0;
    std::optional<double> trailing_accuracy;
    InteractionCounts raw;
};

struct MetricSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct TaskAggregate {
    std::string task;
    std::size_t attempts = 0;
    MetricSummary completion_time;
    MetricSummary interaction_count;
    std::optional<MetricSummary> elevation_error;
    std::optional<MetricSummary> trailing_accuracy;
};

struct SessionReport {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::string engine_version;
    std::vector<MetricsReport> attempts;
    std::vector<TaskAggregate> aggregates;
};

// Every closed attempt in the trace, grouped in order of first appearance.
SessionReport evaluate_trace(const SessionTrace& trace);

// Stable-ordered JSON document (`report_format: 1`), newline terminated.
std::string emit_report(const SessionReport& report);
// Fixed-width tables, one block per task.
std::string render_report_text(const SessionReport& report);
// One CSV row per attempt; `source` fills the first column.
std::string report_csv_header();
std::string report_csv_rows(const SessionReport& report, std::string_view source);

// Structural check of a report document; throws SchemaError.
void validate_report(const std::string& text);

}  // namespace survey
