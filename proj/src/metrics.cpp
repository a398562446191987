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

#include "survey_bench/metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_io.hpp"
#include "survey_bench/error.hpp"

namespace survey {

namespace {

bool payload_task_is(const TraceEvent& ev, std::string_view task) {
    auto it = ev.payload.find("task");
    return it != ev.payload.end() && it->is_string() && it->get<std::string>() == task;
}

bool is_milestone(const TraceEvent& ev, std::string_view name) {
    return ev.kind == EventKind::Milestone && ev.name == name;
}

std::string shortest(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double payload_number(const Json& payload, std::string_view key) {
    auto it = payload.find(key);
    if (it == payload.end() || !it->is_number()) {
        fail(ErrorCode::CorruptTrace, "event payload lacks numeric '" + std::string(key) + "'");
    }
    return it->get<double>();
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
    return s;
}

Json summary_json(const std::optional<MetricSummary>& s) {
    if (!s) return nullptr;
    Json j;
    j["min"] = s->min;
    j["max"] = s->max;
    j["mean"] = s->mean;
    return j;
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    return *v;
}

}  // namespace

double elevation_error(double computed, double actual) {
    if (actual == 0.0) fail(ErrorCode::ZeroTrueElevation, "relative elevation error undefined at 0");
    return std::abs((computed - actual) / actual);
}

std::vector<AttemptWindow> find_attempts(const std::vector<TraceEvent>& events, std::string_view task) {
    std::vector<AttemptWindow> out;
    std::optional<AttemptWindow> open;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& ev = events[i];
        if (ev.kind != EventKind::Milestone || !payload_task_is(ev, task)) continue;
        if (ev.name == "task_start") {
            if (open) fail(ErrorCode::MissingMilestone, "task '" + std::string(task) + "' restarted without task_end");
            AttemptWindow w;
            w.task = std::string(task);
            auto it = ev.payload.find("attempt");
            w.attempt = (it != ev.payload.end() && it->is_number_integer())
                            ? it->get<std::int64_t>()
                            : static_cast<std::int64_t>(out.size() + 1);
            w.begin = i;
            open = w;
        } else if (ev.name == "task_end") {
            if (!open) fail(ErrorCode::MissingMilestone, "task_end for '" + std::string(task) + "' without task_start");
            open->end = i;
            out.push_back(*open);
            open.reset();
        }
    }
    if (open) fail(ErrorCode::MissingMilestone, "task '" + std::string(task) + "' never ended");
    if (out.empty()) fail(ErrorCode::MissingMilestone, "no task_start for '" + std::string(task) + "'");
    return out;
}

InteractionCounts count_interactions(const std::vector<TraceEvent>& events, const AttemptWindow& w) {
    InteractionCounts counts;
    static constexpr std::array<std::string_view, 4> kAxes = {"throttle", "pitch", "roll", "yaw_rate"};
    std::array<int, 4> last_sign{};  // sign of the last deflection outside the deadband
    for (std::size_t i = w.begin; i <= w.end && i < events.size(); ++i) {
        const TraceEvent& ev = events[i];
        if (ev.kind != EventKind::Input) continue;
        if (ev.name == "turn_screw") {
            ++counts.screw_turns;
        } else if (ev.name == "set_leg_length" || ev.name == "rotate_tripod") {
            ++counts.slider_commits;
        } else if (ev.name == "control") {
            for (std::size_t a = 0; a < kAxes.size(); ++a) {
                auto it = ev.payload.find(kAxes[a]);
                if (it == ev.payload.end() || !it->is_number()) continue;
                double v = it->get<double>();
                if (std::abs(v) <= kReversalDeadband) continue;
                int sign = v > 0 ? 1 : -1;
                if (last_sign[a] != 0 && sign != last_sign[a]) ++counts.joystick_reversals;
                last_sign[a] = sign;
            }
        }
    }
    return counts;
}

std::vector<double> completion_time(const std::vector<TraceEvent>& events, std::string_view task) {
    std::vector<double> out;
    for (const auto& w : find_attempts(events, task)) out.push_back(events[w.end].t - events[w.begin].t);
    return out;
}

std::vector<std::int64_t> interaction_count(const std::vector<TraceEvent>& events,
                                            std::string_view task) {
    std::vector<std::int64_t> out;
    for (const auto& w : find_attempts(events, task)) out.push_back(count_interactions(events, w).total());
    return out;
}

SessionReport evaluate_trace(const SessionTrace& trace) {
    SessionReport report;
    report.scenario_id = trace.header.scenario_id;
    report.seed = trace.header.seed;
    report.engine_version = trace.header.engine_version;

    std::vector<std::string> tasks;
    for (const auto& ev : trace.events) {
        if (!is_milestone(ev, "task_start")) continue;
        auto it = ev.payload.find("task");
        if (it == ev.payload.end() || !it->is_string()) {
            fail(ErrorCode::CorruptTrace, "task_start without a task name");
        }
        std::string name = it->get<std::string>();
        if (std::find(tasks.begin(), tasks.end(), name) == tasks.end()) tasks.push_back(name);
    }

    for (const auto& task : tasks) {
        TaskAggregate agg;
        agg.task = task;
        std::vector<double> times, counts, errors, trails;
        for (const auto& w : find_attempts(trace.events, task)) {
            MetricsReport m;
            m.scenario_id = trace.header.scenario_id;
            m.task = task;
            m.attempt = w.attempt;
            const TraceEvent& end = trace.events[w.end];
            auto done = end.payload.find("completed");
            m.completed = done != end.payload.end() && done->is_boolean() && done->get<bool>();
            m.completion_time = end.t - trace.events[w.begin].t;
            m.raw = count_interactions(trace.events, w);
            m.interaction_count = m.raw.total();
            for (std::size_t i = w.begin; i <= w.end; ++i) {
                const TraceEvent& ev = trace.events[i];
                if (ev.kind != EventKind::Engine) continue;
                if (ev.name == "leveling_graded") {
                    m.elevation_error = elevation_error(payload_number(ev.payload, "computed_elevation_b"),
                                                        payload_number(ev.payload, "true_elevation_b"));
                } else if (ev.name == "trail_summary") {
                    auto it = ev.payload.find("trailing_accuracy_m");
                    if (it != ev.payload.end() && it->is_number()) m.trailing_accuracy = it->get<double>();
                }
            }
            times.push_back(m.completion_time);
            counts.push_back(static_cast<double>(m.interaction_count));
            if (m.elevation_error) errors.push_back(*m.elevation_error);
            if (m.trailing_accuracy) trails.push_back(*m.trailing_accuracy);
            report.attempts.push_back(std::move(m));
        }
        agg.attempts = times.size();
        agg.completion_time = summarize(times);
        agg.interaction_count = summarize(counts);
        if (!errors.empty()) agg.elevation_error = summarize(errors);
        if (!trails.empty()) agg.trailing_accuracy = summarize(trails);
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

std::string emit_report(const SessionReport& report) {
    Json doc;
    doc["report_format"] = kReportFormat;
    doc["scenario_id"] = report.scenario_id;
    doc["seed"] = report.seed;
    doc["engine_version"] = report.engine_version;
    Json attempts = Json::array();
    for (const auto& m : report.attempts) {
        Json a;
        a["task"] = m.task;
        a["attempt"] = m.attempt;
        a["completed"] = m.completed;
        a["completion_time_s"] = m.completion_time;
        a["interaction_count"] = m.interaction_count;
        a["elevation_error"] = optional_json(m.elevation_error);
        a["trailing_accuracy_m"] = optional_json(m.trailing_accuracy);
        a["raw_counts"] = {{"screw_turns", m.raw.screw_turns},
                           {"slider_commits", m.raw.slider_commits},
                           {"joystick_reversals", m.raw.joystick_reversals}};
        attempts.push_back(std::move(a));
    }
    doc["attempts"] = std::move(attempts);
    Json aggregates = Json::array();
    for (const auto& agg : report.aggregates) {
        Json a;
        a["task"] = agg.task;
        a["attempts"] = agg.attempts;
        a["completion_time_s"] = summary_json(agg.completion_time);
        a["interaction_count"] = summary_json(agg.interaction_count);
        a["elevation_error"] = summary_json(agg.elevation_error);
        a["trailing_accuracy_m"] = summary_json(agg.trailing_accuracy);
        aggregates.push_back(std::move(a));
    }
    doc["aggregates"] = std::move(aggregates);
    return doc.dump(2) + "\n";
}

std::string render_report_text(const SessionReport& report) {
    std::ostringstream os;
    os << "scenario " << report.scenario_id << "  seed " << report.seed << "  engine "
       << report.engine_version << "\n";
    char line[160];
    for (const auto& agg : report.aggregates) {
        os << "\n" << agg.task << "\n";
        std::snprintf(line, sizeof line, "%-8s %10s %8s %12s %12s %5s\n", "attempt", "time_s",
                      "actions", "elev_err_%", "trail_m", "done");
        os << line;
        for (const auto& m : report.attempts) {
            if (m.task != agg.task) continue;
            char err[32] = "-", trail[32] = "-";
            if (m.elevation_error) std::snprintf(err, sizeof err, "%.4f", *m.elevation_error * 100.0);
            if (m.trailing_accuracy) std::snprintf(trail, sizeof trail, "%.3f", *m.trailing_accuracy);
            std::snprintf(line, sizeof line, "%-8lld %10.2f %8lld %12s %12s %5s\n",
                          static_cast<long long>(m.attempt), m.completion_time,
                          static_cast<long long>(m.interaction_count), err, trail,
                          m.completed ? "yes" : "no");
            os << line;
        }
        auto row = [&](const char* label, auto pick) {
            char err[32] = "-", trail[32] = "-";
            if (agg.elevation_error) std::snprintf(err, sizeof err, "%.4f", pick(*agg.elevation_error) * 100.0);
            if (agg.trailing_accuracy) std::snprintf(trail, sizeof trail, "%.3f", pick(*agg.trailing_accuracy));
            std::snprintf(line, sizeof line, "%-8s %10.2f %8.1f %12s %12s\n", label,
                          pick(agg.completion_time), pick(agg.interaction_count), err, trail);
            os << line;
        };
        row("min", [](const MetricSummary& s) { return s.min; });
        row("max", [](const MetricSummary& s) { return s.max; });
        row("mean", [](const MetricSummary& s) { return s.mean; });
    }
    return os.str();
}

std::string report_csv_header() {
    return "source,scenario_id,task,attempt,completed,completion_time_s,interaction_count,"
           "elevation_error,trailing_accuracy_m,screw_turns,slider_commits,joystick_reversals\n";
}

std::string report_csv_rows(const SessionReport& report, std::string_view source) {
    std::string out;
    for (const auto& m : report.attempts) {
        out += std::string(source) + "," + report.scenario_id + "," + m.task + "," +
               std::to_string(m.attempt) + "," + (m.completed ? "true" : "false") + "," +
               shortest(m.completion_time) + "," + std::to_string(m.interaction_count) + "," +
               (m.elevation_error ? shortest(*m.elevation_error) : "") + "," +
               (m.trailing_accuracy ? shortest(*m.trailing_accuracy) : "") + "," +
               std::to_string(m.raw.screw_turns) + "," + std::to_string(m.raw.slider_commits) + "," +
               std::to_string(m.raw.joystick_reversals) + "\n";
    }
    return out;
}

void validate_report(const std::string& text) {
    constexpr auto code = ErrorCode::SchemaError;
    Json doc = detail::parse_json(text, code, "report");
    detail::reject_unknown_keys(doc, {"report_format", "scenario_id", "seed", "engine_version",
                                      "attempts", "aggregates"},
                                code, "");
    detail::check_format(doc, "report_format", kReportFormat, code, "");
    detail::require_string(doc, "scenario_id", code, "");
    detail::require_string(doc, "engine_version", code, "");
    if (!detail::require(doc, "seed", code, "").is_number_unsigned()) fail(code, "seed must be unsigned");

    auto optional_nonneg = [&](const Json& obj, std::string_view key, const std::string& ctx) {
        const Json& v = detail::require(obj, key, code, ctx);
        if (v.is_null()) return;
        if (!v.is_number() || v.get<double>() < 0.0) fail(code, ctx + "." + std::string(key) + " must be null or >= 0");
    };
    auto summary = [&](const Json& obj, std::string_view key, const std::string& ctx, bool nullable) {
        const Json& v = detail::require(obj, key, code, ctx);
        if (v.is_null() && nullable) return;
        std::string c = ctx + "." + std::string(key);
        detail::reject_unknown_keys(v, {"min", "max", "mean"}, code, c);
        double lo = detail::require_number(v, "min", code, c);
        double hi = detail::require_number(v, "max", code, c);
        double mean = detail::require_number(v, "mean", code, c);
        if (!(lo <= mean && mean <= hi)) fail(code, c + " must satisfy min <= mean <= max");
    };

    const Json& attempts = detail::require(doc, "attempts", code, "");
    if (!attempts.is_array()) fail(code, "attempts must be an array");
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        std::string ctx = "attempts[" + std::to_string(i) + "]";
        const Json& a = attempts[i];
        detail::reject_unknown_keys(a, {"task", "attempt", "completed", "completion_time_s",
                                        "interaction_count", "elevation_error",
                                        "trailing_accuracy_m", "raw_counts"},
                                    code, ctx);
        detail::require_string(a, "task", code, ctx);
        detail::require_int(a, "attempt", code, ctx);
        if (!detail::require(a, "completed", code, ctx).is_boolean()) fail(code, ctx + ".completed must be boolean");
        if (detail::require_number(a, "completion_time_s", code, ctx) < 0.0) fail(code, ctx + ".completion_time_s < 0");
        if (detail::require_int(a, "interaction_count", code, ctx) < 0) fail(code, ctx + ".interaction_count < 0");
        optional_nonneg(a, "elevation_error", ctx);
        optional_nonneg(a, "trailing_accuracy_m", ctx);
        const Json& raw = detail::require(a, "raw_counts", code, ctx);
        detail::reject_unknown_keys(raw, {"screw_turns", "slider_commits", "joystick_reversals"}, code,
                                    ctx + ".raw_counts");
        std::int64_t total = 0;
        for (auto key : {"screw_turns", "slider_commits", "joystick_reversals"}) {
            std::int64_t n = detail::require_int(raw, key, code, ctx + ".raw_counts");
            if (n < 0) fail(code, ctx + ".raw_counts negative");
            total += n;
        }
        if (total != a["interaction_count"].get<std::int64_t>()) {
            fail(code, ctx + ".interaction_count disagrees with raw_counts");
        }
    }
    const Json& aggregates = detail::require(doc, "aggregates", code, "");
    if (!aggregates.is_array()) fail(code, "aggregates must be an array");
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        std::string ctx = "aggregates[" + std::to_string(i) + "]";
        const Json& a = aggregates[i];
        detail::reject_unknown_keys(a, {"task", "attempts", "completion_time_s", "interaction_count",
                                        "elevation_error", "trailing_accuracy_m"},
                                    code, ctx);
        detail::require_string(a, "task", code, ctx);
        if (detail::require_int(a, "attempts", code, ctx) < 1) fail(code, ctx + ".attempts < 1");
        summary(a, "completion_time_s", ctx, false);
        summary(a, "interaction_count", ctx, false);
        summary(a, "elevation_error", ctx, true);
        summary(a, "trailing_accuracy_m", ctx, true);
    }
}

}  // namespace survey
