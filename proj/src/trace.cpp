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

#include "survey_bench/trace.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "json_io.hpp"
#include "survey_bench/error.hpp"

namespace survey {

namespace {

constexpr std::array<std::string_view, 8> kMilestones = {
    "session_start", "task_start",  "task_end",     "reading_taken",
    "level_achieved", "waypoint_hit", "touchdown",  "session_end",
};

std::uint64_t trailer_hash(std::uint64_t body_hash, std::int64_t end_tick, const std::string& final_hash) {
    return detail::fnv1a("end_tick=" + std::to_string(end_tick) + " final=" + final_hash, body_hash);
}

[[noreturn]] void corrupt(const std::string& what) { fail(ErrorCode::CorruptTrace, what); }

}  // namespace

std::string_view event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Input: return "input";
        case EventKind::Engine: return "engine";
        case EventKind::Milestone: return "milestone";
    }
    return "input";
}

EventKind parse_event_kind(std::string_view name) {
    if (name == "input") return EventKind::Input;
    if (name == "engine") return EventKind::Engine;
    if (name == "milestone") return EventKind::Milestone;
    fail(ErrorCode::InvalidArgument, "unknown event kind '" + std::string(name) + "'");
}

bool is_milestone_name(std::string_view name) {
    return std::find(kMilestones.begin(), kMilestones.end(), name) != kMilestones.end();
}

std::string serialize_trace(const SessionTrace& trace) {
    std::string body;
    Json header;
    header["trace_format"] = kTraceFormat;
    header["scenario_id"] = trace.header.scenario_id;
    header["seed"] = trace.header.seed;
    header["engine_version"] = trace.header.engine_version;
    header["tick_rate"] = trace.header.tick_rate;
    header["scenario"] = trace.header.scenario;
    body += header.dump();
    body += '\n';
    for (const auto& ev : trace.events) {
        Json line;
        line["tick"] = ev.tick;
        line["t"] = ev.t;
        line["kind"] = event_kind_name(ev.kind);
        line["name"] = ev.name;
        line["payload"] = ev.payload;
        body += line.dump();
        body += '\n';
    }
    Json trailer;
    trailer["end_tick"] = trace.end_tick;
    trailer["final_state_hash"] = trace.final_state_hash;
    trailer["hash"] = detail::hex64(trailer_hash(detail::fnv1a(body), trace.end_tick, trace.final_state_hash));
    return body + trailer.dump() + "\n";
}

SessionTrace parse_trace(const std::string& text) {
    std::vector<std::string_view> lines;
    std::string_view rest(text);
    while (!rest.empty()) {
        auto nl = rest.find('\n');
        if (nl == std::string_view::npos) corrupt("trace does not end with a newline");
        lines.push_back(rest.substr(0, nl));
        rest.remove_prefix(nl + 1);
    }
    if (lines.size() < 2) corrupt("trace needs a header and a trailer");

    auto parse_line = [](std::string_view line, std::size_t number) {
        try {
            return Json::parse(line);
        } catch (const nlohmann::json::exception&) {
            corrupt("line " + std::to_string(number) + " is not valid JSON");
        }
    };

    std::uint64_t body_hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
        body_hash = detail::fnv1a(lines[i], body_hash);
        body_hash = detail::fnv1a("\n", body_hash);
    }

    SessionTrace trace;
    try {
        Json trailer = parse_line(lines.back(), lines.size());
        trace.end_tick = detail::require_int(trailer, "end_tick", ErrorCode::CorruptTrace, "trailer");
        trace.final_state_hash =
            detail::require_string(trailer, "final_state_hash", ErrorCode::CorruptTrace, "trailer");
        std::string stored = detail::require_string(trailer, "hash", ErrorCode::CorruptTrace, "trailer");
        if (stored != detail::hex64(trailer_hash(body_hash, trace.end_tick, trace.final_state_hash))) {
            corrupt("trace hash mismatch");
        }

        Json header = parse_line(lines.front(), 1);
        detail::check_format(header, "trace_format", kTraceFormat, ErrorCode::VersionMismatch, "header");
        trace.header.scenario_id =
            detail::require_string(header, "scenario_id", ErrorCode::CorruptTrace, "header");
        const Json& seed = detail::require(header, "seed", ErrorCode::CorruptTrace, "header");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
            corrupt("header.seed must be an unsigned integer");
        }
        trace.header.seed = seed.get<std::uint64_t>();
        trace.header.engine_version =
            detail::require_string(header, "engine_version", ErrorCode::CorruptTrace, "header");
        trace.header.tick_rate = static_cast<int>(
            detail::require_int(header, "tick_rate", ErrorCode::CorruptTrace, "header"));
        trace.header.scenario = detail::require(header, "scenario", ErrorCode::CorruptTrace, "header");

        std::int64_t last_tick = 0;
        for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
            Json line = parse_line(lines[i], i + 1);
            std::string ctx = "event[" + std::to_string(i) + "]";
            TraceEvent ev;
            ev.tick = detail::require_int(line, "tick", ErrorCode::CorruptTrace, ctx);
            ev.t = detail::require_number(line, "t", ErrorCode::CorruptTrace, ctx);
            std::string kind = detail::require_string(line, "kind", ErrorCode::CorruptTrace, ctx);
            try {
                ev.kind = parse_event_kind(kind);
            } catch (const Error&) {
                corrupt(ctx + " has unknown kind '" + kind + "'");
            }
            ev.name = detail::require_string(line, "name", ErrorCode::CorruptTrace, ctx);
            ev.payload = detail::require(line, "payload", ErrorCode::CorruptTrace, ctx);
            if (ev.tick < last_tick) corrupt(ctx + " goes back in time");
            if (ev.kind == EventKind::Milestone && !is_milestone_name(ev.name)) {
                corrupt(ctx + " has unknown milestone '" + ev.name + "'");
            }
            last_tick = ev.tick;
            trace.events.push_back(std::move(ev));
        }
        if (trace.end_tick < last_tick) corrupt("end_tick precedes the last event");
    } catch (const nlohmann::json::exception& e) {
        corrupt(std::string("malformed trace: ") + e.what());
    }
    return trace;
}

SessionTrace load_trace_file(const std::string& path) { return parse_trace(detail::read_text_file(path)); }

}  // namespace survey
