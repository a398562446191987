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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace survey {

using Json = nlohmann::ordered_json;

inline constexpr int kTraceFormat = 1;

enum class EventKind { Input, Engine, Milestone };

std::string_view event_kind_name(EventKind kind);
EventKind parse_event_kind(std::string_view name);

// Milestone names form a closed vocabulary.
bool is_milestone_name(std::string_view name);

struct TraceEvent {
    std::int64_t tick = 0;
    double t = 0.0;  // tick / tick_rate
    EventKind kind = EventKind::Input;
    std::string name;
    Json payload = Json::object();
};

struct TraceHeader {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::string engine_version;
    int tick_rate = 50;
    Json scenario = Json::object();  // resolved scenario, terrain inlined
};

struct SessionTrace {
    TraceHeader header;
    std::vector<TraceEvent> events;
    std::int64_t end_tick = 0;
    std::string final_state_hash;  // hex, FNV-1a of the final session state
};

// Header line, one line per event, then a trailer carrying end_tick, the
// final state hash and an FNV-1a hash over everything before it.
std::string serialize_trace(const SessionTrace& trace);
// Throws CorruptTrace on any structural or hash failure.
SessionTrace parse_trace(const std::string& text);
SessionTrace load_trace_file(const std::string& path);

}  // namespace survey
