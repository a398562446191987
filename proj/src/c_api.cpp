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

#include "survey_bench/survey_bench.h"

#include <memory>
#include <new>
#include <string>

#include "json_io.hpp"
#include "survey_bench/metrics.hpp"
#include "survey_bench/scenario.hpp"
#include "survey_bench/session.hpp"
#include "survey_bench/trace.hpp"

struct sb_scenario {
    survey::Scenario scenario;
};

struct sb_session {
    survey::Session session;
    std::string out;
    std::string hash;
    std::string trace;
    std::string mode;
};

struct sb_report {
    survey::SessionReport report;
    std::string json;
    std::string text;
    std::string csv;
};

namespace {

thread_local std::string g_last_error;

sb_status set_error(sb_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename F>
sb_status guarded(F&& body) {
    try {
        body();
        return SB_OK;
    } catch (const survey::Error& e) {
        return set_error(static_cast<sb_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SB_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(SB_INTERNAL, e.what());
    } catch (...) {
        return set_error(SB_INTERNAL, "unknown failure");
    }
}

sb_status null_argument(const char* what) {
    return set_error(SB_INVALID_ARGUMENT, std::string(what) + " is NULL");
}

sb_report* make_report(survey::SessionReport report) {
    auto* r = new sb_report{std::move(report), {}, {}, {}};
    r->json = survey::emit_report(r->report);
    r->text = survey::render_report_text(r->report);
    return r;
}

}  // namespace

extern "C" {

const char* sb_version(void) {
    static const std::string v(survey::kEngineVersion);
    return v.c_str();
}

const char* sb_status_name(sb_status status) {
    if (status == SB_OK) return "Ok";
    if (status == SB_INTERNAL) return "Internal";
    if (status < SB_INVALID_ARGUMENT || status > SB_IO_ERROR) return "Unknown";
    return survey::error_code_name(static_cast<survey::ErrorCode>(status)).data();
}

const char* sb_last_error(void) { return g_last_error.c_str(); }

sb_status sb_scenario_load(const char* path, sb_scenario** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new sb_scenario{survey::load_scenario_file(path)}; });
}

sb_status sb_scenario_parse(const char* json_text, const char* base_dir, sb_scenario** out) {
    if (!json_text) return null_argument("json_text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        *out = new sb_scenario{survey::scenario_from_text(json_text, base_dir ? base_dir : "")};
    });
}

const char* sb_scenario_id(const sb_scenario* scenario) {
    return scenario ? scenario->scenario.id.c_str() : "";
}

uint64_t sb_scenario_seed(const sb_scenario* scenario) { return scenario ? scenario->scenario.seed : 0; }

void sb_scenario_free(sb_scenario* scenario) { delete scenario; }

sb_status sb_session_create(const sb_scenario* scenario, int use_seed, uint64_t seed, sb_session** out) {
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        std::optional<std::uint64_t> override;
        if (use_seed) override = seed;
        *out = new sb_session{survey::Session(scenario->scenario, override), {}, {}, {}, {}};
    });
}

sb_status sb_session_apply(sb_session* session, const char* message, const char** out_lines) {
    if (!session) return null_argument("session");
    if (!message) return null_argument("message");
    sb_status status = guarded([&] {
        auto out = session->session.apply_line(message);
        session->out.clear();
        for (const auto& line : out) {
            session->out += line;
            session->out += '\n';
        }
        if (out.size() == 1) {
            auto j = survey::Json::parse(out.front());
            if (j.value("type", "") == "error") {
                std::string code = j.value("code", "");
                for (int c = SB_INVALID_ARGUMENT; c <= SB_IO_ERROR; ++c) {
                    if (code == survey::error_code_name(static_cast<survey::ErrorCode>(c))) {
                        survey::fail(static_cast<survey::ErrorCode>(c), j.value("message", ""));
                    }
                }
            }
        }
    });
    if (out_lines) *out_lines = session->out.c_str();
    return status;
}

int64_t sb_session_clock(const sb_session* session) { return session ? session->session.clock() : 0; }

const char* sb_session_mode(const sb_session* session) {
    if (!session) return "";
    auto* s = const_cast<sb_session*>(session);
    s->mode = std::string(survey::mode_name(session->session.mode()));
    return s->mode.c_str();
}

const char* sb_session_state_hash(sb_session* session) {
    if (!session) return "";
    session->hash = session->session.state_hash();
    return session->hash.c_str();
}

sb_status sb_session_trace(sb_session* session, const char** out_text) {
    if (!session) return null_argument("session");
    if (!out_text) return null_argument("out_text");
    return guarded([&] {
        session->trace = survey::serialize_trace(session->session.record());
        *out_text = session->trace.c_str();
    });
}

sb_status sb_session_write_trace(sb_session* session, const char* path) {
    if (!session) return null_argument("session");
    if (!path) return null_argument("path");
    return guarded([&] {
        survey::detail::write_text_file(path, survey::serialize_trace(session->session.record()));
    });
}

void sb_session_free(sb_session* session) { delete session; }

sb_status sb_replay_text(const char* trace_text, const sb_scenario* scenario, sb_report** out) {
    if (!trace_text) return null_argument("trace_text");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        survey::SessionTrace trace = survey::parse_trace(trace_text);
        auto result = survey::replay(trace, scenario ? &scenario->scenario : nullptr);
        *out = make_report(std::move(result.report));
    });
}

sb_status sb_replay_file(const char* trace_path, const sb_scenario* scenario, sb_report** out) {
    if (!trace_path) return null_argument("trace_path");
    if (!out) return null_argument("out");
    *out = nullptr;
    std::string text;
    sb_status st = guarded([&] { text = survey::detail::read_text_file(trace_path); });
    if (st != SB_OK) return st;
    return sb_replay_text(text.c_str(), scenario, out);
}

const char* sb_report_json(const sb_report* report) { return report ? report->json.c_str() : ""; }

const char* sb_report_text(const sb_report* report) { return report ? report->text.c_str() : ""; }

const char* sb_report_csv_header(void) {
    static const std::string header = survey::report_csv_header();
    return header.c_str();
}

const char* sb_report_csv_rows(sb_report* report, const char* source) {
    if (!report) return "";
    report->csv = survey::report_csv_rows(report->report, source ? source : "");
    return report->csv.c_str();
}

sb_status sb_report_write(const sb_report* report, const char* path) {
    if (!report) return null_argument("report");
    if (!path) return null_argument("path");
    return guarded([&] { survey::detail::write_text_file(path, report->json); });
}

void sb_report_free(sb_report* report) { delete report; }

}  // extern "C"
