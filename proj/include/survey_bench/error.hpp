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

#include <stdexcept>
#include <string>
#include <string_view>

namespace survey {

// Every failure the engine can report. The C API maps these 1:1 onto
// sb_status values, so the order here is part of the ABI.
enum class ErrorCode {
    InvalidArgument = 1,
    OutOfBounds,
    DegenerateSamples,
    NonMonotoneTime,
    EmptyHistory,
    DegenerateTriangle,
    InvertedNormal,
    SmallAngleViolation,
    OutOfRange,
    InvalidConfig,
    NotLevel,
    RodOutOfRange,
    WrongTarget,
    ZeroTrueElevation,
    EmptyRun,
    MissingMilestone,
    IllegalInMode,
    MalformedMessage,
    UnknownVerb,
    VersionMismatch,
    ScenarioMismatch,
    CorruptTrace,
    SchemaError,
    IoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace survey
