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

#include "survey_bench/error.hpp"

namespace survey {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::DegenerateSamples: return "DegenerateSamples";
        case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
        case ErrorCode::EmptyHistory: return "EmptyHistory";
        case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
        case ErrorCode::InvertedNormal: return "InvertedNormal";
        case ErrorCode::SmallAngleViolation: return "SmallAngleViolation";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NotLevel: return "NotLevel";
        case ErrorCode::RodOutOfRange: return "RodOutOfRange";
        case ErrorCode::WrongTarget: return "WrongTarget";
        case ErrorCode::ZeroTrueElevation: return "ZeroTrueElevation";
        case ErrorCode::EmptyRun: return "EmptyRun";
        case ErrorCode::MissingMilestone: return "MissingMilestone";
        case ErrorCode::IllegalInMode: return "IllegalInMode";
        case ErrorCode::MalformedMessage: return "MalformedMessage";
        case ErrorCode::UnknownVerb: return "UnknownVerb";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::ScenarioMismatch: return "ScenarioMismatch";
        case ErrorCode::CorruptTrace: return "CorruptTrace";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace survey
