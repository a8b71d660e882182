// Copyright 2026 The qsmlab Authors
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

#include "qsm/error.hpp"

namespace qsm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::EmptyShell: return "EmptyShell";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DecompositionIncompatible: return "DecompositionIncompatible";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::NullConditional: return "NullConditional";
        case ErrorCode::OffGrid: return "OffGrid";
        case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      field_(std::move(field)) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace qsm
