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
#pragma once

#include <iosfwd>

namespace qsm {

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
};

/// qsmlab <entropy|equivalence|grw|bohm|decompose|validate> --config <path>
///        [--seed <u64>] [--out <dir>] [--threads <n>]
///
/// Results and summaries go to out; failures go to err as one JSON object
/// {"error", "message", "field"}.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsm
