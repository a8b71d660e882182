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

#include "qsm/policy.hpp"

namespace qsm {

namespace {
NumericPolicy g_policy;
}

const NumericPolicy& numeric_policy() { return g_policy; }

void set_numeric_policy(const NumericPolicy& policy) { g_policy = policy; }

}  // namespace qsm
