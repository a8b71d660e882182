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

namespace qsm {

/// Numeric tolerances shared by every module.
///
/// There is a single process-wide instance. Change it before any worker
/// threads start; reads are not synchronized.
struct NumericPolicy {
    double algebraic_tol = 1e-10;     // orthonormality, hermiticity, traces
    double spectral_rel_tol = 1e-8;   // eigen residuals, relative to ||H||
    double commute_tol = 1e-8;        // macro-variable vs shell projector
    double distribution_tol = 1e-8;   // normalization of probability vectors
    double degenerate_mass = 1e-12;   // below this a distribution is empty
};

const NumericPolicy& numeric_policy();
void set_numeric_policy(const NumericPolicy& policy);

}  // namespace qsm
