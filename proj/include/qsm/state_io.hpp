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

#include "qsm/state.hpp"

namespace qsm {

// Portable binary state format, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "QSMS"
//   4       4     u32 format version (1)
//   8       4     u32 type tag: 1 = wave function, 2 = density matrix
//   12      8     u64 rows
//   20      8     u64 cols (1 for wave functions)
//   28      ...   rows*cols pairs of f64 (re, im), row-major

inline constexpr std::uint32_t kStateFormatVersion = 1;

void write_state(std::ostream& out, const WaveFunction& psi);
void write_state(std::ostream& out, const DensityMatrix& w);
WaveFunction read_wavefunction(std::istream& in);
DensityMatrix read_density_matrix(std::istream& in);

}  // namespace qsm
