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

#include <array>
#include <cstddef>
#include <cstdint>

namespace qsm {

/// Philox4x64-10 block function (Salmon et al., Random123).
///
/// Counter-based: output block i is a pure function of (key, counter i), so
/// any stream can be reproduced from its key alone on any platform.
std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> counter,
                                           std::array<std::uint64_t, 2> key);

/// Purpose tags keep different uses of one (seed, stream) pair disjoint.
enum class StreamPurpose : std::uint64_t {
    General = 0,
    PureSamples = 1,
    CollapseW = 2,
    CollapsePsi = 3,
    BohmW = 4,
    BohmPsi = 5,
    Hamiltonian = 6,
};

/// A reproducible random stream.
///
/// Stream splitting: key = (master seed, stream id); counter =
/// (block index, purpose tag, 0, 0). Ensemble member i always draws from
/// stream id i, which makes results independent of worker scheduling.
///
/// Derived variates are defined here rather than through <random>
/// distributions so the sequence is the same across standard libraries:
///   uniform()      (u >> 11) * 2^-53, in [0, 1)
///   normal()       Box-Muller on two uniforms, both outputs used in order
///   exponential()  -log(1 - u) / rate
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id,
                 StreamPurpose purpose = StreamPurpose::General);

    std::uint64_t next_u64();
    double uniform();
    double normal();
    double exponential(double rate);
    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n);

    std::uint64_t seed() const noexcept { return key_[0]; }
    std::uint64_t stream_id() const noexcept { return key_[1]; }

private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t purpose_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 4> buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qsm
