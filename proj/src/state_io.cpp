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
#include "qsm/state_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "qsm/error.hpp"

namespace qsm {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'S', 'M', 'S'};
constexpr std::uint32_t kTagWave = 1;
constexpr std::uint32_t kTagDensity = 2;

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) fail(ErrorCode::IoError, "truncated state stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

void write_matrix(std::ostream& out, std::uint32_t tag, const ComplexMatrix& m) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kStateFormatVersion);
    put_le<std::uint32_t>(out, tag);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) {
            put_le<double>(out, m(r, c).real());
            put_le<double>(out, m(r, c).imag());
        }
    if (!out) fail(ErrorCode::IoError, "failed writing state");
}

ComplexMatrix read_matrix(std::istream& in, std::uint32_t expected_tag) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) fail(ErrorCode::IoError, "not a state file (bad magic)");
    if (get_le<std::uint32_t>(in) != kStateFormatVersion)
        fail(ErrorCode::IoError, "unsupported state format version");
    if (get_le<std::uint32_t>(in) != expected_tag) fail(ErrorCode::IoError, "unexpected state type tag");
    const auto rows = get_le<std::uint64_t>(in);
    const auto cols = get_le<std::uint64_t>(in);
    if (rows == 0 || cols == 0 || rows > 1u << 16 || cols > 1u << 16)
        fail(ErrorCode::IoError, "implausible state dimensions");
    ComplexMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) {
            const double re = get_le<double>(in);
            const double im = get_le<double>(in);
            m(r, c) = cplx(re, im);
        }
    return m;
}

}  // namespace

void write_state(std::ostream& out, const WaveFunction& psi) {
    write_matrix(out, kTagWave, psi.amplitudes());
}

void write_state(std::ostream& out, const DensityMatrix& w) {
    write_matrix(out, kTagDensity, w.matrix());
}

WaveFunction read_wavefunction(std::istream& in) {
    ComplexMatrix m = read_matrix(in, kTagWave);
    if (m.cols() != 1) fail(ErrorCode::IoError, "wave function must have one column");
    return WaveFunction(m.col(0));
}

DensityMatrix read_density_matrix(std::istream& in) {
    ComplexMatrix m = read_matrix(in, kTagDensity);
    if (m.rows() != m.cols()) fail(ErrorCode::IoError, "density matrix must be square");
    return DensityMatrix::from_matrix(std::move(m));
}

}  // namespace qsm
