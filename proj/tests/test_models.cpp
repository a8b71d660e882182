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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qsm/models.hpp"
#include "test_support.hpp"

using namespace qsm;
using namespace qsm::testing;

namespace {

std::vector<double> sector_spectrum(const HermitianOperator& h, int particles) {
    std::vector<Index> idx;
    for (Index s = 0; s < h.dim(); ++s)
        if (__builtin_popcount(static_cast<unsigned>(s)) == particles) idx.push_back(s);
    ComplexMatrix block(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = h.matrix()(idx[a], idx[b]);
    const RealVector ev = spectral_decompose(HermitianOperator(block)).eigenvalues;
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

TEST_CASE("bitstring convention") {
    CHECK(occupation(12, 0, 4) == 1);
    CHECK(occupation(12, 1, 4) == 1);
    CHECK(occupation(12, 2, 4) == 0);
    CHECK(occupation(12, 3, 4) == 0);
    CHECK(occupation(1, 3, 4) == 1);
}

TEST_CASE("two-site chain by hand") {
    const double j = 0.7, h = 0.3;
    const HermitianOperator op = build_spin_chain(2, j, h);
    ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
    expected(0, 0) = -h;
    expected(3, 3) = h;
    expected(1, 2) = expected(2, 1) = j;
    CHECK((op.matrix() - expected).norm() < 1e-15);
}

TEST_CASE("chain sectors match free-fermion energies") {
    const int n = 6;
    const double j = 1.3, h = 0.4;
    const HermitianOperator op = build_spin_chain(n, j, h);
    std::vector<double> eps;
    for (int k = 1; k <= n; ++k) eps.push_back(2.0 * j * std::cos(std::numbers::pi * k / (n + 1)));
    for (int particles = 0; particles <= n; ++particles) {
        std::vector<double> expected;
        for (unsigned mask = 0; mask < (1U << n); ++mask) {
            if (__builtin_popcount(mask) != particles) continue;
            double e = h * (particles - 0.5 * n);
            for (int k = 0; k < n; ++k)
                if (mask & (1U << k)) e += eps[static_cast<std::size_t>(k)];
            expected.push_back(e);
        }
        std::sort(expected.begin(), expected.end());
        const auto got = sector_spectrum(op, particles);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("chain conserves particle number") {
    const HermitianOperator h = build_spin_chain(5, 1.0, 0.2);
    const HermitianOperator n = number_operator(5);
    CHECK((h.matrix() * n.matrix() - n.matrix() * h.matrix()).norm() < 1e-13);
    CHECK(n.matrix()(12, 12).real() == 2.0);
}

TEST_CASE("lattice size limits") {
    CHECK_THROWS_CODE(build_spin_chain(13, 1.0, 0.0), ErrorCode::TooLarge);
    CHECK_THROWS_CODE(build_spin_chain(0, 1.0, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("macro-variable bins by enumeration") {
    const MacroVariable total = total_occupation(4);
    std::vector<int> counts(5, 0);
    for (Index s = 0; s < 16; ++s) ++counts[static_cast<std::size_t>(total.bin_of(total.values()[s]))];
    CHECK(counts == std::vector<int>{1, 4, 6, 4, 1});

    const MacroVariable left = left_half_occupation(4);
    std::vector<int> lc(left.n_bins(), 0);
    for (Index s = 0; s < 16; ++s) {
        const unsigned u = static_cast<unsigned>(s);
        CHECK(left.values()[s] == occupation(u, 0, 4) + occupation(u, 1, 4));
        ++lc[static_cast<std::size_t>(left.bin_of(left.values()[s]))];
    }
    CHECK(lc == std::vector<int>{4, 8, 4});
}

TEST_CASE("macro-variable validation") {
    const HermitianOperator d = HermitianOperator::diagonal((RealVector(3) << 0, 1, 2).finished());
    CHECK_THROWS_CODE(MacroVariable(d, {0.0, 0.0, 3.0}), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(MacroVariable(d, {0.5, 3.0}), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(MacroVariable(d, {0.0}), ErrorCode::InvalidArgument);
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 1) = m(1, 0) = 0.5;
    CHECK_THROWS_CODE(MacroVariable(HermitianOperator(m), {-1.0, 2.0}), ErrorCode::InvalidArgument);
    const MacroVariable closed(d, {0.0, 1.0, 2.0});
    CHECK(closed.bin_of(2.0) == 1);
    CHECK(closed.bin_of(1.0) == 1);
    CHECK(closed.bin_of(0.0) == 0);
    CHECK(closed.bin_of(2.5) == -1);
}

TEST_CASE("particle in a box") {
    GridModel g;
    g.box_length = 1.0;
    g.mass = 1.0;
    g.hbar = 1.0;
    auto errors = [&](int points) {
        g.grid_points = points;
        const RealVector ev = spectral_decompose(build_grid_hamiltonian(g)).eigenvalues;
        std::vector<double> rel;
        for (int n = 1; n <= 3; ++n) {
            const double exact = std::pow(std::numbers::pi * n, 2) / 2.0;
            rel.push_back(std::abs(ev[n - 1] - exact) / exact);
        }
        return rel;
    };
    const auto e100 = errors(100);
    const auto e200 = errors(200);
    for (double e : e200) CHECK(e < 0.02);
    for (int n = 0; n < 3; ++n) {
        const double ratio = e200[static_cast<std::size_t>(n)] / e100[static_cast<std::size_t>(n)];
        CHECK(ratio > 0.2);
        CHECK(ratio < 0.3);
    }
}

TEST_CASE("two-particle grid is a Kronecker sum") {
    GridModel g;
    g.grid_points = 10;
    g.n_particles = 1;
    const RealVector one = spectral_decompose(build_grid_hamiltonian(g)).eigenvalues;
    g.n_particles = 2;
    CHECK(g.config_dim() == 100);
    CHECK(g.particle_index(37, 0) == 3);
    CHECK(g.particle_index(37, 1) == 7);
    const RealVector two = spectral_decompose(build_grid_hamiltonian(g)).eigenvalues;
    std::vector<double> sums;
    for (Index a = 0; a < 10; ++a)
        for (Index b = 0; b < 10; ++b) sums.push_back(one[a] + one[b]);
    std::sort(sums.begin(), sums.end());
    for (Index i = 0; i < 100; ++i) CHECK(two[i] == doctest::Approx(sums[static_cast<std::size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("constant potential shifts the spectrum") {
    GridModel g;
    g.grid_points = 16;
    const RealVector base = spectral_decompose(build_grid_hamiltonian(g)).eigenvalues;
    g.potential.assign(16, 2.5);
    const RealVector shifted = spectral_decompose(build_grid_hamiltonian(g)).eigenvalues;
    CHECK((shifted - base - RealVector::Constant(16, 2.5)).norm() < 1e-10);
    g.potential.assign(5, 0.0);
    CHECK_THROWS_CODE(g.validate(), ErrorCode::DimensionMismatch);
    GridModel small;
    small.grid_points = 4;
    CHECK_THROWS_CODE(small.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("position variable") {
    GridModel g;
    g.grid_points = 100;
    const MacroVariable pos = position_variable(g, {0.0, 0.2, 0.28, 1.0});
    int in_cell = 0;
    for (Index c = 0; c < 100; ++c) in_cell += pos.bin_of(pos.values()[c]) == 1 ? 1 : 0;
    CHECK(in_cell == 8);
    CHECK_THROWS_CODE(position_variable(g, {0.0, 1.0}, 1), ErrorCode::IndexOutOfRange);
}

TEST_CASE("mass density operators") {
    const MassDensityOperator m = lattice_mass_density(4, {1.0, 2.0, 3.0, 4.0});
    CHECK(m.n_locations() == 4);
    CHECK(m.at(0).matrix()(12, 12).real() == 1.0);
    CHECK(m.at(2).matrix()(12, 12).real() == 0.0);
    // state |1100>: mass 1 + 2
    ComplexVector v = ComplexVector::Zero(16);
    v[12] = 1.0;
    const auto field = mass_density_field(WaveFunction(v), m);
    CHECK(field == std::vector<double>{1.0, 2.0, 0.0, 0.0});
    CHECK_THROWS_CODE(lattice_mass_density(4, {1.0}), ErrorCode::DimensionMismatch);
    CHECK_THROWS_CODE(MassDensityOperator({1.0}, {RealVector::Constant(2, -1.0)}), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(mass_density_field(WaveFunction(ComplexVector::Unit(4, 0)), m), ErrorCode::DimensionMismatch);

    GridModel g;
    g.grid_points = 8;
    g.n_particles = 2;
    g.mass = 3.0;
    const MassDensityOperator gm = grid_mass_density(g);
    CHECK((gm.total_diagonal() - RealVector::Constant(64, 6.0)).norm() < 1e-12);
}
