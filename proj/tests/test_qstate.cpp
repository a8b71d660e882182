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
#include <sstream>
#include <vector>

#include "qsm/qstate.hpp"
#include "qsm/state_io.hpp"
#include "test_support.hpp"

using namespace qsm;
using namespace qsm::testing;

namespace {

Subspace random_subspace(Index n, Index d, RandomStream& rng) {
    std::vector<ComplexVector> vs;
    for (Index i = 0; i < d; ++i) vs.push_back(random_vector(n, rng));
    return orthonormalize(vs);
}

ComplexMatrix random_unitary(Index d, RandomStream& rng) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(d, d, rng));
    return qr.householderQ() * ComplexMatrix::Identity(d, d);
}

}  // namespace

TEST_CASE("wave function validation") {
    CHECK_THROWS_CODE(WaveFunction(ComplexVector::Ones(2)), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(WaveFunction::normalized(ComplexVector::Zero(3)), ErrorCode::InvalidArgument);
    const WaveFunction a = WaveFunction::normalized(ComplexVector::Ones(4));
    CHECK(a.amplitudes().norm() == doctest::Approx(1.0));
    const WaveFunction b(a.amplitudes() * std::polar(1.0, 0.7));
    CHECK(same_ray(a, b));
    CHECK_FALSE(same_ray(a, WaveFunction(ComplexVector::Unit(4, 0))));
}

TEST_CASE("density matrix validation") {
    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_CODE(DensityMatrix::from_matrix(neg), ErrorCode::InvariantViolation);
    CHECK_NOTHROW(DensityMatrix::from_trusted(neg));
    ComplexMatrix nh = ComplexMatrix::Identity(2, 2) * 0.5;
    nh(0, 1) = 0.1;
    CHECK_THROWS_CODE(DensityMatrix::from_matrix(nh), ErrorCode::NotHermitian);
    CHECK_THROWS_CODE(DensityMatrix::from_matrix(ComplexMatrix::Identity(2, 2)), ErrorCode::InvalidArgument);
    const DensityMatrix w = DensityMatrix::from_matrix(ComplexMatrix::Identity(3, 3) / 3.0);
    CHECK(purity(w) == doctest::Approx(1.0 / 3.0));
    const auto r = w.report();
    CHECK(r.min_eigenvalue == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("IPH density matrix spectrum") {
    RandomStream rng(5, 0);
    for (Index d : {1, 3, 7}) {
        const Subspace s = random_subspace(12, d, rng);
        const DensityMatrix w = iph_density_matrix(s);
        const ComplexMatrix& m = w.matrix();
        CHECK(std::abs(m.trace().real() - 1.0) < 1e-12);
        CHECK((m * m - m / static_cast<double>(d)).norm() < 1e-12);
        CHECK(purity(w) == doctest::Approx(1.0 / d));
        const RealVector ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(m).eigenvalues();
        int nonzero = 0;
        for (Index k = 0; k < ev.size(); ++k) {
            if (ev[k] > 1e-9) {
                ++nonzero;
                CHECK(ev[k] == doctest::Approx(1.0 / d));
            } else {
                CHECK(std::abs(ev[k]) < 1e-12);
            }
        }
        CHECK(nonzero == d);
    }
}

TEST_CASE("strong IPH is invariant under basis rotation") {
    RandomStream rng(6, 0);
    const Subspace s = random_subspace(16, 10, rng);
    const ComplexMatrix rotated = s.basis() * random_unitary(10, rng);
    const DensityMatrix a = initial_density(IPHSpec{IPHMode::Strong, {s}, 0, false});
    const DensityMatrix b = initial_density(IPHSpec{IPHMode::Strong, {Subspace::from_orthonormal(rotated)}, 0, false});
    CHECK((a.matrix() - b.matrix()).norm() <= 1e-10);
}

TEST_CASE("weak IPH selects one admissible subspace") {
    RandomStream rng(7, 0);
    const std::vector<Subspace> list{random_subspace(8, 2, rng), random_subspace(8, 3, rng)};
    IPHSpec spec{IPHMode::Weak, list, 0, true};
    const DensityMatrix w0 = weak_iph(spec);
    spec.selected_index = 1;
    const DensityMatrix w1 = weak_iph(spec);
    CHECK((w0.matrix() - w1.matrix()).norm() > 0.1);
    CHECK((w1.matrix() - iph_density_matrix(list[1]).matrix()).norm() < 1e-14);
    spec.selected_index = 2;
    CHECK_THROWS_CODE(spec.validate(), ErrorCode::IndexOutOfRange);
    CHECK_THROWS_CODE(weak_iph(IPHSpec{IPHMode::Strong, {list[0]}, 0, false}), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(IPHSpec(IPHSpec{IPHMode::Strong, list, 0, false}).validate(), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(IPHSpec{}.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("mu_S samples are uniform on the sphere") {
    // |<e_1|psi>|^2 for a uniform unit vector in C^d is Beta(1, d - 1):
    // F(x) = 1 - (1 - x)^(d - 1); also E|c|^4 = 2 / (d (d + 1)).
    RandomStream rng(8, 0);
    const Index d = 4;
    const Subspace s = random_subspace(10, d, rng);
    const ComplexMatrix p = projector(s).matrix();
    const int n = 20000;
    std::vector<double> x(n);
    double m4 = 0;
    for (int i = 0; i < n; ++i) {
        RandomStream r(8, static_cast<std::uint64_t>(i), StreamPurpose::PureSamples);
        const WaveFunction psi = sample_mu_s(s, r);
        REQUIRE((p * psi.amplitudes() - psi.amplitudes()).norm() < 1e-12);
        const double c = std::norm(s.vector(0).dot(psi.amplitudes()));
        x[static_cast<std::size_t>(i)] = c;
        m4 += c * c / n;
    }
    std::sort(x.begin(), x.end());
    double dmax = 0;
    for (int i = 0; i < n; ++i) {
        const double f = 1.0 - std::pow(1.0 - x[static_cast<std::size_t>(i)], d - 1);
        dmax = std::max({dmax, (i + 1.0) / n - f, f - double(i) / n});
    }
    CHECK(dmax < 1.95 / std::sqrt(double(n)));
    const double var4 = 24.0 / (d * (d + 1) * (d + 2) * (d + 3)) - std::pow(2.0 / (d * (d + 1)), 2);
    CHECK(std::abs(m4 - 2.0 / (d * (d + 1))) < 5.0 * std::sqrt(var4 / n));
}

TEST_CASE("mixing") {
    const std::vector<WaveFunction> basis{WaveFunction(ComplexVector::Unit(3, 0)),
                                          WaveFunction(ComplexVector::Unit(3, 1))};
    const DensityMatrix w = mix_ensemble(basis);
    ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 0.5;
    CHECK((w.matrix() - expected).norm() < 1e-15);
    CHECK_THROWS_CODE(mix_ensemble(std::vector<WaveFunction>{}), ErrorCode::InvalidArgument);
}

TEST_CASE("psd clamp") {
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    m(0, 0) = 0.6;
    m(1, 1) = 0.4 + 1e-12;
    m(2, 2) = -1e-12;
    const PsdClamp c = clamp_psd(m);
    CHECK(c.clamped == 1);
    CHECK(c.state.report().min_eigenvalue >= -1e-15);
    CHECK(c.state.trace() == doctest::Approx(1.0).epsilon(1e-14));
    m(2, 2) = -1e-6;
    m(1, 1) = 0.4 + 1e-6;
    CHECK_THROWS_CODE(clamp_psd(m), ErrorCode::InvariantViolation);
    CHECK(clamp_psd(ComplexMatrix::Identity(2, 2) * 0.5).clamped == 0);
}

TEST_CASE("conditional density matrix of a Bell state") {
    ComplexVector bell = ComplexVector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const DensityMatrix w = DensityMatrix::pure(WaveFunction(bell));
    const DensityMatrix c0 = conditional_density_matrix(w, 2, 2, 0);
    const DensityMatrix c1 = conditional_density_matrix(w, 2, 2, 1);
    CHECK(std::abs(c0.matrix()(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(c1.matrix()(1, 1) - 1.0) < 1e-14);
    CHECK_THROWS_CODE(conditional_density_matrix(w, 2, 2, 2), ErrorCode::IndexOutOfRange);
    CHECK_THROWS_CODE(conditional_density_matrix(w, 3, 2, 0), ErrorCode::DimensionMismatch);

    const DensityMatrix prod = DensityMatrix::pure(WaveFunction(ComplexVector::Unit(4, 0)));
    CHECK_THROWS_CODE(conditional_density_matrix(prod, 2, 2, 1), ErrorCode::NullConditional);
}

TEST_CASE("conditional density on a two-particle grid") {
    GridModel g;
    g.grid_points = 8;
    g.n_particles = 2;
    RandomStream rng(10, 0);
    const ComplexVector a = WaveFunction::normalized(random_vector(8, rng)).amplitudes();
    const ComplexVector b = WaveFunction::normalized(random_vector(8, rng)).amplitudes();
    ComplexVector prod(64);
    for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j) prod[i * 8 + j] = a[i] * b[j];
    const DensityMatrix w = DensityMatrix::pure(WaveFunction::normalized(prod));
    const DensityMatrix c = conditional_density_matrix(w, g, 3);
    CHECK((c.matrix() - a * a.adjoint()).norm() < 1e-12);
}

TEST_CASE("binary state round trip") {
    RandomStream rng(12, 0);
    const WaveFunction psi = WaveFunction::normalized(random_vector(9, rng));
    std::stringstream ss;
    write_state(ss, psi);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 28 + 9 * 16);
    CHECK(bytes.substr(0, 4) == "QSMS");
    const WaveFunction back = read_wavefunction(ss);
    CHECK((back.amplitudes() - psi.amplitudes()).norm() == 0.0);

    const DensityMatrix w = iph_density_matrix(random_subspace(5, 2, rng));
    std::stringstream sw;
    write_state(sw, w);
    CHECK((read_density_matrix(sw).matrix() - w.matrix()).norm() == 0.0);

    std::stringstream wrong(bytes);
    CHECK_THROWS_CODE(read_density_matrix(wrong), ErrorCode::IoError);
    std::stringstream truncated(bytes.substr(0, 40));
    CHECK_THROWS_CODE(read_wavefunction(truncated), ErrorCode::IoError);
    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::stringstream bad(corrupt);
    CHECK_THROWS_CODE(read_wavefunction(bad), ErrorCode::IoError);
}
