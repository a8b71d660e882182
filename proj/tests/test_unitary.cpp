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

#include <cmath>
#include <vector>

#include "qsm/qstate.hpp"
#include "qsm/unitary.hpp"
#include "test_support.hpp"

using namespace qsm;
using namespace qsm::testing;

namespace {

// exp(-i H t / hbar) by Taylor series with scaling and squaring; no
// eigendecomposition involved.
ComplexMatrix taylor_exp(const ComplexMatrix& h, double t, double hbar = 1.0) {
    const ComplexMatrix a = h * cplx(0.0, -t / hbar);
    int squarings = 0;
    double norm = a.norm();
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const ComplexMatrix x = a / std::pow(2.0, squarings);
    ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
    ComplexMatrix sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

}  // namespace

TEST_CASE("propagator agrees with a series exponential") {
    RandomStream rng(20, 0);
    const HermitianOperator h = random_hermitian(24, rng);
    const SpectralPropagator p(h);
    CHECK(p.reconstruction_residual() < 1e-10 * h.norm());
    for (double t : {0.0, 0.3, 2.0, 10.0}) {
        const ComplexMatrix u = p.unitary(t);
        CHECK((u.adjoint() * u - ComplexMatrix::Identity(24, 24)).norm() < 1e-10);
        CHECK((u - taylor_exp(h.matrix(), t)).norm() < 1e-8);
    }
    CHECK((p.unitary(1.1) * p.unitary(0.7) - p.unitary(1.8)).norm() < 1e-10);
}

TEST_CASE("two-level oscillation") {
    const double omega = 1.7;
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = omega / 2.0;
    const SpectralPropagator p{HermitianOperator(m)};
    const WaveFunction up(ComplexVector::Unit(2, 0));
    for (double t : {0.1, 1.0, 3.3}) {
        const WaveFunction s = evolve_wavefunction(p, up, t);
        CHECK(std::norm(s.amplitudes()[1]) == doctest::Approx(std::pow(std::sin(omega * t / 2.0), 2)).epsilon(1e-12));
    }
}

TEST_CASE("hbar rescales time") {
    RandomStream rng(21, 0);
    const HermitianOperator h = random_hermitian(6, rng);
    const SpectralPropagator p1(h, 1.0), p2(h, 2.0);
    CHECK((p1.unitary(1.3) - p2.unitary(2.6)).norm() < 1e-12);
    CHECK_THROWS_CODE(SpectralPropagator(h, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("conservation under unitary evolution") {
    RandomStream rng(22, 0);
    const HermitianOperator h = random_hermitian(32, rng);
    const SpectralPropagator p(h);
    const WaveFunction psi = WaveFunction::normalized(random_vector(32, rng));
    const ComplexMatrix a = random_matrix(32, 4, rng);
    const DensityMatrix w = DensityMatrix::from_matrix(a * a.adjoint() / (a * a.adjoint()).trace().real());
    const double e0 = energy_expectation(h, psi), ew0 = energy_expectation(h, w);
    for (double t : {0.5, 5.0, 50.0}) {
        const WaveFunction pt = evolve_wavefunction(p, psi, t);
        CHECK(std::abs(pt.amplitudes().norm() - 1.0) < 1e-12);
        CHECK(std::abs(energy_expectation(h, pt) - e0) < 1e-9);
        const DensityMatrix wt = evolve_density(p, w, t);
        CHECK(std::abs(wt.trace() - 1.0) < 1e-12);
        CHECK(std::abs(purity(wt) - purity(w)) < 1e-12);
        CHECK(std::abs(energy_expectation(h, wt) - ew0) < 1e-9);
        CHECK(wt.report().min_eigenvalue > -1e-12);
    }
}

TEST_CASE("pure density evolves like its wave function") {
    RandomStream rng(23, 0);
    const SpectralPropagator p(random_hermitian(16, rng));
    const WaveFunction psi = WaveFunction::normalized(random_vector(16, rng));
    const DensityMatrix w = evolve_density(p, DensityMatrix::pure(psi), 3.0);
    CHECK((w.matrix() - evolve_wavefunction(p, psi, 3.0).outer()).norm() < 1e-12);
}

TEST_CASE("dynamics commutes with mixing") {
    RandomStream rng(24, 0);
    const SpectralPropagator p(random_hermitian(64, rng));
    std::vector<WaveFunction> samples;
    for (int i = 0; i < 100; ++i) samples.push_back(WaveFunction::normalized(random_vector(64, rng)));
    CHECK(linearity_check(p, samples, 10.0) <= 1e-8);
}

TEST_CASE("factored density evolution") {
    RandomStream rng(25, 0);
    const SpectralPropagator p(random_hermitian(20, rng));
    std::vector<ComplexVector> vs{random_vector(20, rng), random_vector(20, rng), random_vector(20, rng)};
    const DensityMatrix w = iph_density_matrix(orthonormalize(vs));
    const FactoredDensity f(w);
    CHECK(f.rank() == 3);
    CHECK(f.weights().sum() == doctest::Approx(1.0));
    CHECK((f.evolve(p, 4.0).matrix() - evolve_density(p, w, 4.0).matrix()).norm() < 1e-12);
}

TEST_CASE("eigen frame evolution") {
    RandomStream rng(26, 0);
    const SpectralPropagator p(random_hermitian(12, rng));
    const std::vector<Index> idx{2, 5, 7};
    const EigenFrame frame(p, idx);
    CHECK(frame.size() == 3);
    const Subspace s = eigen_subspace(p.spectrum(), idx);
    RandomStream r2(26, 1);
    const WaveFunction psi = sample_mu_s(s, r2);
    const ComplexVector c = frame.coefficients(psi);
    for (double t : {0.0, 1.5, 7.0}) {
        const WaveFunction direct = evolve_wavefunction(p, psi, t);
        CHECK((frame.to_ambient(frame.evolve(c, t)).amplitudes() - direct.amplitudes()).norm() < 1e-12);
    }
    const DensityMatrix w = iph_density_matrix(s);
    const ComplexMatrix x = frame.coefficients(w);
    CHECK((frame.to_ambient(frame.evolve(x, 2.0)).matrix() - evolve_density(p, w, 2.0).matrix()).norm() < 1e-12);

    CHECK_THROWS_CODE(frame.coefficients(WaveFunction::normalized(random_vector(12, rng))), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(EigenFrame(p, std::vector<Index>{12}), ErrorCode::IndexOutOfRange);
    CHECK(EigenFrame::full(p).size() == 12);
}

TEST_CASE("dimension checks") {
    RandomStream rng(27, 0);
    const SpectralPropagator p(random_hermitian(4, rng));
    CHECK_THROWS_CODE(evolve_wavefunction(p, WaveFunction(ComplexVector::Unit(3, 0)), 1.0), ErrorCode::DimensionMismatch);
}
