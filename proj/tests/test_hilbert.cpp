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

#include <vector>

#include "qsm/hilbert.hpp"
#include "test_support.hpp"

using namespace qsm;
using namespace qsm::testing;

TEST_CASE("hermitian operator validation") {
    ComplexMatrix m(2, 2);
    m << 1.0, cplx(0, 1), cplx(0, -1), -1.0;
    const HermitianOperator h(m);
    CHECK(h.dim() == 2);
    CHECK((h.matrix() - h.matrix().adjoint()).norm() == 0.0);

    ComplexMatrix bad = m;
    bad(0, 1) = 2.0;
    CHECK_THROWS_CODE(HermitianOperator(bad), ErrorCode::NotHermitian);

    ComplexMatrix near = m;
    near(0, 1) += 1e-13;
    const HermitianOperator h2(near);
    CHECK((h2.matrix() - h2.matrix().adjoint()).norm() == 0.0);

    CHECK_THROWS_CODE(HermitianOperator(ComplexMatrix(2, 3)), ErrorCode::DimensionMismatch);
    ComplexMatrix nan = m;
    nan(0, 0) = std::nan("");
    CHECK_THROWS_CODE(HermitianOperator(nan), ErrorCode::InvalidArgument);
}

TEST_CASE("gram-schmidt matches a hand computation") {
    ComplexVector a(3), b(3);
    a << 1, 1, 0;
    b << 1, 0, 1;
    const std::vector<ComplexVector> vs{a, b};
    const Subspace s = orthonormalize(vs);
    ComplexVector e1(3), e2(3);
    e1 << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
    e2 << 1 / std::sqrt(6.0), -1 / std::sqrt(6.0), 2 / std::sqrt(6.0);
    CHECK((s.vector(0) - e1).norm() < 1e-14);
    CHECK((s.vector(1) - e2).norm() < 1e-14);
}

TEST_CASE("gram-schmidt rejects dependent input") {
    ComplexVector a(3), b(3), z = ComplexVector::Zero(3);
    a << 1, 2, 3;
    b = cplx(0, 2) * a;
    CHECK_THROWS_CODE(orthonormalize(std::vector<ComplexVector>{a, b}), ErrorCode::RankDeficient);
    CHECK_THROWS_CODE(orthonormalize(std::vector<ComplexVector>{z}), ErrorCode::RankDeficient);
    CHECK_THROWS_CODE(orthonormalize(std::vector<ComplexVector>{a, a, a, a}), ErrorCode::RankDeficient);
    ComplexVector c = a;
    c[0] += 1e-13;
    CHECK_THROWS_CODE(orthonormalize(std::vector<ComplexVector>{a, c}), ErrorCode::RankDeficient);
}

TEST_CASE("subspace construction") {
    CHECK(Subspace::full(5).dim() == 5);
    CHECK((Subspace::full(4).basis() - ComplexMatrix::Identity(4, 4)).norm() == 0.0);
    ComplexMatrix b = ComplexMatrix::Identity(4, 2);
    b(0, 1) = 0.5;
    CHECK_THROWS_CODE(Subspace::from_orthonormal(b), ErrorCode::RankDeficient);
    CHECK_THROWS_CODE(Subspace::from_orthonormal(ComplexMatrix::Identity(2, 3)), ErrorCode::InvalidArgument);
}

TEST_CASE("projector properties on random subspaces") {
    RandomStream rng(1, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 3 + static_cast<Index>(rng.uniform_index(10));
        const Index d = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        std::vector<ComplexVector> vs;
        for (Index i = 0; i < d; ++i) vs.push_back(random_vector(n, rng));
        const Subspace s = orthonormalize(vs);
        CHECK((s.basis().adjoint() * s.basis() - ComplexMatrix::Identity(d, d)).norm() < 1e-12);
        const ComplexMatrix p = projector(s).matrix();
        CHECK((p * p - p).norm() < 1e-12);
        CHECK(std::abs(p.trace().real() - d) < 1e-12);
        for (const auto& v : vs) CHECK((p * v - v).norm() < 1e-10 * v.norm());
    }
}

TEST_CASE("spectral decomposition") {
    ComplexMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const SpectralDecomposition s2 = spectral_decompose(HermitianOperator(x));
    CHECK(s2.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s2.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));

    RandomStream rng(2, 0);
    for (Index d : {1, 5, 32, 64}) {
        const HermitianOperator h = random_hermitian(d, rng);
        const SpectralDecomposition s = spectral_decompose(h);
        for (Index k = 1; k < d; ++k) CHECK(s.eigenvalues[k] >= s.eigenvalues[k - 1]);
        const ComplexMatrix& v = s.eigenvectors;
        CHECK((v.adjoint() * v - ComplexMatrix::Identity(d, d)).norm() < 1e-12 * d);
        CHECK(max_eigen_residual(h, s) < 1e-10 * std::max(1.0, h.norm()));
        const ComplexMatrix rec = v * s.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint();
        CHECK((rec - h.matrix()).norm() < 1e-10 * std::max(1.0, h.norm()));
    }
}

TEST_CASE("energy windows") {
    const HermitianOperator h = HermitianOperator::diagonal((RealVector(5) << -2, -1, 0, 1, 2).finished());
    const SpectralDecomposition s = spectral_decompose(h);
    CHECK(window_indices(s, -1.0, 2.0) == std::vector<Index>{1, 2, 3});
    CHECK(window_indices(s, -0.5, 1.0) == std::vector<Index>{2});
    CHECK(window_indices(s, 2.5, 1.0).empty());
    CHECK_THROWS_CODE(window_indices(s, 0.0, 0.0), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE(energy_shell(s, 2.5, 1.0), ErrorCode::EmptyShell);
    const Subspace shell = energy_shell(h, -1.0, 2.0);
    CHECK(shell.dim() == 3);
    CHECK(shell.ambient_dim() == 5);
    const std::vector<Index> idx{0, 4};
    const Subspace e = eigen_subspace(s, idx);
    CHECK(e.dim() == 2);
    const std::vector<Index> bad{7};
    CHECK_THROWS_CODE(eigen_subspace(s, bad), ErrorCode::IndexOutOfRange);
}

TEST_CASE("diagonal detection") {
    CHECK(HermitianOperator::diagonal(RealVector::Ones(3)).is_diagonal(0.0));
    ComplexMatrix m = ComplexMatrix::Identity(3, 3);
    m(0, 1) = m(1, 0) = 1e-3;
    CHECK_FALSE(HermitianOperator(m).is_diagonal(1e-6));
}
