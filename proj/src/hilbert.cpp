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
#include "qsm/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"

namespace qsm {

bool is_finite(const ComplexMatrix& m) {
    return m.array().real().allFinite() && m.array().imag().allFinite();
}

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
        fail(ErrorCode::DimensionMismatch, "operator must be square with dim >= 1");
    if (!is_finite(m_)) fail(ErrorCode::InvalidArgument, "operator has non-finite entries");
    const double scale = std::max(1.0, m_.norm());
    const double asym = (m_ - m_.adjoint()).norm();
    if (asym > numeric_policy().algebraic_tol * scale)
        fail(ErrorCode::NotHermitian,
             "||H - H^H||_F = " + std::to_string(asym) + " exceeds tolerance");
    ComplexMatrix sym = 0.5 * (m_ + m_.adjoint());
    m_ = std::move(sym);
}

HermitianOperator HermitianOperator::diagonal(const RealVector& d) {
    return HermitianOperator(d.cast<cplx>().asDiagonal().toDenseMatrix());
}

bool HermitianOperator::is_diagonal(double tol) const {
    ComplexMatrix off = m_;
    off.diagonal().setZero();
    return off.norm() <= tol;
}

Subspace Subspace::from_orthonormal(ComplexMatrix basis) {
    if (basis.rows() < 1 || basis.cols() < 1 || basis.cols() > basis.rows())
        fail(ErrorCode::InvalidArgument, "subspace needs 1 <= dim <= ambient_dim");
    if (!is_finite(basis)) fail(ErrorCode::InvalidArgument, "basis has non-finite entries");
    const ComplexMatrix gram = basis.adjoint() * basis;
    const double err = (gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).norm();
    if (err > numeric_policy().algebraic_tol)
        fail(ErrorCode::RankDeficient,
             "basis is not orthonormal (gram error " + std::to_string(err) + ")");
    return Subspace(std::move(basis));
}

Subspace Subspace::full(Index dim) {
    if (dim < 1) fail(ErrorCode::InvalidArgument, "dimension must be positive");
    return Subspace(ComplexMatrix::Identity(dim, dim));
}

Subspace orthonormalize(std::span<const ComplexVector> vectors) {
    if (vectors.empty()) fail(ErrorCode::InvalidArgument, "orthonormalize needs at least one vector");
    const Index n = vectors.front().size();
    if (n < 1) fail(ErrorCode::InvalidArgument, "vectors must have dim >= 1");
    if (static_cast<Index>(vectors.size()) > n)
        fail(ErrorCode::RankDeficient, "more vectors than ambient dimension");

    const double tol = numeric_policy().algebraic_tol;
    ComplexMatrix basis(n, static_cast<Index>(vectors.size()));
    Index done = 0;
    for (const auto& v : vectors) {
        if (v.size() != n) fail(ErrorCode::DimensionMismatch, "vectors differ in dimension");
        if (!is_finite(v)) fail(ErrorCode::InvalidArgument, "vector has non-finite entries");
        const double original = v.norm();
        if (original == 0.0) fail(ErrorCode::RankDeficient, "zero vector in input");
        ComplexVector r = v;
        for (int pass = 0; pass < 2; ++pass) {
            for (Index j = 0; j < done; ++j) {
                r -= basis.col(j).dot(r) * basis.col(j);
            }
        }
        const double rn = r.norm();
        if (rn <= tol * original)
            fail(ErrorCode::RankDeficient,
                 "vector " + std::to_string(done) + " is linearly dependent on its predecessors");
        basis.col(done) = r / rn;
        ++done;
    }
    return Subspace::from_orthonormal(std::move(basis));
}

HermitianOperator projector(const Subspace& s) {
    return HermitianOperator(s.basis() * s.basis().adjoint());
}

SpectralDecomposition spectral_decompose(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success)
        fail(ErrorCode::InvariantViolation, "eigen solver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

std::vector<Index> window_indices(const SpectralDecomposition& spec, double e, double delta_e) {
    if (!(delta_e > 0.0)) fail(ErrorCode::InvalidArgument, "deltaE must be positive");
    std::vector<Index> out;
    const double hi = e + delta_e;
    for (Index k = 0; k < spec.eigenvalues.size(); ++k) {
        const double lam = spec.eigenvalues[k];
        if (lam >= e && lam <= hi) out.push_back(k);
    }
    return out;
}

Subspace eigen_subspace(const SpectralDecomposition& spec, std::span<const Index> indices) {
    if (indices.empty()) fail(ErrorCode::EmptyShell, "no eigenvectors selected");
    ComplexMatrix basis(spec.eigenvectors.rows(), static_cast<Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const Index k = indices[j];
        if (k < 0 || k >= spec.eigenvectors.cols())
            fail(ErrorCode::IndexOutOfRange, "eigenvector index out of range");
        basis.col(static_cast<Index>(j)) = spec.eigenvectors.col(k);
    }
    return Subspace::from_orthonormal(std::move(basis));
}

Subspace energy_shell(const SpectralDecomposition& spec, double e, double delta_e) {
    const auto idx = window_indices(spec, e, delta_e);
    if (idx.empty())
        fail(ErrorCode::EmptyShell, "no eigenvalue in [" + std::to_string(e) + ", " +
                                        std::to_string(e + delta_e) + "]");
    return eigen_subspace(spec, idx);
}

Subspace energy_shell(const HermitianOperator& h, double e, double delta_e) {
    if (!(delta_e > 0.0)) fail(ErrorCode::InvalidArgument, "deltaE must be positive");
    return energy_shell(spectral_decompose(h), e, delta_e);
}

double max_eigen_residual(const HermitianOperator& h, const SpectralDecomposition& spec) {
    const ComplexMatrix r =
        h.matrix() * spec.eigenvectors - spec.eigenvectors * spec.eigenvalues.cast<cplx>().asDiagonal();
    return r.colwise().norm().maxCoeff();
}

}  // namespace qsm
