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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qsm {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Largest ambient dimension the dense layer is meant for.
inline constexpr Index kAmbientDimCap = 4096;

bool is_finite(const ComplexMatrix& m);

/// Hermitian matrix, validated on construction.
///
/// The stored matrix is replaced by (M + M^H)/2 after validation, so it is
/// exactly self-adjoint. Throws NotHermitian when ||M - M^H||_F exceeds the
/// algebraic tolerance relative to max(1, ||M||_F).
class HermitianOperator {
public:
    explicit HermitianOperator(ComplexMatrix m);

    static HermitianOperator diagonal(const RealVector& d);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double norm() const { return m_.norm(); }
    bool is_diagonal(double tol) const;

private:
    ComplexMatrix m_;
};

/// An ordered orthonormal basis of a subspace of C^n, stored as the columns
/// of an n x d matrix.
class Subspace {
public:
    /// Validates orthonormality of the columns (RankDeficient otherwise).
    static Subspace from_orthonormal(ComplexMatrix basis);
    static Subspace full(Index dim);

    Index ambient_dim() const noexcept { return basis_.rows(); }
    Index dim() const noexcept { return basis_.cols(); }
    const ComplexMatrix& basis() const noexcept { return basis_; }
    ComplexVector vector(Index i) const { return basis_.col(i); }

private:
    explicit Subspace(ComplexMatrix basis) : basis_(std::move(basis)) {}
    ComplexMatrix basis_;
};

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// A vector whose residual norm is below 1e-10 of its own norm is treated as
/// linearly dependent and raises RankDeficient.
Subspace orthonormalize(std::span<const ComplexVector> vectors);

HermitianOperator projector(const Subspace& s);

struct SpectralDecomposition {
    RealVector eigenvalues;     // ascending
    ComplexMatrix eigenvectors; // column k pairs with eigenvalues[k]
};

SpectralDecomposition spectral_decompose(const HermitianOperator& h);

/// Indices k with eigenvalues[k] in the closed window [e, e + delta_e].
std::vector<Index> window_indices(const SpectralDecomposition& spec, double e, double delta_e);

Subspace energy_shell(const SpectralDecomposition& spec, double e, double delta_e);
Subspace energy_shell(const HermitianOperator& h, double e, double delta_e);

/// Subspace spanned by the listed eigenvector columns.
Subspace eigen_subspace(const SpectralDecomposition& spec, std::span<const Index> indices);

/// max_k ||H v_k - lambda_k v_k||.
double max_eigen_residual(const HermitianOperator& h, const SpectralDecomposition& spec);

}  // namespace qsm
