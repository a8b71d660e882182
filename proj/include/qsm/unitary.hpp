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

#include <span>
#include <vector>

#include "qsm/hilbert.hpp"
#include "qsm/state.hpp"

namespace qsm {

/// Exact propagator U(t) = sum_k exp(-i lambda_k t / hbar) |v_k><v_k|.
///
/// One O(d^3) eigendecomposition at construction; every evolution after
/// that is a pure function of (state, t).
class SpectralPropagator {
public:
    explicit SpectralPropagator(HermitianOperator h, double hbar = 1.0);
    SpectralPropagator(HermitianOperator h, SpectralDecomposition spectrum, double hbar = 1.0);

    const HermitianOperator& hamiltonian() const noexcept { return h_; }
    const SpectralDecomposition& spectrum() const noexcept { return spec_; }
    double hbar() const noexcept { return hbar_; }
    Index dim() const noexcept { return h_.dim(); }

    ComplexVector phases(double t) const;
    ComplexMatrix unitary(double t) const;
    /// ||sum_k lambda_k |v_k><v_k| - H||_F.
    double reconstruction_residual() const;

private:
    HermitianOperator h_;
    SpectralDecomposition spec_;
    double hbar_;
};

WaveFunction evolve_wavefunction(const SpectralPropagator& p, const WaveFunction& psi, double t);
/// W(t) = U(t) W U(t)^H.
DensityMatrix evolve_density(const SpectralPropagator& p, const DensityMatrix& w, double t);

/// A density matrix held as sum_j p_j |u_j><u_j| over its nonzero
/// eigenvalues. Evolving the r vectors costs O(r d^2) instead of O(d^3) for
/// U W U^H, which matters for low-rank initial projections.
class FactoredDensity {
public:
    /// Drops eigenvalues below rel_cutoff * largest eigenvalue.
    explicit FactoredDensity(const DensityMatrix& w, double rel_cutoff = 1e-14);

    Index rank() const noexcept { return vectors_.cols(); }
    const RealVector& weights() const noexcept { return weights_; }
    const ComplexMatrix& vectors() const noexcept { return vectors_; }

    DensityMatrix evolve(const SpectralPropagator& p, double t) const;

private:
    RealVector weights_;
    ComplexMatrix vectors_;
};

/// ||evolve(mix(samples)) - mix(evolve(samples))||_F.
double linearity_check(const SpectralPropagator& p, std::span<const WaveFunction> samples, double t);

double energy_expectation(const HermitianOperator& h, const WaveFunction& psi);
double energy_expectation(const HermitianOperator& h, const DensityMatrix& w);

/// Evolution inside an invariant subspace spanned by a subset of the
/// propagator's eigenvectors, carried in eigen-coefficients.
///
/// A state c in the frame has ambient form V_S c; a density matrix X has
/// ambient form V_S X V_S^H. Evolution multiplies by phases only, so a
/// time series costs O(r) or O(r^2) per point instead of O(d^2) or O(d^3).
class EigenFrame {
public:
    EigenFrame(const SpectralPropagator& p, std::vector<Index> indices);
    static EigenFrame full(const SpectralPropagator& p);

    Index size() const noexcept { return basis_.cols(); }
    const ComplexMatrix& basis() const noexcept { return basis_; }
    const RealVector& energies() const noexcept { return energies_; }
    const std::vector<Index>& indices() const noexcept { return indices_; }

    /// Throws InvalidArgument if the state leaks out of the frame by more
    /// than the algebraic tolerance.
    ComplexVector coefficients(const WaveFunction& psi) const;
    ComplexMatrix coefficients(const DensityMatrix& w) const;

    ComplexVector phases(double t) const;
    ComplexVector evolve(const ComplexVector& c, double t) const;
    ComplexMatrix evolve(const ComplexMatrix& x, double t) const;

    WaveFunction to_ambient(const ComplexVector& c) const;
    DensityMatrix to_ambient(const ComplexMatrix& x) const;

private:
    std::vector<Index> indices_;
    ComplexMatrix basis_;
    RealVector energies_;
    double hbar_;
};

}  // namespace qsm
