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
#include "qsm/unitary.hpp"

#include <cmath>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"
#include "qsm/qstate.hpp"

namespace qsm {

namespace {

ComplexVector phase_vector(const RealVector& energies, double t, double hbar) {
    ComplexVector ph(energies.size());
    for (Index k = 0; k < energies.size(); ++k) ph[k] = std::polar(1.0, -energies[k] * t / hbar);
    return ph;
}

}  // namespace

SpectralPropagator::SpectralPropagator(HermitianOperator h, double hbar)
    : SpectralPropagator(h, spectral_decompose(h), hbar) {}

SpectralPropagator::SpectralPropagator(HermitianOperator h, SpectralDecomposition spectrum, double hbar)
    : h_(std::move(h)), spec_(std::move(spectrum)), hbar_(hbar) {
    if (!(hbar_ > 0.0)) fail(ErrorCode::InvalidArgument, "hbar must be positive");
    if (spec_.eigenvectors.rows() != h_.dim() || spec_.eigenvectors.cols() != h_.dim())
        fail(ErrorCode::DimensionMismatch, "spectrum does not match the Hamiltonian");
}

ComplexVector SpectralPropagator::phases(double t) const {
    return phase_vector(spec_.eigenvalues, t, hbar_);
}

ComplexMatrix SpectralPropagator::unitary(double t) const {
    const ComplexMatrix& v = spec_.eigenvectors;
    return v * phases(t).asDiagonal() * v.adjoint();
}

double SpectralPropagator::reconstruction_residual() const {
    const ComplexMatrix& v = spec_.eigenvectors;
    return (v * spec_.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint() - h_.matrix()).norm();
}

WaveFunction evolve_wavefunction(const SpectralPropagator& p, const WaveFunction& psi, double t) {
    if (psi.dim() != p.dim()) fail(ErrorCode::DimensionMismatch, "state and propagator differ in dimension");
    const ComplexMatrix& v = p.spectrum().eigenvectors;
    ComplexVector c = v.adjoint() * psi.amplitudes();
    c = c.cwiseProduct(p.phases(t));
    return WaveFunction(v * c);
}

DensityMatrix evolve_density(const SpectralPropagator& p, const DensityMatrix& w, double t) {
    if (w.dim() != p.dim()) fail(ErrorCode::DimensionMismatch, "state and propagator differ in dimension");
    const ComplexMatrix u = p.unitary(t);
    const ComplexMatrix uw = u * w.matrix();
    return DensityMatrix::from_trusted(uw * u.adjoint());
}

double linearity_check(const SpectralPropagator& p, std::span<const WaveFunction> samples, double t) {
    const DensityMatrix mixed_then_evolved = evolve_density(p, mix_ensemble(samples), t);
    std::vector<WaveFunction> evolved;
    evolved.reserve(samples.size());
    for (const auto& s : samples) evolved.push_back(evolve_wavefunction(p, s, t));
    const DensityMatrix evolved_then_mixed = mix_ensemble(evolved);
    return (mixed_then_evolved.matrix() - evolved_then_mixed.matrix()).norm();
}

FactoredDensity::FactoredDensity(const DensityMatrix& w, double rel_cutoff) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(w.matrix());
    const RealVector& lam = es.eigenvalues();
    const double cut = rel_cutoff * lam.maxCoeff();
    std::vector<Index> keep;
    for (Index k = lam.size() - 1; k >= 0; --k)
        if (lam[k] > cut) keep.push_back(k);
    weights_.resize(static_cast<Index>(keep.size()));
    vectors_.resize(w.dim(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        weights_[static_cast<Index>(j)] = lam[keep[j]];
        vectors_.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
    }
    weights_ /= weights_.sum();
}

DensityMatrix FactoredDensity::evolve(const SpectralPropagator& p, double t) const {
    if (vectors_.rows() != p.dim()) fail(ErrorCode::DimensionMismatch, "state and propagator differ in dimension");
    const ComplexMatrix& v = p.spectrum().eigenvectors;
    const ComplexMatrix c = p.phases(t).asDiagonal() * (v.adjoint() * vectors_);
    const ComplexMatrix evolved = v * c;
    const ComplexMatrix scaled = evolved * weights_.cast<cplx>().asDiagonal();
    return DensityMatrix::from_trusted(scaled * evolved.adjoint());
}

double energy_expectation(const HermitianOperator& h, const WaveFunction& psi) {
    return psi.amplitudes().dot(h.matrix() * psi.amplitudes()).real();
}

double energy_expectation(const HermitianOperator& h, const DensityMatrix& w) {
    return (h.matrix() * w.matrix()).trace().real();
}

EigenFrame::EigenFrame(const SpectralPropagator& p, std::vector<Index> indices)
    : indices_(std::move(indices)), hbar_(p.hbar()) {
    if (indices_.empty()) fail(ErrorCode::InvalidArgument, "frame needs at least one eigenvector");
    const auto& spec = p.spectrum();
    basis_.resize(p.dim(), static_cast<Index>(indices_.size()));
    energies_.resize(static_cast<Index>(indices_.size()));
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        const Index k = indices_[j];
        if (k < 0 || k >= p.dim()) fail(ErrorCode::IndexOutOfRange, "eigen index out of range");
        basis_.col(static_cast<Index>(j)) = spec.eigenvectors.col(k);
        energies_[static_cast<Index>(j)] = spec.eigenvalues[k];
    }
}

EigenFrame EigenFrame::full(const SpectralPropagator& p) {
    std::vector<Index> all(static_cast<std::size_t>(p.dim()));
    for (Index k = 0; k < p.dim(); ++k) all[static_cast<std::size_t>(k)] = k;
    return EigenFrame(p, std::move(all));
}

ComplexVector EigenFrame::coefficients(const WaveFunction& psi) const {
    if (psi.dim() != basis_.rows()) fail(ErrorCode::DimensionMismatch, "state and frame differ in dimension");
    ComplexVector c = basis_.adjoint() * psi.amplitudes();
    const double leak = std::abs(1.0 - c.squaredNorm());
    if (leak > numeric_policy().algebraic_tol)
        fail(ErrorCode::InvalidArgument, "state is not inside the frame (leak " + std::to_string(leak) + ")");
    return c;
}

ComplexMatrix EigenFrame::coefficients(const DensityMatrix& w) const {
    if (w.dim() != basis_.rows()) fail(ErrorCode::DimensionMismatch, "state and frame differ in dimension");
    ComplexMatrix x = basis_.adjoint() * w.matrix() * basis_;
    const double leak = std::abs(1.0 - x.trace().real());
    if (leak > numeric_policy().algebraic_tol)
        fail(ErrorCode::InvalidArgument, "state is not inside the frame (leak " + std::to_string(leak) + ")");
    return x;
}

ComplexVector EigenFrame::phases(double t) const { return phase_vector(energies_, t, hbar_); }

ComplexVector EigenFrame::evolve(const ComplexVector& c, double t) const {
    if (c.size() != size()) fail(ErrorCode::DimensionMismatch, "coefficients and frame differ in size");
    return c.cwiseProduct(phases(t));
}

ComplexMatrix EigenFrame::evolve(const ComplexMatrix& x, double t) const {
    if (x.rows() != size() || x.cols() != size())
        fail(ErrorCode::DimensionMismatch, "coefficients and frame differ in size");
    const ComplexVector ph = phases(t);
    return ph.asDiagonal() * x * ph.conjugate().asDiagonal();
}

WaveFunction EigenFrame::to_ambient(const ComplexVector& c) const { return WaveFunction(basis_ * c); }

DensityMatrix EigenFrame::to_ambient(const ComplexMatrix& x) const {
    return DensityMatrix::from_trusted(basis_ * x * basis_.adjoint());
}

}  // namespace qsm
