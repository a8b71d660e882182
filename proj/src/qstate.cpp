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
#include "qsm/qstate.hpp"

#include <cmath>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"

namespace qsm {

WaveFunction::WaveFunction(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) fail(ErrorCode::InvalidArgument, "wave function needs dim >= 1");
    if (!is_finite(amps_)) fail(ErrorCode::InvalidArgument, "wave function has non-finite entries");
    const double err = std::abs(amps_.norm() - 1.0);
    if (err > numeric_policy().algebraic_tol)
        fail(ErrorCode::InvalidArgument, "wave function norm deviates from 1 by " + std::to_string(err));
}

WaveFunction WaveFunction::normalized(ComplexVector v) {
    if (v.size() < 1 || !is_finite(v)) fail(ErrorCode::InvalidArgument, "cannot normalize vector");
    const double n = v.norm();
    if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "cannot normalize the zero vector");
    return WaveFunction(v / n);
}

bool same_ray(const WaveFunction& a, const WaveFunction& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return std::abs(a.amplitudes().dot(b.amplitudes())) >= 1.0 - tol;
}

namespace {

void check_density_basics(const ComplexMatrix& m) {
    if (m.rows() < 1 || m.rows() != m.cols())
        fail(ErrorCode::DimensionMismatch, "density matrix must be square");
    if (!is_finite(m)) fail(ErrorCode::InvalidArgument, "density matrix has non-finite entries");
    const double tol = numeric_policy().algebraic_tol;
    const double herm = (m - m.adjoint()).norm();
    if (herm > tol) fail(ErrorCode::NotHermitian, "density matrix is not Hermitian");
    const double tr = std::abs(m.trace() - cplx(1.0, 0.0));
    if (tr > tol) fail(ErrorCode::InvalidArgument, "density matrix trace deviates from 1 by " + std::to_string(tr));
}

}  // namespace

DensityMatrix DensityMatrix::from_trusted(ComplexMatrix m) {
    check_density_basics(m);
    ComplexMatrix sym = 0.5 * (m + m.adjoint());
    return DensityMatrix(std::move(sym));
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
    DensityMatrix w = from_trusted(std::move(m));
    const double min_eig = w.report().min_eigenvalue;
    if (min_eig < -numeric_policy().algebraic_tol)
        fail(ErrorCode::InvariantViolation,
             "density matrix has eigenvalue " + std::to_string(min_eig));
    return w;
}

DensityMatrix DensityMatrix::pure(const WaveFunction& psi) { return from_trusted(psi.outer()); }

DensityReport DensityMatrix::report() const {
    DensityReport r;
    r.hermiticity = (m_ - m_.adjoint()).norm();
    r.trace_error = std::abs(m_.trace() - cplx(1.0, 0.0));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

void IPHSpec::validate() const {
    if (subspaces.empty()) fail(ErrorCode::InvalidArgument, "IPH needs at least one subspace");
    if (mode == IPHMode::Strong && subspaces.size() != 1)
        fail(ErrorCode::InvalidArgument, "strong IPH takes exactly one subspace");
    const Index ambient = subspaces.front().ambient_dim();
    for (const auto& s : subspaces)
        if (s.ambient_dim() != ambient)
            fail(ErrorCode::DimensionMismatch, "admissible subspaces live in different spaces");
    if (mode == IPHMode::Weak && selected_index >= subspaces.size())
        fail(ErrorCode::IndexOutOfRange, "selected_index " + std::to_string(selected_index) +
                                             " outside the admissible list of " +
                                             std::to_string(subspaces.size()));
}

const Subspace& IPHSpec::selected() const {
    validate();
    return mode == IPHMode::Strong ? subspaces.front() : subspaces[selected_index];
}

DensityMatrix iph_density_matrix(const Subspace& s) {
    const ComplexMatrix& b = s.basis();
    return DensityMatrix::from_trusted(b * b.adjoint() / static_cast<double>(s.dim()));
}

DensityMatrix weak_iph(const IPHSpec& spec) {
    if (spec.mode != IPHMode::Weak) fail(ErrorCode::InvalidArgument, "weak_iph needs a weak spec");
    return iph_density_matrix(spec.selected());
}

DensityMatrix initial_density(const IPHSpec& spec) { return iph_density_matrix(spec.selected()); }

WaveFunction sample_mu_s(const Subspace& s, RandomStream& rng) {
    ComplexVector z(s.dim());
    for (Index k = 0; k < z.size(); ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        z[k] = cplx(re, im);
    }
    // A zero draw has probability zero; normalized() would reject it.
    return WaveFunction::normalized(s.basis() * z);
}

DensityMatrix mix_ensemble(std::span<const WaveFunction> samples) {
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "mix_ensemble needs samples");
    const Index d = samples.front().dim();
    ComplexMatrix psi(d, static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].dim() != d) fail(ErrorCode::DimensionMismatch, "samples differ in dimension");
        psi.col(static_cast<Index>(i)) = samples[i].amplitudes();
    }
    ComplexMatrix w = ComplexMatrix::Zero(d, d);
    w.selfadjointView<Eigen::Lower>().rankUpdate(psi, 1.0 / static_cast<double>(samples.size()));
    ComplexMatrix full = w.selfadjointView<Eigen::Lower>();
    return DensityMatrix::from_trusted(std::move(full));
}

double purity(const DensityMatrix& w) { return w.matrix().squaredNorm(); }

PsdClamp clamp_psd(const ComplexMatrix& m) {
    const double tol = numeric_policy().algebraic_tol;
    const ComplexMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    RealVector lam = es.eigenvalues();
    std::size_t clamped = 0;
    for (Index k = 0; k < lam.size(); ++k) {
        if (lam[k] < -tol)
            fail(ErrorCode::InvariantViolation, "eigenvalue " + std::to_string(lam[k]) + " below clamp tolerance");
        if (lam[k] < 0.0) {
            lam[k] = 0.0;
            ++clamped;
        }
    }
    if (clamped == 0) return {DensityMatrix::from_trusted(sym), 0};
    lam /= lam.sum();
    const ComplexMatrix& v = es.eigenvectors();
    return {DensityMatrix::from_trusted(v * lam.cast<cplx>().asDiagonal() * v.adjoint()), clamped};
}

DensityMatrix conditional_density_matrix(const DensityMatrix& w, Index system_dim, Index env_dim,
                                         Index env_index) {
    if (system_dim < 1 || env_dim < 1 || w.dim() != system_dim * env_dim)
        fail(ErrorCode::DimensionMismatch, "state does not match the bipartition");
    if (env_index < 0 || env_index >= env_dim)
        fail(ErrorCode::IndexOutOfRange, "environment configuration out of range");
    ComplexMatrix block(system_dim, system_dim);
    for (Index x = 0; x < system_dim; ++x)
        for (Index xp = 0; xp < system_dim; ++xp)
            block(x, xp) = w.matrix()(x * env_dim + env_index, xp * env_dim + env_index);
    const double norm = block.trace().real();
    if (!(norm > numeric_policy().degenerate_mass))
        fail(ErrorCode::NullConditional, "conditional normalization below threshold");
    return DensityMatrix::from_trusted(block / norm);
}

DensityMatrix conditional_density_matrix(const DensityMatrix& w, const GridModel& g,
                                         int env_grid_index) {
    g.validate();
    if (g.n_particles != 2) fail(ErrorCode::InvalidArgument, "conditional density needs two particles");
    return conditional_density_matrix(w, g.grid_points, g.grid_points, env_grid_index);
}

}  // namespace qsm
