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
#include "qsm/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"

namespace qsm {

int occupation(unsigned index, int site, int n_sites) {
    return static_cast<int>((index >> (n_sites - 1 - site)) & 1U);
}

namespace {

void check_sites(int n_sites) {
    if (n_sites < 1) fail(ErrorCode::InvalidArgument, "lattice needs at least one site");
    if (n_sites > kMaxLatticeSites || (Index{1} << n_sites) > kAmbientDimCap)
        fail(ErrorCode::TooLarge, "2^" + std::to_string(n_sites) + " exceeds the ambient cap");
}

}  // namespace

HermitianOperator build_spin_chain(int n_sites, double coupling, double field) {
    check_sites(n_sites);
    if (!std::isfinite(coupling) || !std::isfinite(field))
        fail(ErrorCode::InvalidArgument, "couplings must be finite");
    const Index dim = Index{1} << n_sites;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (Index s = 0; s < dim; ++s) {
        const auto u = static_cast<unsigned>(s);
        double diag = 0.0;
        for (int i = 0; i < n_sites; ++i) diag += field * (occupation(u, i, n_sites) - 0.5);
        h(s, s) = diag;
        for (int i = 0; i + 1 < n_sites; ++i) {
            if (occupation(u, i, n_sites) != occupation(u, i + 1, n_sites)) {
                const unsigned flipped =
                    u ^ (1U << (n_sites - 1 - i)) ^ (1U << (n_sites - 2 - i));
                h(static_cast<Index>(flipped), s) += coupling;
            }
        }
    }
    return HermitianOperator(std::move(h));
}

HermitianOperator build_spin_chain(const LatticeModel& model) {
    return build_spin_chain(model.n_sites, model.coupling, model.field);
}

HermitianOperator number_operator(int n_sites) {
    check_sites(n_sites);
    const Index dim = Index{1} << n_sites;
    RealVector d(dim);
    for (Index s = 0; s < dim; ++s) {
        int count = 0;
        for (int i = 0; i < n_sites; ++i) count += occupation(static_cast<unsigned>(s), i, n_sites);
        d[s] = count;
    }
    return HermitianOperator::diagonal(d);
}

void GridModel::validate() const {
    if (n_particles != 1 && n_particles != 2)
        fail(ErrorCode::InvalidArgument, "grid model supports 1 or 2 particles");
    if (grid_points < 8) fail(ErrorCode::InvalidArgument, "grid needs at least 8 points");
    if (!(box_length > 0.0)) fail(ErrorCode::InvalidArgument, "box length must be positive");
    if (!(mass > 0.0)) fail(ErrorCode::InvalidArgument, "mass must be positive");
    if (!(hbar > 0.0)) fail(ErrorCode::InvalidArgument, "hbar must be positive");
    if (!potential.empty() && static_cast<int>(potential.size()) != grid_points)
        fail(ErrorCode::DimensionMismatch, "potential must have one value per grid point");
    if (config_dim() > kAmbientDimCap)
        fail(ErrorCode::TooLarge, "configuration space exceeds the ambient cap");
}

Index GridModel::config_dim() const {
    Index d = 1;
    for (int k = 0; k < n_particles; ++k) d *= grid_points;
    return d;
}

int GridModel::particle_index(Index c, int k) const {
    if (n_particles == 1) return static_cast<int>(c);
    return k == 0 ? static_cast<int>(c / grid_points) : static_cast<int>(c % grid_points);
}

HermitianOperator build_grid_hamiltonian(const GridModel& g) {
    g.validate();
    const int n = g.grid_points;
    const double dx = g.spacing();
    const double t = g.hbar * g.hbar / (2.0 * g.mass * dx * dx);

    // One-body operator, then Kronecker sum for two particles.
    Eigen::MatrixXd one = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        one(j, j) = 2.0 * t + (g.potential.empty() ? 0.0 : g.potential[j]);
        if (j + 1 < n) {
            one(j, j + 1) = -t;
            one(j + 1, j) = -t;
        }
    }
    if (g.n_particles == 1) return HermitianOperator(one.cast<cplx>());

    const Index dim = g.config_dim();
    Eigen::MatrixXd two = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const Index row = static_cast<Index>(a) * n + b;
            for (int c = 0; c < n; ++c) {
                if (one(a, c) != 0.0) two(row, static_cast<Index>(c) * n + b) += one(a, c);
                if (one(b, c) != 0.0) two(row, static_cast<Index>(a) * n + c) += one(b, c);
            }
        }
    }
    return HermitianOperator(two.cast<cplx>());
}

MacroVariable::MacroVariable(HermitianOperator op, std::vector<double> bin_edges)
    : op_(std::move(op)), edges_(std::move(bin_edges)) {
    if (!op_.is_diagonal(numeric_policy().algebraic_tol))
        fail(ErrorCode::InvalidArgument, "macro-variable operator must be diagonal");
    if (edges_.size() < 2) fail(ErrorCode::InvalidArgument, "need at least one bin");
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (!(edges_[i] > edges_[i - 1]))
            fail(ErrorCode::InvalidArgument, "bin edges must be strictly increasing");
    const RealVector v = values();
    for (Index i = 0; i < v.size(); ++i)
        if (bin_of(v[i]) < 0)
            fail(ErrorCode::InvalidArgument,
                 "value " + std::to_string(v[i]) + " is not covered by any bin");
}

MacroVariable MacroVariable::with_integer_bins(HermitianOperator op) {
    const RealVector v = op.matrix().diagonal().real();
    const auto lo = static_cast<long>(std::floor(v.minCoeff() + 0.5));
    const auto hi = static_cast<long>(std::floor(v.maxCoeff() + 0.5));
    std::vector<double> edges;
    for (long k = lo; k <= hi + 1; ++k) edges.push_back(static_cast<double>(k) - 0.5);
    return MacroVariable(std::move(op), std::move(edges));
}

int MacroVariable::bin_of(double value) const {
    if (value < edges_.front() || value > edges_.back()) return -1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), value);
    auto b = static_cast<int>(it - edges_.begin()) - 1;
    if (b >= static_cast<int>(n_bins())) b = static_cast<int>(n_bins()) - 1;
    return b;
}

MacroVariable total_occupation(int n_sites) {
    return MacroVariable::with_integer_bins(number_operator(n_sites));
}

MacroVariable left_half_occupation(int n_sites) {
    if (n_sites < 2) fail(ErrorCode::InvalidArgument, "left-half occupation needs n >= 2");
    check_sites(n_sites);
    const Index dim = Index{1} << n_sites;
    RealVector d(dim);
    for (Index s = 0; s < dim; ++s) {
        int count = 0;
        for (int i = 0; i < n_sites / 2; ++i) count += occupation(static_cast<unsigned>(s), i, n_sites);
        d[s] = count;
    }
    return MacroVariable::with_integer_bins(HermitianOperator::diagonal(d));
}

MacroVariable position_variable(const GridModel& g, std::vector<double> bin_edges, int particle) {
    g.validate();
    if (particle < 0 || particle >= g.n_particles)
        fail(ErrorCode::IndexOutOfRange, "particle index out of range");
    RealVector d(g.config_dim());
    for (Index c = 0; c < d.size(); ++c) d[c] = g.position(g.particle_index(c, particle));
    return MacroVariable(HermitianOperator::diagonal(d), std::move(bin_edges));
}

MassDensityOperator::MassDensityOperator(std::vector<double> location_masses,
                                         std::vector<RealVector> diagonals)
    : masses_(std::move(location_masses)), diagonals_(std::move(diagonals)) {
    if (diagonals_.empty()) fail(ErrorCode::InvalidArgument, "mass density needs a location");
    if (masses_.size() != diagonals_.size())
        fail(ErrorCode::DimensionMismatch, "one mass per location required");
    const Index d = diagonals_.front().size();
    for (const auto& diag : diagonals_) {
        if (diag.size() != d) fail(ErrorCode::DimensionMismatch, "operators differ in dimension");
        if (diag.minCoeff() < 0.0) fail(ErrorCode::InvalidArgument, "M(x) must be PSD");
    }
}

Index MassDensityOperator::dim() const { return diagonals_.front().size(); }

HermitianOperator MassDensityOperator::at(std::size_t x) const {
    return HermitianOperator::diagonal(diagonals_.at(x));
}

RealVector MassDensityOperator::total_diagonal() const {
    RealVector t = RealVector::Zero(dim());
    for (const auto& d : diagonals_) t += d;
    return t;
}

MassDensityOperator lattice_mass_density(int n_sites, std::vector<double> site_masses) {
    check_sites(n_sites);
    if (static_cast<int>(site_masses.size()) != n_sites)
        fail(ErrorCode::DimensionMismatch, "one mass per site required");
    const Index dim = Index{1} << n_sites;
    std::vector<RealVector> diags;
    for (int i = 0; i < n_sites; ++i) {
        RealVector d(dim);
        for (Index s = 0; s < dim; ++s)
            d[s] = site_masses[i] * occupation(static_cast<unsigned>(s), i, n_sites);
        diags.push_back(std::move(d));
    }
    return MassDensityOperator(std::move(site_masses), std::move(diags));
}

MassDensityOperator grid_mass_density(const GridModel& g) {
    g.validate();
    std::vector<RealVector> diags(g.grid_points, RealVector::Zero(g.config_dim()));
    for (Index c = 0; c < g.config_dim(); ++c)
        for (int k = 0; k < g.n_particles; ++k) diags[g.particle_index(c, k)][c] += g.mass;
    return MassDensityOperator(std::vector<double>(g.grid_points, g.mass), std::move(diags));
}

std::vector<double> mass_density_field(const DensityMatrix& w, const MassDensityOperator& m) {
    if (w.dim() != m.dim()) fail(ErrorCode::DimensionMismatch, "state and M(x) differ in dimension");
    const RealVector pop = w.matrix().diagonal().real();
    std::vector<double> out(m.n_locations());
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = m.diagonal(x).dot(pop);
    return out;
}

std::vector<double> mass_density_field(const WaveFunction& psi, const MassDensityOperator& m) {
    if (psi.dim() != m.dim()) fail(ErrorCode::DimensionMismatch, "state and M(x) differ in dimension");
    const RealVector pop = psi.amplitudes().cwiseAbs2();
    std::vector<double> out(m.n_locations());
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = m.diagonal(x).dot(pop);
    return out;
}

}  // namespace qsm
