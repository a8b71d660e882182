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

#include <vector>

#include "qsm/hilbert.hpp"
#include "qsm/state.hpp"

namespace qsm {

// ---------------------------------------------------------------------------
// Lattice (hard-core occupation) chains.
//
// Basis index convention: site i (0-based, left to right) is bit (n-1-i) of
// the index, so the bitstring |1100> is index 0b1100 = 12 and has sites 0
// and 1 occupied.

struct LatticeModel {
    int n_sites = 0;
    double coupling = 0.0;
    double field = 0.0;
};

inline constexpr int kMaxLatticeSites = 12;

/// H = J sum_i (s+_i s-_{i+1} + h.c.) + h sum_i (n_i - 1/2), open chain.
HermitianOperator build_spin_chain(int n_sites, double coupling, double field);
HermitianOperator build_spin_chain(const LatticeModel& model);

/// Total occupation operator N = sum_i n_i (diagonal).
HermitianOperator number_operator(int n_sites);

int occupation(unsigned index, int site, int n_sites);

// ---------------------------------------------------------------------------
// Grid particles in a hard-wall box [0, L].
//
// G interior points x_j = (j + 1) dx with dx = L / (G + 1); the wave function
// vanishes at x = 0 and x = L. For two particles the configuration index is
// i1 * G + i2.

struct GridModel {
    int n_particles = 1;
    int grid_points = 0;
    double box_length = 1.0;
    double mass = 1.0;
    double hbar = 1.0;
    std::vector<double> potential;  // one-body, length G; empty means zero

    void validate() const;
    double spacing() const { return box_length / (grid_points + 1); }
    double position(int j) const { return (j + 1) * spacing(); }
    Index config_dim() const;
    /// Grid index of particle k (0-based) in configuration index c.
    int particle_index(Index c, int k) const;
};

HermitianOperator build_grid_hamiltonian(const GridModel& g);

// ---------------------------------------------------------------------------

/// Diagonal observable with value bins.
///
/// Bin b covers [edges[b], edges[b+1]) and the last bin is closed on the
/// right. The bins must cover every diagonal value of the operator.
class MacroVariable {
public:
    MacroVariable(HermitianOperator op, std::vector<double> bin_edges);

    /// One bin per integer value between the smallest and largest diagonal
    /// entry (edges at v - 1/2).
    static MacroVariable with_integer_bins(HermitianOperator op);

    const HermitianOperator& op() const noexcept { return op_; }
    const std::vector<double>& bin_edges() const noexcept { return edges_; }
    std::size_t n_bins() const noexcept { return edges_.size() - 1; }
    RealVector values() const { return op_.matrix().diagonal().real(); }
    /// Bin index of a value, or -1 when outside every bin.
    int bin_of(double value) const;

private:
    HermitianOperator op_;
    std::vector<double> edges_;
};

MacroVariable total_occupation(int n_sites);
/// Counts occupied sites among the first n/2.
MacroVariable left_half_occupation(int n_sites);
/// Position of one particle (0-based index) on the grid.
MacroVariable position_variable(const GridModel& g, std::vector<double> bin_edges, int particle = 0);

/// Family of mass-density operators M(x). All operators built here are
/// diagonal in the computational / position basis, so only the diagonals
/// are stored.
class MassDensityOperator {
public:
    MassDensityOperator(std::vector<double> location_masses, std::vector<RealVector> diagonals);

    std::size_t n_locations() const noexcept { return diagonals_.size(); }
    Index dim() const;
    const std::vector<double>& location_masses() const noexcept { return masses_; }
    const RealVector& diagonal(std::size_t x) const { return diagonals_.at(x); }
    HermitianOperator at(std::size_t x) const;
    /// sum_x M(x).
    RealVector total_diagonal() const;

private:
    std::vector<double> masses_;
    std::vector<RealVector> diagonals_;
};

/// M(x) = m_x n_x for each site.
MassDensityOperator lattice_mass_density(int n_sites, std::vector<double> site_masses);
/// M(x_j) = m * sum_k |q_k = x_j><q_k = x_j|.
MassDensityOperator grid_mass_density(const GridModel& g);

/// m(x) = tr(M(x) W).
std::vector<double> mass_density_field(const DensityMatrix& w, const MassDensityOperator& m);
/// m(x) = <psi| M(x) |psi>.
std::vector<double> mass_density_field(const WaveFunction& psi, const MassDensityOperator& m);

}  // namespace qsm
