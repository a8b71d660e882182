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

#include <cstddef>
#include <span>
#include <vector>

#include "qsm/hilbert.hpp"
#include "qsm/models.hpp"
#include "qsm/rng.hpp"
#include "qsm/state.hpp"

namespace qsm {

enum class IPHMode { Strong, Weak };

/// Initial-projection specification.
///
/// Strong: exactly one admissible subspace. Weak: an explicit finite list of
/// admissible subspaces and the index of the one selected. `fuzzy` only
/// marks a weak list as standing in for a vague admissibility boundary; it
/// has no numerical effect.
struct IPHSpec {
    IPHMode mode = IPHMode::Strong;
    std::vector<Subspace> subspaces;
    std::size_t selected_index = 0;
    bool fuzzy = false;

    void validate() const;
    const Subspace& selected() const;
};

/// W = P_s / dim s.
DensityMatrix iph_density_matrix(const Subspace& s);
DensityMatrix weak_iph(const IPHSpec& spec);
/// Dispatches on the mode.
DensityMatrix initial_density(const IPHSpec& spec);

/// Uniform draw on the unit sphere of s: i.i.d. standard complex Gaussian
/// coefficients in the basis of s, normalized, mapped to ambient coordinates.
WaveFunction sample_mu_s(const Subspace& s, RandomStream& rng);

/// (1/M) sum_i |psi_i><psi_i|.
DensityMatrix mix_ensemble(std::span<const WaveFunction> samples);

/// tr(W^2).
double purity(const DensityMatrix& w);

struct PsdClamp {
    DensityMatrix state;
    std::size_t clamped = 0;  // eigenvalues in [-tol, 0) set to zero
};

/// Clamps slightly negative eigenvalues and renormalizes the trace.
/// Eigenvalues below -algebraic_tol raise InvariantViolation.
PsdClamp clamp_psd(const ComplexMatrix& m);

/// W_cond(x, x') = W((x,Y),(x',Y)) / sum_x W((x,Y),(x,Y)) on a bipartite
/// space with index (system, environment) -> system * env_dim + environment.
DensityMatrix conditional_density_matrix(const DensityMatrix& w, Index system_dim, Index env_dim,
                                         Index env_index);
/// Two-particle grid: particle 0 is the system, particle 1 the environment.
DensityMatrix conditional_density_matrix(const DensityMatrix& w, const GridModel& g,
                                         int env_grid_index);

}  // namespace qsm
