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

#include "qsm/coarse.hpp"
#include "qsm/hilbert.hpp"
#include "qsm/models.hpp"
#include "qsm/rng.hpp"
#include "qsm/state.hpp"
#include "qsm/unitary.hpp"

namespace qsm {

/// Collapse rate lambda per particle and width sigma. lambda = 0 switches
/// collapses off entirely.
struct GRWParams {
    double lambda = 0.0;
    double sigma = 0.0;
    int n_particles = 1;

    void validate() const;
    double total_rate() const { return lambda * n_particles; }
};

/// One collapse ("flash"). `particle` is 1-based.
struct CollapseEvent {
    double time = 0.0;
    int particle = 1;
    int center_index = 0;
    double center = 0.0;
};

struct ScheduledCollapse {
    double time = 0.0;
    int particle = 1;
};

/// Discretized Gaussian collapse kernel on a grid.
///
/// kernel(q, x) = g(x_q - x) / sum_x' g(x_q - x') dx with g the 1D normal
/// density of width sigma. Row normalization makes sum_x Lambda(x) dx the
/// identity exactly, including near the walls; the Gaussian prefactor
/// cancels in it.
class CollapseKernel {
public:
    CollapseKernel(GridModel g, double sigma);

    const GridModel& grid() const noexcept { return g_; }
    double sigma() const noexcept { return sigma_; }
    double kernel(int q, int x) const { return kernel_(q, x); }

    /// Diagonal of Lambda_k(x_j) over configuration space (k is 1-based).
    RealVector rate_diagonal(int k, int center_index) const;
    /// rho(x_j) dx for a configuration-space population vector; sums to 1
    /// when the populations do.
    RealVector center_probabilities(const RealVector& populations, int k) const;

private:
    GridModel g_;
    double sigma_;
    Eigen::MatrixXd kernel_;
};

HermitianOperator collapse_rate_operator(const GridModel& g, int k, int center_index, double sigma);
/// Location overload; x must coincide with a grid point (OffGrid otherwise).
HermitianOperator collapse_rate_operator(const GridModel& g, int k, double x, double sigma);

/// Poisson process of total rate N lambda on [0, t_end], each event
/// assigned a uniformly chosen particle.
std::vector<ScheduledCollapse> sample_collapse_schedule(const GRWParams& params, double t_end,
                                                        RandomStream& rng);

struct PsiCollapse {
    WaveFunction state;
    CollapseEvent event;
};

struct WCollapse {
    DensityMatrix state;
    CollapseEvent event;
};

// Both collapse routines consume exactly one uniform from rng, so the two
// pictures driven by identically seeded streams see identical draws.
PsiCollapse psi_grw_collapse(const WaveFunction& psi, int k, const CollapseKernel& kernel,
                             RandomStream& rng, double time = 0.0);
WCollapse w_grw_collapse(const DensityMatrix& w, int k, const CollapseKernel& kernel,
                         RandomStream& rng, double time = 0.0);

/// Collapse with a given center (no randomness).
WaveFunction collapse_at(const WaveFunction& psi, int k, int center_index, const CollapseKernel& kernel);
DensityMatrix collapse_at(const DensityMatrix& w, int k, int center_index, const CollapseKernel& kernel);

/// sum_x Lambda(x)^1/2 W Lambda(x)^1/2 dx: the collapse averaged over X.
/// Returned as a raw matrix so callers can check the trace directly.
ComplexMatrix mean_collapse_map(const DensityMatrix& w, int k, const CollapseKernel& kernel);

struct GRWTraceRow {
    double time = 0.0;
    std::vector<double> weights;  // one per macro cell, empty without a decomposition
    double purity = 1.0;
};

struct GRWRunOptions {
    const MacroDecomposition* decomposition = nullptr;
    const MassDensityOperator* mass_density = nullptr;  // GRWm snapshots after each collapse
};

template <typename State>
struct GRWRun {
    State final_state;
    std::vector<CollapseEvent> flashes;
    std::vector<GRWTraceRow> trace;  // t = 0, after each collapse, t_end
    std::vector<std::vector<double>> mass_snapshots;
    std::size_t purity_decreases = 0;
};

/// Exact unitary segments interrupted by collapses at the sampled times.
GRWRun<WaveFunction> run_grw_process(const WaveFunction& initial, const SpectralPropagator& p,
                                     const CollapseKernel& kernel, const GRWParams& params,
                                     double t_end, RandomStream& rng, const GRWRunOptions& options = {});
GRWRun<DensityMatrix> run_grw_process(const DensityMatrix& initial, const SpectralPropagator& p,
                                      const CollapseKernel& kernel, const GRWParams& params,
                                      double t_end, RandomStream& rng, const GRWRunOptions& options = {});

}  // namespace qsm
