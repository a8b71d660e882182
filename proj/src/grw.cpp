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
#include "qsm/grw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"
#include "qsm/qstate.hpp"

namespace qsm {

void GRWParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "GRW lambda must be >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "GRW sigma must be > 0");
    if (n_particles < 1) fail(ErrorCode::InvalidArgument, "GRW needs at least one particle");
}

CollapseKernel::CollapseKernel(GridModel g, double sigma) : g_(std::move(g)), sigma_(sigma) {
    g_.validate();
    if (!(sigma_ > 0.0)) fail(ErrorCode::InvalidArgument, "collapse width must be positive");
    const int n = g_.grid_points;
    const double dx = g_.spacing();
    const double pref = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma_ * sigma_);
    kernel_.resize(n, n);
    for (int q = 0; q < n; ++q) {
        for (int x = 0; x < n; ++x) {
            const double d = g_.position(q) - g_.position(x);
            kernel_(q, x) = pref * std::exp(-d * d / (2.0 * sigma_ * sigma_));
        }
        const double row = kernel_.row(q).sum() * dx;
        if (!(row > 0.0)) fail(ErrorCode::DegenerateDistribution, "collapse width too small for the grid");
        kernel_.row(q) /= row;
    }
}

namespace {

void check_particle(const GridModel& g, int k) {
    if (k < 1 || k > g.n_particles) fail(ErrorCode::IndexOutOfRange, "particle label k out of range");
}

void check_center(const GridModel& g, int center_index) {
    if (center_index < 0 || center_index >= g.grid_points)
        fail(ErrorCode::OffGrid, "collapse center index " + std::to_string(center_index) + " is off the grid");
}

int sample_index(const RealVector& probs, double u) {
    const double total = probs.sum();
    if (!(total > numeric_policy().degenerate_mass))
        fail(ErrorCode::DegenerateDistribution, "collapse-center distribution has no mass");
    const double target = u * total;
    double cum = 0.0;
    for (Index j = 0; j < probs.size(); ++j) {
        cum += probs[j];
        if (target < cum) return static_cast<int>(j);
    }
    // u * total rounded up to the full sum: take the last cell with mass.
    for (Index j = probs.size() - 1; j >= 0; --j)
        if (probs[j] > 0.0) return static_cast<int>(j);
    return static_cast<int>(probs.size() - 1);
}

}  // namespace

RealVector CollapseKernel::rate_diagonal(int k, int center_index) const {
    check_particle(g_, k);
    check_center(g_, center_index);
    RealVector d(g_.config_dim());
    for (Index c = 0; c < d.size(); ++c) d[c] = kernel_(g_.particle_index(c, k - 1), center_index);
    return d;
}

RealVector CollapseKernel::center_probabilities(const RealVector& populations, int k) const {
    check_particle(g_, k);
    if (populations.size() != g_.config_dim())
        fail(ErrorCode::DimensionMismatch, "populations do not match the configuration space");
    RealVector marginal = RealVector::Zero(g_.grid_points);
    for (Index c = 0; c < populations.size(); ++c) marginal[g_.particle_index(c, k - 1)] += populations[c];
    return kernel_.transpose() * marginal * g_.spacing();
}

HermitianOperator collapse_rate_operator(const GridModel& g, int k, int center_index, double sigma) {
    const CollapseKernel kernel(g, sigma);
    return HermitianOperator::diagonal(kernel.rate_diagonal(k, center_index));
}

HermitianOperator collapse_rate_operator(const GridModel& g, int k, double x, double sigma) {
    g.validate();
    const double dx = g.spacing();
    const double j = x / dx - 1.0;
    const double jr = std::round(j);
    if (std::abs(j - jr) > 1e-9 || jr < 0 || jr >= g.grid_points)
        fail(ErrorCode::OffGrid, "location " + std::to_string(x) + " is not a grid point");
    return collapse_rate_operator(g, k, static_cast<int>(jr), sigma);
}

std::vector<ScheduledCollapse> sample_collapse_schedule(const GRWParams& params, double t_end,
                                                        RandomStream& rng) {
    params.validate();
    if (!(t_end > 0.0)) fail(ErrorCode::InvalidArgument, "t_end must be positive");
    std::vector<ScheduledCollapse> out;
    const double rate = params.total_rate();
    if (rate == 0.0) return out;
    double t = rng.exponential(rate);
    while (t <= t_end) {
        const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(params.n_particles)));
        out.push_back({t, k});
        t += rng.exponential(rate);
    }
    return out;
}

WaveFunction collapse_at(const WaveFunction& psi, int k, int center_index, const CollapseKernel& kernel) {
    if (psi.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const RealVector s = kernel.rate_diagonal(k, center_index).cwiseSqrt();
    const ComplexVector v = s.cast<cplx>().cwiseProduct(psi.amplitudes());
    const double n = v.norm();
    if (!(n * n > numeric_policy().degenerate_mass))
        fail(ErrorCode::DegenerateDistribution, "collapse at a center with no support");
    return WaveFunction(v / n);
}

DensityMatrix collapse_at(const DensityMatrix& w, int k, int center_index, const CollapseKernel& kernel) {
    if (w.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const RealVector s = kernel.rate_diagonal(k, center_index).cwiseSqrt();
    const ComplexMatrix m = s.cast<cplx>().asDiagonal() * w.matrix() * s.cast<cplx>().asDiagonal();
    const double tr = m.trace().real();
    if (!(tr > numeric_policy().degenerate_mass))
        fail(ErrorCode::DegenerateDistribution, "collapse at a center with no support");
    return DensityMatrix::from_trusted(m / tr);
}

PsiCollapse psi_grw_collapse(const WaveFunction& psi, int k, const CollapseKernel& kernel,
                             RandomStream& rng, double time) {
    if (psi.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const RealVector probs = kernel.center_probabilities(psi.amplitudes().cwiseAbs2(), k);
    const int j = sample_index(probs, rng.uniform());
    return {collapse_at(psi, k, j, kernel), CollapseEvent{time, k, j, kernel.grid().position(j)}};
}

WCollapse w_grw_collapse(const DensityMatrix& w, int k, const CollapseKernel& kernel,
                         RandomStream& rng, double time) {
    if (w.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const RealVector probs = kernel.center_probabilities(w.matrix().diagonal().real(), k);
    const int j = sample_index(probs, rng.uniform());
    return {collapse_at(w, k, j, kernel), CollapseEvent{time, k, j, kernel.grid().position(j)}};
}

ComplexMatrix mean_collapse_map(const DensityMatrix& w, int k, const CollapseKernel& kernel) {
    if (w.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    ComplexMatrix out = ComplexMatrix::Zero(w.dim(), w.dim());
    const double dx = kernel.grid().spacing();
    for (int j = 0; j < kernel.grid().grid_points; ++j) {
        const ComplexVector s = kernel.rate_diagonal(k, j).cwiseSqrt().cast<cplx>();
        out += (s * s.adjoint()).cwiseProduct(w.matrix()) * dx;
    }
    return out;
}

namespace {

double state_purity(const WaveFunction&) { return 1.0; }
double state_purity(const DensityMatrix& w) { return purity(w); }

WaveFunction evolve_state(const SpectralPropagator& p, const WaveFunction& s, double t) {
    return evolve_wavefunction(p, s, t);
}
DensityMatrix evolve_state(const SpectralPropagator& p, const DensityMatrix& s, double t) {
    return evolve_density(p, s, t);
}

PsiCollapse collapse_state(const WaveFunction& s, int k, const CollapseKernel& kern, RandomStream& rng, double t) {
    return psi_grw_collapse(s, k, kern, rng, t);
}
WCollapse collapse_state(const DensityMatrix& s, int k, const CollapseKernel& kern, RandomStream& rng, double t) {
    return w_grw_collapse(s, k, kern, rng, t);
}

template <typename State>
GRWTraceRow trace_row(const State& s, double t, const GRWRunOptions& opt) {
    GRWTraceRow row;
    row.time = t;
    if (opt.decomposition) row.weights = macro_weights(s, *opt.decomposition);
    row.purity = state_purity(s);
    return row;
}

template <typename State>
GRWRun<State> run_process(const State& initial, const SpectralPropagator& p, const CollapseKernel& kernel,
                          const GRWParams& params, double t_end, RandomStream& rng,
                          const GRWRunOptions& opt) {
    params.validate();
    if (params.n_particles != kernel.grid().n_particles)
        fail(ErrorCode::InvalidArgument, "GRW particle count differs from the grid model");
    if (initial.dim() != p.dim() || p.dim() != kernel.grid().config_dim())
        fail(ErrorCode::DimensionMismatch, "state, propagator and grid disagree in dimension");
    const auto schedule = sample_collapse_schedule(params, t_end, rng);

    GRWRun<State> run{initial, {}, {}, {}, 0};
    run.trace.push_back(trace_row(initial, 0.0, opt));
    State current = initial;
    double now = 0.0;
    for (const auto& ev : schedule) {
        current = evolve_state(p, current, ev.time - now);
        now = ev.time;
        const double before = state_purity(current);
        auto collapsed = collapse_state(current, ev.particle, kernel, rng, ev.time);
        current = std::move(collapsed.state);
        if (state_purity(current) < before - numeric_policy().algebraic_tol) ++run.purity_decreases;
        run.flashes.push_back(collapsed.event);
        run.trace.push_back(trace_row(current, now, opt));
        if (opt.mass_density) run.mass_snapshots.push_back(mass_density_field(current, *opt.mass_density));
    }
    current = evolve_state(p, current, t_end - now);
    run.trace.push_back(trace_row(current, t_end, opt));
    run.final_state = std::move(current);
    return run;
}

}  // namespace

GRWRun<WaveFunction> run_grw_process(const WaveFunction& initial, const SpectralPropagator& p,
                                     const CollapseKernel& kernel, const GRWParams& params,
                                     double t_end, RandomStream& rng, const GRWRunOptions& options) {
    return run_process(initial, p, kernel, params, t_end, rng, options);
}

GRWRun<DensityMatrix> run_grw_process(const DensityMatrix& initial, const SpectralPropagator& p,
                                      const CollapseKernel& kernel, const GRWParams& params,
                                      double t_end, RandomStream& rng, const GRWRunOptions& options) {
    return run_process(initial, p, kernel, params, t_end, rng, options);
}

}  // namespace qsm
