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
#include "qsm/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qsm/error.hpp"
#include "qsm/parallel.hpp"
#include "qsm/policy.hpp"

namespace qsm {

BohmIncidents& BohmIncidents::operator+=(const BohmIncidents& o) {
    node_regions += o.node_regions;
    velocity_caps += o.velocity_caps;
    reflections += o.reflections;
    crossings += o.crossings;
    return *this;
}

VelocityField::VelocityField(GridModel g, std::vector<RealVector> velocities, std::vector<char> node,
                             std::vector<char> capped)
    : g_(std::move(g)), v_(std::move(velocities)), node_(std::move(node)), capped_(std::move(capped)) {
    if (static_cast<int>(v_.size()) != g_.n_particles)
        fail(ErrorCode::DimensionMismatch, "one velocity table per particle required");
}

namespace {

Index stride(const GridModel& g, int particle) {
    return (g.n_particles == 2 && particle == 0) ? g.grid_points : 1;
}

// Grid coordinate s with x_j = (j + 1) dx, clamped to the tabulated range.
void bracket(const GridModel& g, double q, int& j0, double& frac) {
    const double s = q / g.spacing() - 1.0;
    if (s <= 0.0) {
        j0 = 0;
        frac = 0.0;
    } else if (s >= g.grid_points - 1) {
        j0 = g.grid_points - 2;
        frac = 1.0;
    } else {
        j0 = static_cast<int>(std::floor(s));
        frac = s - j0;
    }
}

template <typename DerivRatio>
VelocityField build_field(const GridModel& g, const RealVector& density, const GuidanceOptions& opts,
                          DerivRatio&& im_ratio) {
    const Index dim = g.config_dim();
    const double delta = opts.node_rel_threshold * density.maxCoeff();
    const double v_cap = opts.v_cap_per_length * g.box_length;
    const double pref = g.hbar / g.mass;
    std::vector<RealVector> v(static_cast<std::size_t>(g.n_particles), RealVector(dim));
    std::vector<char> node(static_cast<std::size_t>(dim), 0);
    std::vector<char> capped(static_cast<std::size_t>(dim), 0);
    for (Index c = 0; c < dim; ++c) {
        const bool is_node = !(density[c] >= delta) || density[c] <= 0.0;
        node[static_cast<std::size_t>(c)] = is_node ? 1 : 0;
        for (int k = 0; k < g.n_particles; ++k) {
            const Index s = stride(g, k);
            const int j = g.particle_index(c, k);
            const Index up = j + 1 < g.grid_points ? c + s : -1;
            const Index down = j > 0 ? c - s : -1;
            double vel = pref * im_ratio(c, up, down);
            if (!std::isfinite(vel)) vel = 0.0;
            if (std::abs(vel) > v_cap) {
                vel = std::copysign(v_cap, vel);
                capped[static_cast<std::size_t>(c)] = 1;
            }
            v[static_cast<std::size_t>(k)][c] = vel;
        }
    }
    return VelocityField(g, std::move(v), std::move(node), std::move(capped));
}

}  // namespace

std::vector<double> VelocityField::at(const Configuration& q, BohmIncidents* log) const {
    if (static_cast<int>(q.positions.size()) != g_.n_particles)
        fail(ErrorCode::DimensionMismatch, "configuration has the wrong number of particles");
    std::vector<double> out(q.positions.size());
    bool touched_node = false;
    bool touched_cap = false;
    auto visit = [&](Index c) {
        touched_node |= node_[static_cast<std::size_t>(c)] != 0;
        touched_cap |= capped_[static_cast<std::size_t>(c)] != 0;
    };
    if (g_.n_particles == 1) {
        int j0;
        double f;
        bracket(g_, q.positions[0], j0, f);
        visit(j0);
        visit(j0 + 1);
        out[0] = (1.0 - f) * v_[0][j0] + f * v_[0][j0 + 1];
    } else {
        int a0, b0;
        double fa, fb;
        bracket(g_, q.positions[0], a0, fa);
        bracket(g_, q.positions[1], b0, fb);
        const Index n = g_.grid_points;
        const Index c00 = a0 * n + b0, c01 = a0 * n + b0 + 1, c10 = (a0 + 1) * n + b0,
                    c11 = (a0 + 1) * n + b0 + 1;
        for (Index c : {c00, c01, c10, c11}) visit(c);
        for (int k = 0; k < 2; ++k) {
            const RealVector& v = v_[static_cast<std::size_t>(k)];
            out[static_cast<std::size_t>(k)] = (1 - fa) * (1 - fb) * v[c00] + (1 - fa) * fb * v[c01] +
                                               fa * (1 - fb) * v[c10] + fa * fb * v[c11];
        }
    }
    if (log) {
        if (touched_node) ++log->node_regions;
        if (touched_cap) ++log->velocity_caps;
    }
    return out;
}

VelocityField velocity_field_psi(const GridModel& g, const WaveFunction& psi, const GuidanceOptions& opts) {
    g.validate();
    if (psi.dim() != g.config_dim()) fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const ComplexVector& a = psi.amplitudes();
    const RealVector density = a.cwiseAbs2();
    const double two_dx = 2.0 * g.spacing();
    return build_field(g, density, opts, [&](Index c, Index up, Index down) {
        const cplx fwd = up >= 0 ? a[up] : cplx(0.0);
        const cplx bwd = down >= 0 ? a[down] : cplx(0.0);
        return (((fwd - bwd) / two_dx) * std::conj(a[c])).imag() / density[c];
    });
}

VelocityField velocity_field_w(const GridModel& g, const DensityMatrix& w, const GuidanceOptions& opts) {
    g.validate();
    if (w.dim() != g.config_dim()) fail(ErrorCode::DimensionMismatch, "state does not match the grid");
    const ComplexMatrix& m = w.matrix();
    const RealVector density = m.diagonal().real();
    const double two_dx = 2.0 * g.spacing();
    return build_field(g, density, opts, [&](Index c, Index up, Index down) {
        const cplx fwd = up >= 0 ? m(up, c) : cplx(0.0);
        const cplx bwd = down >= 0 ? m(down, c) : cplx(0.0);
        return ((fwd - bwd) / two_dx).imag() / density[c];
    });
}

std::vector<double> velocity_psi(const GridModel& g, const WaveFunction& psi, const Configuration& q,
                                 const GuidanceOptions& opts, BohmIncidents* log) {
    return velocity_field_psi(g, psi, opts).at(q, log);
}

std::vector<double> velocity_w(const GridModel& g, const DensityMatrix& w, const Configuration& q,
                               const GuidanceOptions& opts, BohmIncidents* log) {
    return velocity_field_w(g, w, opts).at(q, log);
}

Configuration sample_configuration(const GridModel& g, const RealVector& populations, RandomStream& rng) {
    g.validate();
    if (populations.size() != g.config_dim())
        fail(ErrorCode::DimensionMismatch, "populations do not match the grid");
    const double total = populations.sum();
    if (!(total > numeric_policy().degenerate_mass))
        fail(ErrorCode::DegenerateDistribution, "position distribution has no mass");
    if (std::abs(total - 1.0) > numeric_policy().distribution_tol)
        fail(ErrorCode::InvalidArgument, "position distribution does not sum to 1");
    const double target = rng.uniform() * total;
    Index pick = populations.size() - 1;
    double cum = 0.0;
    for (Index c = 0; c < populations.size(); ++c) {
        cum += populations[c];
        if (target < cum) {
            pick = c;
            break;
        }
    }
    while (populations[pick] <= 0.0 && pick > 0) --pick;
    Configuration q;
    const double dx = g.spacing();
    for (int k = 0; k < g.n_particles; ++k)
        q.positions.push_back(g.position(g.particle_index(pick, k)) + (rng.uniform() - 0.5) * dx);
    return q;
}

Configuration sample_initial_configuration(const GridModel& g, const WaveFunction& psi, RandomStream& rng) {
    return sample_configuration(g, psi.amplitudes().cwiseAbs2(), rng);
}

Configuration sample_initial_configuration(const GridModel& g, const DensityMatrix& w, RandomStream& rng) {
    return sample_configuration(g, w.matrix().diagonal().real(), rng);
}

PsiGuidance::PsiGuidance(const SpectralPropagator& p, GridModel g, WaveFunction psi0, GuidanceOptions opts)
    : p_(&p), g_(std::move(g)), psi0_(std::move(psi0)), opts_(opts) {
    g_.validate();
    if (psi0_.dim() != g_.config_dim() || p.dim() != g_.config_dim())
        fail(ErrorCode::DimensionMismatch, "state, propagator and grid disagree in dimension");
}

WaveFunction PsiGuidance::state_at(double t) const { return evolve_wavefunction(*p_, psi0_, t); }
VelocityField PsiGuidance::field_at(double t) const { return velocity_field_psi(g_, state_at(t), opts_); }
RealVector PsiGuidance::populations_at(double t) const { return state_at(t).amplitudes().cwiseAbs2(); }

WGuidance::WGuidance(const SpectralPropagator& p, GridModel g, const DensityMatrix& w0, GuidanceOptions opts)
    : p_(&p), g_(std::move(g)), w0_(w0), opts_(opts) {
    g_.validate();
    if (w0.dim() != g_.config_dim() || p.dim() != g_.config_dim())
        fail(ErrorCode::DimensionMismatch, "state, propagator and grid disagree in dimension");
}

DensityMatrix WGuidance::state_at(double t) const { return w0_.evolve(*p_, t); }
VelocityField WGuidance::field_at(double t) const { return velocity_field_w(g_, state_at(t), opts_); }
RealVector WGuidance::populations_at(double t) const { return state_at(t).matrix().diagonal().real(); }

namespace {

double reflect(double q, double length, std::uint64_t& reflections) {
    for (int guard = 0; guard < 4 && (q < 0.0 || q > length); ++guard) {
        q = q < 0.0 ? -q : 2.0 * length - q;
        ++reflections;
    }
    return std::clamp(q, 0.0, length);
}

Configuration advance(const Configuration& q, const std::vector<double>& v, double h, double length,
                      std::uint64_t& reflections) {
    Configuration out = q;
    for (std::size_t k = 0; k < q.positions.size(); ++k)
        out.positions[k] = reflect(q.positions[k] + h * v[k], length, reflections);
    return out;
}

void check_stepping(double dt, int steps, int record_every) {
    if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
    if (steps < 0) fail(ErrorCode::InvalidArgument, "steps must be non-negative");
    if (record_every < 1) fail(ErrorCode::InvalidArgument, "record_every must be >= 1");
}

}  // namespace

Trajectory integrate_trajectory(const GuidanceSource& source, const Configuration& q0, double dt,
                                int steps, BohmIncidents* log, int record_every) {
    const EnsembleRun run = integrate_ensemble(source, std::span<const Configuration>(&q0, 1), dt, steps,
                                               record_every, 1);
    if (log) *log += run.incidents;
    Trajectory traj;
    traj.times = run.times;
    for (const auto& snap : run.snapshots) traj.configurations.push_back(snap.front());
    return traj;
}

EnsembleRun integrate_ensemble(const GuidanceSource& source, std::span<const Configuration> q0,
                               double dt, int steps, int record_every, int threads) {
    check_stepping(dt, steps, record_every);
    const GridModel& g = source.grid();
    const double length = g.box_length;
    for (const auto& q : q0)
        if (static_cast<int>(q.positions.size()) != g.n_particles)
            fail(ErrorCode::DimensionMismatch, "configuration has the wrong number of particles");

    const std::size_t n = q0.size();
    std::vector<Configuration> current(q0.begin(), q0.end());
    std::vector<BohmIncidents> logs(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const bool check_order = g.n_particles == 1;
    if (check_order)
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return current[a].positions[0] < current[b].positions[0];
        });

    EnsembleRun run;
    run.times.push_back(0.0);
    run.snapshots.push_back(current);

    VelocityField field_now = source.field_at(0.0);
    for (int step = 0; step < steps; ++step) {
        const double t = step * dt;
        const VelocityField field_mid = source.field_at(t + 0.5 * dt);
        parallel_for(n, threads, [&](std::size_t i) {
            BohmIncidents& log = logs[i];
            const auto k1 = field_now.at(current[i], &log);
            const Configuration mid = advance(current[i], k1, 0.5 * dt, length, log.reflections);
            const auto k2 = field_mid.at(mid, &log);
            current[i] = advance(current[i], k2, dt, length, log.reflections);
        });
        if (check_order) {
            for (std::size_t j = 1; j < n; ++j)
                if (current[order[j]].positions[0] < current[order[j - 1]].positions[0])
                    ++run.incidents.crossings;
        }
        if ((step + 1) % record_every == 0 || step + 1 == steps) {
            run.times.push_back((step + 1) * dt);
            run.snapshots.push_back(current);
        }
        if (step + 1 < steps) field_now = source.field_at((step + 1) * dt);
    }
    for (const auto& l : logs) run.incidents += l;
    return run;
}

namespace {

// overlap[j][b]: fraction of grid cell j that lies in bin b.
Eigen::MatrixXd cell_bin_overlap(const GridModel& g, int n_bins) {
    const double dx = g.spacing();
    const double h = g.box_length / n_bins;
    Eigen::MatrixXd o = Eigen::MatrixXd::Zero(g.grid_points, n_bins);
    for (int j = 0; j < g.grid_points; ++j) {
        const double lo = g.position(j) - 0.5 * dx;
        const double hi = g.position(j) + 0.5 * dx;
        const int b0 = std::max(0, static_cast<int>(std::floor(lo / h)));
        const int b1 = std::min(n_bins - 1, static_cast<int>(std::floor(hi / h)));
        for (int b = b0; b <= b1; ++b) {
            const double ov = std::min(hi, (b + 1) * h) - std::max(lo, b * h);
            if (ov > 0.0) o(j, b) += ov / dx;
        }
    }
    return o;
}

int bin_of(double q, double h, int n_bins) {
    const int b = static_cast<int>(std::floor(q / h));
    return std::clamp(b, 0, n_bins - 1);
}

}  // namespace

RealVector binned_populations(const GridModel& g, const RealVector& populations, int n_bins) {
    g.validate();
    if (n_bins < 1) fail(ErrorCode::InvalidArgument, "need at least one bin");
    if (populations.size() != g.config_dim())
        fail(ErrorCode::DimensionMismatch, "populations do not match the grid");
    const Eigen::MatrixXd o = cell_bin_overlap(g, n_bins);
    if (g.n_particles == 1) return o.transpose() * populations;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> p(
        populations.data(), g.grid_points, g.grid_points);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> binned =
        o.transpose() * p * o;
    return Eigen::Map<const RealVector>(binned.data(), binned.size());
}

RealVector empirical_histogram(const GridModel& g, std::span<const Configuration> positions, int n_bins) {
    if (n_bins < 1) fail(ErrorCode::InvalidArgument, "need at least one bin");
    if (positions.empty()) fail(ErrorCode::InvalidArgument, "no positions to histogram");
    const double h = g.box_length / n_bins;
    const Index size = g.n_particles == 1 ? n_bins : static_cast<Index>(n_bins) * n_bins;
    RealVector hist = RealVector::Zero(size);
    for (const auto& q : positions) {
        if (static_cast<int>(q.positions.size()) != g.n_particles)
            fail(ErrorCode::DimensionMismatch, "configuration has the wrong number of particles");
        Index b = bin_of(q.positions[0], h, n_bins);
        if (g.n_particles == 2) b = b * n_bins + bin_of(q.positions[1], h, n_bins);
        hist[b] += 1.0;
    }
    return hist / static_cast<double>(positions.size());
}

double equivariance_distance(const GridModel& g, std::span<const Configuration> positions,
                             const RealVector& populations, int n_bins) {
    if (positions.size() < 1000)
        fail(ErrorCode::InvalidArgument, "equivariance distance needs at least 1000 trajectories");
    const RealVector emp = empirical_histogram(g, positions, n_bins);
    const RealVector theory = binned_populations(g, populations, n_bins);
    return (emp - theory).cwiseAbs().sum();
}

}  // namespace qsm
