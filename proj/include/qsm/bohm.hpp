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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qsm/models.hpp"
#include "qsm/rng.hpp"
#include "qsm/state.hpp"
#include "qsm/unitary.hpp"

namespace qsm {

/// Node handling: a grid point with density below node_rel_threshold times
/// the maximum density is a node region. Every velocity is capped at
/// v_cap = v_cap_per_length * L (per unit time).
struct GuidanceOptions {
    double node_rel_threshold = 1e-8;
    double v_cap_per_length = 10.0;
};

struct BohmIncidents {
    std::uint64_t node_regions = 0;   // queries touching a node grid point
    std::uint64_t velocity_caps = 0;  // queries touching a capped velocity
    std::uint64_t reflections = 0;    // wall reflections
    std::uint64_t crossings = 0;      // 1D ordering violations

    BohmIncidents& operator+=(const BohmIncidents& o);
};

struct Configuration {
    std::vector<double> positions;  // one per particle, in [0, L]
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Configuration> configurations;
};

/// Guidance velocities tabulated on the configuration grid, linearly
/// (bilinearly for two particles) interpolated in between.
class VelocityField {
public:
    VelocityField(GridModel g, std::vector<RealVector> velocities, std::vector<char> node,
                  std::vector<char> capped);

    const GridModel& grid() const noexcept { return g_; }
    /// Grid velocities of one particle (0-based) over configuration space.
    const RealVector& grid_velocity(int particle) const { return v_.at(static_cast<std::size_t>(particle)); }
    bool is_node(Index c) const { return node_[static_cast<std::size_t>(c)] != 0; }

    std::vector<double> at(const Configuration& q, BohmIncidents* log = nullptr) const;

private:
    GridModel g_;
    std::vector<RealVector> v_;
    std::vector<char> node_;
    std::vector<char> capped_;
};

/// v_k = (hbar/m) Im[d_k psi / psi], central differences with zero
/// amplitude beyond the walls.
VelocityField velocity_field_psi(const GridModel& g, const WaveFunction& psi,
                                 const GuidanceOptions& opts = {});
/// v_k = (hbar/m) Im[d_k W(q, q') / W(q, q')] at q = q', differentiating the
/// first argument.
VelocityField velocity_field_w(const GridModel& g, const DensityMatrix& w,
                               const GuidanceOptions& opts = {});

std::vector<double> velocity_psi(const GridModel& g, const WaveFunction& psi, const Configuration& q,
                                 const GuidanceOptions& opts = {}, BohmIncidents* log = nullptr);
std::vector<double> velocity_w(const GridModel& g, const DensityMatrix& w, const Configuration& q,
                               const GuidanceOptions& opts = {}, BohmIncidents* log = nullptr);

/// Inverse-CDF draw of a grid cell from the populations, then a uniform
/// position inside the cell [x_j - dx/2, x_j + dx/2] for each particle.
Configuration sample_configuration(const GridModel& g, const RealVector& populations, RandomStream& rng);
Configuration sample_initial_configuration(const GridModel& g, const WaveFunction& psi, RandomStream& rng);
Configuration sample_initial_configuration(const GridModel& g, const DensityMatrix& w, RandomStream& rng);

/// Supplies the exactly evolved state at any time.
class GuidanceSource {
public:
    virtual ~GuidanceSource() = default;
    virtual const GridModel& grid() const = 0;
    virtual VelocityField field_at(double t) const = 0;
    /// Configuration-space populations |psi(q,t)|^2 dq or W(q,q,t) dq.
    virtual RealVector populations_at(double t) const = 0;
};

class PsiGuidance final : public GuidanceSource {
public:
    PsiGuidance(const SpectralPropagator& p, GridModel g, WaveFunction psi0, GuidanceOptions opts = {});
    const GridModel& grid() const override { return g_; }
    VelocityField field_at(double t) const override;
    RealVector populations_at(double t) const override;
    WaveFunction state_at(double t) const;

private:
    const SpectralPropagator* p_;
    GridModel g_;
    WaveFunction psi0_;
    GuidanceOptions opts_;
};

class WGuidance final : public GuidanceSource {
public:
    WGuidance(const SpectralPropagator& p, GridModel g, const DensityMatrix& w0, GuidanceOptions opts = {});
    const GridModel& grid() const override { return g_; }
    VelocityField field_at(double t) const override;
    RealVector populations_at(double t) const override;
    DensityMatrix state_at(double t) const;

private:
    const SpectralPropagator* p_;
    GridModel g_;
    FactoredDensity w0_;
    GuidanceOptions opts_;
};

/// Explicit midpoint (RK2) steps; positions leaving [0, L] are reflected.
/// Records every `record_every`-th step plus the initial point.
Trajectory integrate_trajectory(const GuidanceSource& source, const Configuration& q0, double dt,
                                int steps, BohmIncidents* log = nullptr, int record_every = 1);

struct EnsembleRun {
    std::vector<double> times;
    std::vector<std::vector<Configuration>> snapshots;  // [recorded time][trajectory]
    BohmIncidents incidents;
};

/// Same stepping as integrate_trajectory for a whole ensemble; each field is
/// evaluated once per stage and shared by all trajectories. For one
/// particle, the initial ordering is checked at every step and violations
/// are counted as crossings.
EnsembleRun integrate_ensemble(const GuidanceSource& source, std::span<const Configuration> q0,
                               double dt, int steps, int record_every = 1, int threads = 1);

/// Probability mass per histogram bin for grid populations, each grid
/// cell's mass spread uniformly over the cell. One particle: n_bins bins on
/// [0, L]; two particles: n_bins x n_bins bins, row-major in particle 0.
RealVector binned_populations(const GridModel& g, const RealVector& populations, int n_bins);
RealVector empirical_histogram(const GridModel& g, std::span<const Configuration> positions, int n_bins);

/// L1 distance between the empirical histogram of positions and the binned
/// theoretical density. Needs at least 1000 positions.
double equivariance_distance(const GridModel& g, std::span<const Configuration> positions,
                             const RealVector& populations, int n_bins);

}  // namespace qsm
