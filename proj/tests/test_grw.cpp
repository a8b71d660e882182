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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qsm/grw.hpp"
#include "qsm/qstate.hpp"
#include "test_support.hpp"

using namespace qsm;
using namespace qsm::testing;

namespace {

GridModel box(int points, int particles = 1) {
    GridModel g;
    g.grid_points = points;
    g.n_particles = particles;
    return g;
}

WaveFunction gaussian(const GridModel& g, double c, double s, double k = 0.0) {
    ComplexVector v(g.grid_points);
    for (int j = 0; j < g.grid_points; ++j) {
        const double x = g.position(j);
        v[j] = std::exp(-(x - c) * (x - c) / (4 * s * s)) * std::polar(1.0, k * x);
    }
    return WaveFunction::normalized(v);
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(GRWParams{0.0, 0.1, 1}.validate());
    CHECK_THROWS_CODE((GRWParams{-1.0, 0.1, 1}.validate()), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE((GRWParams{1.0, 0.0, 1}.validate()), ErrorCode::InvalidArgument);
    CHECK_THROWS_CODE((GRWParams{1.0, 0.1, 0}.validate()), ErrorCode::InvalidArgument);
    CHECK(GRWParams{2.0, 0.1, 3}.total_rate() == 6.0);
}

TEST_CASE("collapse operators resolve the identity") {
    for (int particles : {1, 2}) {
        const GridModel g = box(12, particles);
        const CollapseKernel kern(g, 0.08);
        for (int k = 1; k <= particles; ++k) {
            RealVector sum = RealVector::Zero(g.config_dim());
            for (int j = 0; j < g.grid_points; ++j) {
                const RealVector d = kern.rate_diagonal(k, j);
                CHECK(d.minCoeff() >= 0.0);
                sum += d * g.spacing();
            }
            CHECK((sum - RealVector::Ones(g.config_dim())).cwiseAbs().maxCoeff() < 1e-12);
        }
        CHECK_THROWS_CODE(kern.rate_diagonal(particles + 1, 0), ErrorCode::IndexOutOfRange);
        CHECK_THROWS_CODE(kern.rate_diagonal(1, g.grid_points), ErrorCode::OffGrid);
    }
}

TEST_CASE("collapse rate operator by location") {
    const GridModel g = box(9);
    const HermitianOperator a = collapse_rate_operator(g, 1, g.position(4), 0.1);
    const HermitianOperator b = collapse_rate_operator(g, 1, 4, 0.1);
    CHECK((a.matrix() - b.matrix()).norm() < 1e-14);
    CHECK_THROWS_CODE(collapse_rate_operator(g, 1, 0.123456, 0.1), ErrorCode::OffGrid);
}

TEST_CASE("collapse schedule is a Poisson process") {
    const GRWParams params{1.5, 0.1, 2};
    const double t_end = 2.0;
    const int runs = 1000;
    std::size_t count = 0, first_particle = 0;
    std::vector<double> gaps;
    for (int r = 0; r < runs; ++r) {
        RandomStream rng(30, static_cast<std::uint64_t>(r), StreamPurpose::CollapsePsi);
        const auto s = sample_collapse_schedule(params, t_end, rng);
        count += s.size();
        double prev = 0.0;
        for (const auto& e : s) {
            REQUIRE(e.time >= prev);
            REQUIRE(e.time <= t_end);
            REQUIRE((e.particle == 1 || e.particle == 2));
            first_particle += e.particle == 1 ? 1 : 0;
            gaps.push_back(e.time - prev);
            prev = e.time;
        }
    }
    const double mean = runs * params.total_rate() * t_end;
    CHECK(std::abs(static_cast<double>(count) - mean) <= 3.0 * std::sqrt(mean));
    CHECK(std::abs(static_cast<double>(first_particle) - count / 2.0) <= 3.0 * std::sqrt(count / 4.0));
    RandomStream rng(30, 0);
    CHECK(sample_collapse_schedule(GRWParams{0.0, 0.1, 1}, 5.0, rng).empty());
}

TEST_CASE("pure-state W collapse reproduces the wave-function collapse") {
    const GridModel g = box(40);
    const CollapseKernel kern(g, 0.05);
    RandomStream r0(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const WaveFunction psi = WaveFunction::normalized(random_vector(40, r0));
        RandomStream a(31, static_cast<std::uint64_t>(trial), StreamPurpose::CollapsePsi);
        RandomStream b(31, static_cast<std::uint64_t>(trial), StreamPurpose::CollapsePsi);
        const PsiCollapse pc = psi_grw_collapse(psi, 1, kern, a);
        const WCollapse wc = w_grw_collapse(DensityMatrix::pure(psi), 1, kern, b);
        CHECK(pc.event.center_index == wc.event.center_index);
        CHECK((wc.state.matrix() - pc.state.outer()).norm() <= 1e-10);
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("collapse centers follow the Born weights of a cat state") {
    const GridModel g = box(80);
    const CollapseKernel kern(g, 0.02);
    const WaveFunction left = gaussian(g, 0.25, 0.02), right = gaussian(g, 0.75, 0.02);
    const double p_left = 0.3;
    const WaveFunction cat =
        WaveFunction::normalized(std::sqrt(p_left) * left.amplitudes() + std::sqrt(1 - p_left) * right.amplitudes());
    const int n = 2000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng(32, static_cast<std::uint64_t>(i));
        const PsiCollapse c = psi_grw_collapse(cat, 1, kern, rng);
        const bool is_left = c.event.center < 0.5;
        hits += is_left ? 1 : 0;
        // the post-collapse state sits on the chosen side
        double mass_left = 0;
        for (int j = 0; j < g.grid_points; ++j)
            if (g.position(j) < 0.5) mass_left += std::norm(c.state.amplitudes()[j]);
        CHECK((is_left ? mass_left : 1.0 - mass_left) > 0.999);
    }
    CHECK(std::abs(hits - n * p_left) <= 4.0 * std::sqrt(n * p_left * (1 - p_left)));
}

TEST_CASE("averaged collapse map") {
    const GridModel g = box(16);
    const CollapseKernel kern(g, 0.1);
    RandomStream rng(33, 0);
    const ComplexMatrix a = random_matrix(16, 3, rng);
    const DensityMatrix w = DensityMatrix::from_matrix(a * a.adjoint() / (a * a.adjoint()).trace().real());
    const ComplexMatrix avg = mean_collapse_map(w, 1, kern);
    CHECK(std::abs(avg.trace() - cplx(1.0)) < 1e-12);
    // the average of post-collapse states weighted by their probabilities
    const RealVector probs = kern.center_probabilities(w.matrix().diagonal().real(), 1);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    ComplexMatrix mix = ComplexMatrix::Zero(16, 16);
    for (int j = 0; j < 16; ++j) mix += probs[j] * collapse_at(w, 1, j, kern).matrix();
    CHECK((mix - avg).norm() < 1e-12);
}

TEST_CASE("GRW process") {
    const GridModel g = box(30);
    const SpectralPropagator p(build_grid_hamiltonian(g));
    const CollapseKernel kern(g, 0.05);
    const WaveFunction psi = gaussian(g, 0.4, 0.05, 20.0);

    RandomStream r0(34, 0);
    const auto off = run_grw_process(psi, p, kern, GRWParams{0.0, 0.05, 1}, 0.3, r0);
    CHECK(off.flashes.empty());
    CHECK((off.final_state.amplitudes() - evolve_wavefunction(p, psi, 0.3).amplitudes()).norm() < 1e-12);

    const GRWParams params{20.0, 0.05, 1};
    RandomStream ra(34, 1, StreamPurpose::CollapsePsi), rb(34, 1, StreamPurpose::CollapsePsi);
    const auto rp = run_grw_process(psi, p, kern, params, 0.3, ra);
    const auto rw = run_grw_process(DensityMatrix::pure(psi), p, kern, params, 0.3, rb);
    REQUIRE(rp.flashes.size() == rw.flashes.size());
    CHECK(!rp.flashes.empty());
    for (std::size_t i = 0; i < rp.flashes.size(); ++i) {
        CHECK(rp.flashes[i].time == rw.flashes[i].time);
        CHECK(rp.flashes[i].center_index == rw.flashes[i].center_index);
    }
    CHECK((rw.final_state.matrix() - rp.final_state.outer()).norm() <= 1e-10);
    CHECK(rp.trace.size() == rp.flashes.size() + 2);
    CHECK(std::abs(rw.final_state.trace() - 1.0) < 1e-12);

    const MassDensityOperator m = grid_mass_density(g);
    GRWRunOptions opt;
    opt.mass_density = &m;
    RandomStream rc(34, 2);
    const auto rm = run_grw_process(psi, p, kern, params, 0.3, rc, opt);
    CHECK(rm.mass_snapshots.size() == rm.flashes.size());
    for (const auto& snap : rm.mass_snapshots) {
        double total = 0;
        for (double x : snap) total += x;
        CHECK(total == doctest::Approx(g.mass).epsilon(1e-12));
    }
}
