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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsm/coarse.hpp"
#include "qsm/config.hpp"
#include "qsm/output.hpp"
#include "qsm/qstate.hpp"
#include "qsm/unitary.hpp"

namespace qsm {

/// Everything a config determines before any dynamics runs: Hamiltonian and
/// its spectrum, shell, macro decomposition and the initial projection.
class Scenario {
public:
    explicit Scenario(ScenarioConfig cfg);

    const ScenarioConfig& config() const noexcept { return cfg_; }
    const SpectralPropagator& propagator() const noexcept { return *prop_; }
    const HermitianOperator& hamiltonian() const noexcept { return prop_->hamiltonian(); }
    bool is_grid() const noexcept { return cfg_.model.kind == ModelConfig::Kind::Grid; }
    const GridModel& grid() const;
    /// Eigenvector indices spanning the shell (all of them for full space).
    const std::vector<Index>& shell_indices() const noexcept { return shell_indices_; }
    const MacroDecomposition& decomposition() const noexcept { return *dec_; }
    const IPHSpec& iph() const noexcept { return iph_; }
    DensityMatrix initial_density() const { return qsm::initial_density(iph_); }
    /// First packet of a packet selector, else a mu_S draw from stream 0.
    WaveFunction reference_state() const;

private:
    ScenarioConfig cfg_;
    std::shared_ptr<const SpectralPropagator> prop_;
    std::vector<Index> shell_indices_;
    std::shared_ptr<const MacroDecomposition> dec_;
    IPHSpec iph_;
};

/// He_n((x - c)/s) exp(-(x - c)^2 / 4s^2) exp(ikx) on a one-particle grid,
/// normalized. Distinct orders at equal (c, s) are orthogonal.
WaveFunction make_packet(const GridModel& g, const PacketConfig& p);

struct RunOptions {
    int threads = 1;
    bool write_files = true;
};

struct RunRecord {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started_utc;
    std::string finished_utc;
    nlohmann::json incidents = nlohmann::json::object();
    nlohmann::json diagnostics = nlohmann::json::object();
    nlohmann::json results = nlohmann::json::object();
    std::vector<FileEntry> files;

    /// Everything except the timestamps, which go to run_timing.json.
    nlohmann::json manifest() const;
};

RunRecord run_entropy_experiment(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_equivalence_experiment(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_grw_equivalence(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_bohm_experiment(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Shell dimension, cells, equilibrium cell and IPH subspace dimensions.
nlohmann::json decompose_summary(const ScenarioConfig& cfg);

/// Total-variation distance between two histograms given as counts.
double total_variation(const std::vector<double>& a, const std::vector<double>& b);
/// Least-squares slope of log(y) against log(x).
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qsm
