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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsm/coarse.hpp"
#include "qsm/models.hpp"
#include "qsm/qstate.hpp"

namespace qsm {

inline constexpr int kSchemaVersion = 1;

struct ModelConfig {
    enum class Kind { Lattice, Grid };
    Kind kind = Kind::Lattice;
    LatticeModel lattice;
    GridModel grid;  // hbar is taken from units
};

struct ShellConfig {
    bool full_space = true;
    double e = 0.0;
    double delta_e = 0.0;
};

struct MacroConfig {
    std::string variable;  // left_half_occupation | total_occupation | position
    std::vector<double> bin_edges;  // empty: one bin per integer value
    int particle = 0;
};

/// Wave packet H_n((x - c)/s) exp(-(x - c)^2 / 4s^2) exp(ikx), n = order.
struct PacketConfig {
    double center = 0.5;
    double width = 0.05;
    double momentum = 0.0;
    int order = 0;
};

/// Subspace selectors, exactly one per subspace: a macro cell label, a run
/// of energy eigenstates, or the span of a packet list.
struct SubspaceSelector {
    std::optional<int> cell;
    std::optional<std::pair<int, int>> eigenstates;  // first, count
    std::vector<PacketConfig> packets;
};

struct IPHConfig {
    IPHMode mode = IPHMode::Strong;
    std::vector<SubspaceSelector> subspaces;  // one for strong
    std::size_t selected_index = 0;
    bool fuzzy = false;
};

struct DynamicsConfig {
    enum class Kind { Unitary, GRW, Bohm };
    Kind kind = Kind::Unitary;
    double t_end = 0.0;
    int n_times = 101;
    double dt = 0.0;
    double lambda = 0.0;
    double sigma = 0.0;
    int trajectories = 0;
    int n_bins = 20;
    int record_every = 1;
};

struct ScenarioConfig {
    std::string name;
    ModelConfig model;
    double hbar = 1.0;
    double k_b = 1.0;
    ShellConfig shell;
    MacroConfig macro;
    IPHConfig iph;
    DynamicsConfig dynamics;
    std::size_t ensemble_size = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    ClosenessPolicy closeness;
    nlohmann::json source;  // the parsed document, with overrides applied
};

/// Throws Error{ConfigError} naming the offending field.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

void override_seed(ScenarioConfig& cfg, std::uint64_t seed);
void override_output_dir(ScenarioConfig& cfg, const std::string& dir);

/// Sorted-key compact JSON of everything that affects results (the output
/// section is excluded).
std::string canonical_config(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);

std::string sha256_hex(const std::string& bytes);

}  // namespace qsm
