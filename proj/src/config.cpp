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
#include "qsm/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qsm/error.hpp"

namespace qsm {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, field + ": " + what, field);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    const std::string field = path.empty() ? key : path + "." + key;
    if (!obj.is_object() || !obj.contains(key)) bad(field, "missing required field");
    return obj.at(key);
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) bad(join(path, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(join(path, key), "must be finite");
    return d;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
    return obj.contains(key) ? get_number(obj, key, path) : fallback;
}

long long get_integer(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_integer()) bad(join(path, key), "expected an integer");
    return v.get<long long>();
}

long long integer_or(const json& obj, const char* key, const std::string& path, long long fallback) {
    return obj.contains(key) ? get_integer(obj, key, path) : fallback;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) bad(join(path, key), "expected a string");
    return v.get<std::string>();
}

const json& get_object(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_object()) bad(join(path, key), "expected an object");
    return v;
}

void parse_model(const json& m, ScenarioConfig& cfg) {
    const std::string type = get_string(m, "type", "model");
    if (type == "lattice") {
        cfg.model.kind = ModelConfig::Kind::Lattice;
        const long long n = get_integer(m, "n_sites", "model");
        if (n < 2 || n > kMaxLatticeSites)
            bad("model.n_sites", "must be in [2, " + std::to_string(kMaxLatticeSites) + "]");
        cfg.model.lattice.n_sites = static_cast<int>(n);
        cfg.model.lattice.coupling = get_number(m, "coupling", "model");
        cfg.model.lattice.field = number_or(m, "field", "model", 0.0);
    } else if (type == "grid") {
        cfg.model.kind = ModelConfig::Kind::Grid;
        GridModel& g = cfg.model.grid;
        const long long np = integer_or(m, "n_particles", "model", 1);
        if (np != 1 && np != 2) bad("model.n_particles", "must be 1 or 2");
        g.n_particles = static_cast<int>(np);
        const long long gp = get_integer(m, "grid_points", "model");
        if (gp < 8) bad("model.grid_points", "must be at least 8");
        g.grid_points = static_cast<int>(gp);
        g.box_length = get_number(m, "box_length", "model");
        if (!(g.box_length > 0.0)) bad("model.box_length", "must be positive");
        g.mass = number_or(m, "mass", "model", 1.0);
        if (!(g.mass > 0.0)) bad("model.mass", "must be positive");
        g.potential.clear();
        if (m.contains("potential")) {
            const json& p = get_object(m, "potential", "model");
            const std::string pt = get_string(p, "type", "model.potential");
            if (pt == "zero") {
            } else if (pt == "constant") {
                g.potential.assign(static_cast<std::size_t>(g.grid_points),
                                   get_number(p, "value", "model.potential"));
            } else if (pt == "harmonic") {
                const double omega = get_number(p, "omega", "model.potential");
                const double c = number_or(p, "center", "model.potential", 0.5 * g.box_length);
                for (int j = 0; j < g.grid_points; ++j) {
                    const double x = g.position(j) - c;
                    g.potential.push_back(0.5 * g.mass * omega * omega * x * x);
                }
            } else {
                bad("model.potential.type", "unknown potential '" + pt + "'");
            }
        }
    } else {
        bad("model.type", "unknown model type '" + type + "'");
    }
}

std::vector<double> parse_edges(const json& m, const std::string& path) {
    const json& e = require(m, "bin_edges", path);
    if (!e.is_array() || e.size() < 2) bad(path + ".bin_edges", "expected an array of at least two numbers");
    std::vector<double> out;
    for (const auto& v : e) {
        if (!v.is_number()) bad(path + ".bin_edges", "expected numbers");
        out.push_back(v.get<double>());
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) bad(path + ".bin_edges", "must be strictly increasing");
    return out;
}

PacketConfig parse_packet(const json& p, const std::string& path) {
    PacketConfig pk;
    pk.center = get_number(p, "center", path);
    pk.width = get_number(p, "width", path);
    if (!(pk.width > 0.0)) bad(path + ".width", "must be positive");
    pk.momentum = number_or(p, "momentum", path, 0.0);
    const long long order = integer_or(p, "order", path, 0);
    if (order < 0 || order > 3) bad(path + ".order", "must be in [0, 3]");
    pk.order = static_cast<int>(order);
    return pk;
}

SubspaceSelector parse_selector(const json& s, const std::string& path) {
    if (s.is_number_integer()) return SubspaceSelector{s.get<int>(), std::nullopt, {}};
    if (!s.is_object()) bad(path, "expected a cell label or a selector object");
    SubspaceSelector sel;
    int count = 0;
    if (s.contains("cell")) {
        sel.cell = static_cast<int>(get_integer(s, "cell", path));
        ++count;
    }
    if (s.contains("eigenstates")) {
        const json& e = get_object(s, "eigenstates", path);
        const long long first = get_integer(e, "first", path + ".eigenstates");
        const long long n = get_integer(e, "count", path + ".eigenstates");
        if (first < 0) bad(path + ".eigenstates.first", "must be non-negative");
        if (n < 1) bad(path + ".eigenstates.count", "must be positive");
        sel.eigenstates = std::make_pair(static_cast<int>(first), static_cast<int>(n));
        ++count;
    }
    if (s.contains("packets")) {
        const json& ps = require(s, "packets", path);
        if (!ps.is_array() || ps.empty()) bad(path + ".packets", "expected a non-empty array");
        for (std::size_t i = 0; i < ps.size(); ++i)
            sel.packets.push_back(parse_packet(ps[i], path + ".packets[" + std::to_string(i) + "]"));
        ++count;
    }
    if (count != 1) bad(path, "exactly one of cell, eigenstates, packets is required");
    return sel;
}

void parse_iph(const json& m, ScenarioConfig& cfg) {
    const std::string mode = m.contains("mode") ? get_string(m, "mode", "iph") : "strong";
    IPHConfig& iph = cfg.iph;
    if (mode == "strong") {
        iph.mode = IPHMode::Strong;
        iph.subspaces.push_back(parse_selector(m, "iph"));
        if (m.contains("selected_index") && get_integer(m, "selected_index", "iph") != 0)
            bad("iph.selected_index", "strong mode has a single subspace");
    } else if (mode == "weak") {
        iph.mode = IPHMode::Weak;
        const json& list = require(m, "subspaces", "iph");
        if (!list.is_array() || list.empty()) bad("iph.subspaces", "expected a non-empty array");
        for (std::size_t i = 0; i < list.size(); ++i)
            iph.subspaces.push_back(parse_selector(list[i], "iph.subspaces[" + std::to_string(i) + "]"));
        const long long sel = integer_or(m, "selected_index", "iph", 0);
        if (sel < 0 || static_cast<std::size_t>(sel) >= iph.subspaces.size())
            bad("iph.selected_index", "out of range for the subspace list");
        iph.selected_index = static_cast<std::size_t>(sel);
        if (m.contains("fuzzy")) {
            if (!m.at("fuzzy").is_boolean()) bad("iph.fuzzy", "expected a boolean");
            iph.fuzzy = m.at("fuzzy").get<bool>();
        }
    } else {
        bad("iph.mode", "must be 'strong' or 'weak'");
    }
}

void parse_dynamics(const json& m, ScenarioConfig& cfg) {
    DynamicsConfig& d = cfg.dynamics;
    const std::string type = get_string(m, "type", "dynamics");
    d.t_end = get_number(m, "t_end", "dynamics");
    if (!(d.t_end > 0.0)) bad("dynamics.t_end", "must be positive");
    if (type == "unitary") {
        d.kind = DynamicsConfig::Kind::Unitary;
        const long long n = integer_or(m, "n_times", "dynamics", 101);
        if (n < 2) bad("dynamics.n_times", "must be at least 2");
        d.n_times = static_cast<int>(n);
    } else if (type == "grw") {
        d.kind = DynamicsConfig::Kind::GRW;
        d.lambda = get_number(m, "lambda", "dynamics");
        if (d.lambda < 0.0) bad("dynamics.lambda", "must be non-negative");
        d.sigma = get_number(m, "sigma", "dynamics");
        if (!(d.sigma > 0.0)) bad("dynamics.sigma", "must be positive");
        const long long nb = integer_or(m, "n_bins", "dynamics", 20);
        if (nb < 1) bad("dynamics.n_bins", "must be positive");
        d.n_bins = static_cast<int>(nb);
    } else if (type == "bohm") {
        d.kind = DynamicsConfig::Kind::Bohm;
        d.dt = get_number(m, "dt", "dynamics");
        if (!(d.dt > 0.0) || d.dt > d.t_end) bad("dynamics.dt", "must be in (0, t_end]");
        const long long nt = get_integer(m, "trajectories", "dynamics");
        if (nt < 1000) bad("dynamics.trajectories", "at least 1000 trajectories are required");
        d.trajectories = static_cast<int>(nt);
        const long long nb = integer_or(m, "n_bins", "dynamics", 100);
        if (nb < 1) bad("dynamics.n_bins", "must be positive");
        d.n_bins = static_cast<int>(nb);
        const long long re = integer_or(m, "record_every", "dynamics", 1);
        if (re < 1) bad("dynamics.record_every", "must be positive");
        d.record_every = static_cast<int>(re);
    } else {
        bad("dynamics.type", "unknown dynamics '" + type + "'");
    }
}

void check_consistency(const ScenarioConfig& cfg) {
    const bool lattice = cfg.model.kind == ModelConfig::Kind::Lattice;
    const std::string& v = cfg.macro.variable;
    if (lattice && v == "position") bad("macro.variable", "position needs a grid model");
    if (!lattice && v != "position") bad("macro.variable", "grid models support only 'position'");
    if (v == "position" && cfg.macro.bin_edges.empty()) bad("macro.bin_edges", "required for position");
    if (cfg.model.kind == ModelConfig::Kind::Grid && cfg.macro.particle >= cfg.model.grid.n_particles)
        bad("macro.particle", "no such particle");
    if (cfg.dynamics.kind != DynamicsConfig::Kind::Unitary && lattice)
        bad("dynamics.type", "grw and bohm dynamics need a grid model");
    for (std::size_t i = 0; i < cfg.iph.subspaces.size(); ++i)
        if (!cfg.iph.subspaces[i].packets.empty() && lattice)
            bad("iph", "packets need a grid model");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path.string(), "config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
    if (!doc.is_object()) bad("config", "top level must be an object");
    ScenarioConfig cfg;
    cfg.source = doc;
    const long long version = get_integer(doc, "schema_version", "");
    if (version != kSchemaVersion) bad("schema_version", "unsupported version " + std::to_string(version));
    if (doc.contains("name")) cfg.name = get_string(doc, "name", "");

    parse_model(get_object(doc, "model", ""), cfg);

    if (doc.contains("units")) {
        const json& u = get_object(doc, "units", "");
        cfg.hbar = number_or(u, "hbar", "units", 1.0);
        cfg.k_b = number_or(u, "k_B", "units", 1.0);
        if (!(cfg.hbar > 0.0)) bad("units.hbar", "must be positive");
        if (!(cfg.k_b > 0.0)) bad("units.k_B", "must be positive");
    }
    cfg.model.grid.hbar = cfg.hbar;

    const json& shell = get_object(doc, "shell", "");
    if (shell.contains("full_space")) {
        if (!shell.at("full_space").is_boolean()) bad("shell.full_space", "expected a boolean");
        cfg.shell.full_space = shell.at("full_space").get<bool>();
    } else {
        cfg.shell.full_space = false;
    }
    if (!cfg.shell.full_space) {
        cfg.shell.e = get_number(shell, "E", "shell");
        cfg.shell.delta_e = get_number(shell, "deltaE", "shell");
        if (!(cfg.shell.delta_e > 0.0)) bad("shell.deltaE", "must be positive");
    }

    const json& macro = get_object(doc, "macro", "");
    cfg.macro.variable = get_string(macro, "variable", "macro");
    if (cfg.macro.variable != "left_half_occupation" && cfg.macro.variable != "total_occupation" &&
        cfg.macro.variable != "position")
        bad("macro.variable", "unknown macro-variable '" + cfg.macro.variable + "'");
    if (macro.contains("bin_edges")) cfg.macro.bin_edges = parse_edges(macro, "macro");
    cfg.macro.particle = static_cast<int>(integer_or(macro, "particle", "macro", 0));
    if (cfg.macro.particle < 0) bad("macro.particle", "must be non-negative");

    parse_iph(get_object(doc, "iph", ""), cfg);
    parse_dynamics(get_object(doc, "dynamics", ""), cfg);

    if (doc.contains("ensemble")) {
        const long long m = get_integer(get_object(doc, "ensemble", ""), "size", "ensemble");
        if (m < 1) bad("ensemble.size", "must be at least 1");
        cfg.ensemble_size = static_cast<std::size_t>(m);
    }
    const json& seed = require(doc, "seed", "");
    if (!seed.is_number_integer()) bad("seed", "expected a 64-bit integer");
    cfg.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                         : static_cast<std::uint64_t>(seed.get<std::int64_t>());
    if (doc.contains("output")) {
        const json& out = get_object(doc, "output", "");
        if (out.contains("dir")) cfg.output_dir = get_string(out, "dir", "output");
    }
    if (doc.contains("closeness")) {
        cfg.closeness.epsilon = get_number(get_object(doc, "closeness", ""), "epsilon", "closeness");
        if (!(cfg.closeness.epsilon > 0.0 && cfg.closeness.epsilon < 1.0))
            bad("closeness.epsilon", "must be in (0, 1)");
    }
    check_consistency(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        bad("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

void override_seed(ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.source["seed"] = seed;
}

void override_output_dir(ScenarioConfig& cfg, const std::string& dir) {
    cfg.output_dir = dir;
    cfg.source["output"]["dir"] = dir;
}

std::string canonical_config(const ScenarioConfig& cfg) {
    json c = cfg.source;
    c.erase("output");
    return c.dump();
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::IoError, "SHA-256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string config_hash(const ScenarioConfig& cfg) { return sha256_hex(canonical_config(cfg)); }

}  // namespace qsm
