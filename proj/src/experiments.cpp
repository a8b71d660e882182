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
#include "qsm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>

#include "qsm/bohm.hpp"
#include "qsm/error.hpp"
#include "qsm/grw.hpp"
#include "qsm/parallel.hpp"
#include "qsm/policy.hpp"

namespace qsm {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, field + ": " + what, field);
}

HermitianOperator build_hamiltonian(const ScenarioConfig& cfg) {
    if (cfg.model.kind == ModelConfig::Kind::Lattice) return build_spin_chain(cfg.model.lattice);
    return build_grid_hamiltonian(cfg.model.grid);
}

MacroVariable build_macro(const ScenarioConfig& cfg) {
    const MacroConfig& m = cfg.macro;
    if (cfg.model.kind == ModelConfig::Kind::Grid) return position_variable(cfg.model.grid, m.bin_edges, m.particle);
    const int n = cfg.model.lattice.n_sites;
    MacroVariable base = m.variable == "total_occupation" ? total_occupation(n) : left_half_occupation(n);
    if (m.bin_edges.empty()) return base;
    return MacroVariable(base.op(), m.bin_edges);
}

Subspace select_subspace(const SubspaceSelector& sel, const std::string& field, const ScenarioConfig& cfg,
                         const SpectralDecomposition& spec, const MacroDecomposition& dec) {
    if (sel.cell) {
        if (!dec.has_label(*sel.cell)) {
            const auto& dropped = dec.dropped_labels();
            const bool empty = std::find(dropped.begin(), dropped.end(), *sel.cell) != dropped.end();
            config_error(field + ".cell", empty ? "cell " + std::to_string(*sel.cell) + " is empty in the shell"
                                                : "no cell labelled " + std::to_string(*sel.cell));
        }
        return dec.cell(*sel.cell).space;
    }
    if (sel.eigenstates) {
        const auto [first, count] = *sel.eigenstates;
        if (first + count > spec.eigenvalues.size())
            config_error(field + ".eigenstates", "runs past the last eigenstate");
        std::vector<Index> idx(static_cast<std::size_t>(count));
        std::iota(idx.begin(), idx.end(), static_cast<Index>(first));
        return eigen_subspace(spec, idx);
    }
    if (cfg.model.grid.n_particles != 1) config_error(field + ".packets", "packets need a one-particle grid");
    std::vector<ComplexVector> vs;
    for (const auto& p : sel.packets) vs.push_back(make_packet(cfg.model.grid, p).amplitudes());
    return orthonormalize(vs);
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunRecord begin_record(const std::string& name, const ScenarioConfig& cfg) {
    RunRecord rec;
    rec.experiment = name;
    rec.config_hash = config_hash(cfg);
    rec.seed = cfg.seed;
    rec.started_utc = utc_now();
    return rec;
}

void finish_record(RunRecord& rec, std::optional<OutputSink>& sink) {
    rec.finished_utc = utc_now();
    if (!sink) return;
    rec.files = sink->files();
    const json manifest = rec.manifest();
    sink->write("run_manifest.json", manifest);
    sink->write("run_timing.json", json{{"started_utc", rec.started_utc}, {"finished_utc", rec.finished_utc}});
    rec.files = sink->files();
}

std::optional<OutputSink> open_sink(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (!opts.write_files) return std::nullopt;
    return OutputSink(cfg.output_dir);
}

std::vector<std::string> trace_header(const MacroDecomposition& dec) {
    std::vector<std::string> h{"t"};
    for (const auto& c : dec.cells()) h.push_back("w_" + std::to_string(c.label));
    h.insert(h.end(), {"eff_label", "S_B", "purity"});
    return h;
}

// Checks the per-row invariants and formats one trace row.
std::vector<std::string> trace_row(double t, std::span<const double> weights, double purity_value,
                                   const MacroDecomposition& dec, const ScenarioConfig& cfg,
                                   double& max_row_error) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < -1e-12 || w > 1.0 + 1e-12)
            fail(ErrorCode::InvariantViolation, "macro-weight " + format_double(w) + " outside [0, 1]");
        sum += w;
    }
    max_row_error = std::max(max_row_error, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-6)
        fail(ErrorCode::InvariantViolation, "macro-weights sum to " + format_double(sum));
    if (!(purity_value > 0.0 && purity_value <= 1.0 + 1e-9))
        fail(ErrorCode::InvariantViolation, "purity " + format_double(purity_value) + " outside (0, 1]");
    std::vector<std::string> row{format_double(t)};
    for (double w : weights) row.push_back(format_double(std::clamp(w, 0.0, 1.0)));
    const auto label = effective_macrostate(weights, dec, cfg.closeness);
    row.push_back(label ? std::to_string(*label) : std::string());
    row.push_back(format_optional(effective_entropy(weights, dec, cfg.closeness, cfg.k_b)));
    row.push_back(format_double(std::min(purity_value, 1.0)));
    return row;
}

std::string padded(std::size_t i, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total > 0 ? total - 1 : 0).size());
    std::string s = std::to_string(i);
    return std::string(width - std::min(width, s.size()), '0') + s;
}

json incidents_json(const BohmIncidents& b) {
    return json{{"node_regions", b.node_regions},
                {"velocity_caps", b.velocity_caps},
                {"reflections", b.reflections},
                {"crossings", b.crossings}};
}

void require_kind(const ScenarioConfig& cfg, DynamicsConfig::Kind kind, const char* what) {
    if (cfg.dynamics.kind != kind) config_error("dynamics.type", std::string("this experiment needs ") + what);
}

}  // namespace

// ---------------------------------------------------------------------------

WaveFunction make_packet(const GridModel& g, const PacketConfig& p) {
    g.validate();
    if (g.n_particles != 1) fail(ErrorCode::InvalidArgument, "packets are one-particle states");
    ComplexVector v(g.grid_points);
    for (int j = 0; j < g.grid_points; ++j) {
        const double x = g.position(j);
        const double u = (x - p.center) / p.width;
        double he = 1.0;
        switch (p.order) {
            case 0: he = 1.0; break;
            case 1: he = u; break;
            case 2: he = u * u - 1.0; break;
            case 3: he = u * u * u - 3.0 * u; break;
            default: fail(ErrorCode::InvalidArgument, "packet order must be in [0, 3]");
        }
        v[j] = he * std::exp(-0.25 * u * u) * std::polar(1.0, p.momentum * x);
    }
    return WaveFunction::normalized(std::move(v));
}

Scenario::Scenario(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    if (is_grid()) cfg_.model.grid.validate();
    prop_ = std::make_shared<const SpectralPropagator>(build_hamiltonian(cfg_), cfg_.hbar);
    const SpectralDecomposition& spec = prop_->spectrum();
    const Index dim = prop_->dim();
    Subspace shell = Subspace::full(dim);
    if (cfg_.shell.full_space) {
        shell_indices_.resize(static_cast<std::size_t>(dim));
        std::iota(shell_indices_.begin(), shell_indices_.end(), Index{0});
    } else {
        shell_indices_ = window_indices(spec, cfg_.shell.e, cfg_.shell.delta_e);
        if (shell_indices_.empty())
            throw Error(ErrorCode::EmptyShell, "no eigenvalue in the energy window", "shell");
        shell = eigen_subspace(spec, shell_indices_);
    }
    dec_ = std::make_shared<const MacroDecomposition>(decompose(shell, build_macro(cfg_)));

    iph_.mode = cfg_.iph.mode;
    iph_.selected_index = cfg_.iph.selected_index;
    iph_.fuzzy = cfg_.iph.fuzzy;
    for (std::size_t i = 0; i < cfg_.iph.subspaces.size(); ++i) {
        const std::string field =
            iph_.mode == IPHMode::Strong ? std::string("iph") : "iph.subspaces[" + std::to_string(i) + "]";
        iph_.subspaces.push_back(select_subspace(cfg_.iph.subspaces[i], field, cfg_, spec, *dec_));
    }
    iph_.validate();
}

const GridModel& Scenario::grid() const {
    if (!is_grid()) config_error("model.type", "a grid model is required");
    return cfg_.model.grid;
}

WaveFunction Scenario::reference_state() const {
    const SubspaceSelector& sel = cfg_.iph.subspaces.at(iph_.selected_index);
    if (!sel.packets.empty()) return make_packet(grid(), sel.packets.front());
    RandomStream rng(cfg_.seed, 0, StreamPurpose::PureSamples);
    return sample_mu_s(iph_.selected(), rng);
}

json RunRecord::manifest() const {
    json files_json = json::array();
    for (const auto& f : files) files_json.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return json{{"schema_version", kSchemaVersion},
                {"experiment", experiment},
                {"config_hash", config_hash},
                {"seed", seed},
                {"rng", "philox4x64-10; key = (seed, stream id), counter = (block, purpose, 0, 0)"},
                {"incidents", incidents},
                {"diagnostics", diagnostics},
                {"results", results},
                {"files", files_json},
                {"physical_reference_scale", {{"grw_lambda_per_s", 1e-15}, {"grw_sigma_m", 1e-7}}}};
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "histograms differ in size");
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    if (!(sa > 0.0) || !(sb > 0.0)) fail(ErrorCode::DegenerateDistribution, "empty histogram");
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] / sa - b[i] / sb);
    return 0.5 * tv;
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) return std::nullopt;
    return sxy / sxx;
}

// ---------------------------------------------------------------------------

RunRecord run_entropy_experiment(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.model.kind != ModelConfig::Kind::Lattice)
        config_error("model.type", "the entropy experiment needs a lattice model");
    require_kind(cfg, DynamicsConfig::Kind::Unitary, "unitary dynamics");
    RunRecord rec = begin_record("entropy", cfg);
    const Scenario sc(cfg);
    const MacroDecomposition& dec = sc.decomposition();
    const EigenFrame frame(sc.propagator(), sc.shell_indices());
    const std::size_t n_cells = dec.size();
    const std::size_t m = cfg.ensemble_size;
    const int n_times = cfg.dynamics.n_times;

    // Cells in frame coordinates: stacked bases for the pure states and
    // projectors for the density matrix.
    std::vector<Index> offset(n_cells + 1, 0);
    for (std::size_t c = 0; c < n_cells; ++c) offset[c + 1] = offset[c] + dec.cells()[c].dim();
    ComplexMatrix stacked(frame.size(), offset.back());
    std::vector<ComplexMatrix> proj(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const ComplexMatrix b = frame.basis().adjoint() * dec.cells()[c].space.basis();
        stacked.middleCols(offset[c], b.cols()) = b;
        proj[c] = (b * b.adjoint()).conjugate();
    }

    ComplexMatrix c0(frame.size(), static_cast<Index>(m));
    parallel_for(m, opts.threads, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i, StreamPurpose::PureSamples);
        c0.col(static_cast<Index>(i)) = frame.coefficients(sample_mu_s(sc.iph().selected(), rng));
    });
    const DensityMatrix w0 = sc.initial_density();
    const ComplexMatrix x0 = frame.coefficients(w0);

    std::vector<double> times(static_cast<std::size_t>(n_times));
    for (int i = 0; i < n_times; ++i) times[static_cast<std::size_t>(i)] = cfg.dynamics.t_end * i / (n_times - 1);

    // pure_w[i](t, cell)
    std::vector<Eigen::MatrixXd> pure_w(m, Eigen::MatrixXd(n_times, static_cast<Index>(n_cells)));
    Eigen::MatrixXd norms(static_cast<Index>(m), n_times);
    Eigen::MatrixXd w_iph(n_times, static_cast<Index>(n_cells));
    RealVector purity_w(n_times), trace_w(n_times);
    parallel_for(static_cast<std::size_t>(n_times), opts.threads, [&](std::size_t ti) {
        const double t = times[ti];
        const Index row = static_cast<Index>(ti);
        const ComplexMatrix ct = frame.phases(t).asDiagonal() * c0;
        const ComplexMatrix amp = stacked.adjoint() * ct;
        for (std::size_t i = 0; i < m; ++i) {
            const Index col = static_cast<Index>(i);
            for (std::size_t c = 0; c < n_cells; ++c)
                pure_w[i](row, static_cast<Index>(c)) =
                    amp.col(col).segment(offset[c], offset[c + 1] - offset[c]).squaredNorm();
            norms(col, row) = ct.col(col).squaredNorm();
        }
        const ComplexMatrix xt = frame.evolve(x0, t);
        for (std::size_t c = 0; c < n_cells; ++c)
            w_iph(row, static_cast<Index>(c)) = proj[c].cwiseProduct(xt).sum().real();
        purity_w[row] = xt.squaredNorm();
        trace_w[row] = xt.trace().real();
    });

    const EquilibriumInfo eq = equilibrium_cell(dec);
    const Index eq_col = static_cast<Index>(dec.position_of(eq.label));
    double max_row_error = 0.0;
    std::optional<OutputSink> sink = open_sink(cfg, opts);
    const auto header = trace_header(dec);

    std::size_t reached_final = 0, reached_any = 0;
    json per_sample = json::array();
    for (std::size_t i = 0; i < m; ++i) {
        CsvTable table(header);
        for (int ti = 0; ti < n_times; ++ti) {
            std::vector<double> w(n_cells);
            for (std::size_t c = 0; c < n_cells; ++c) w[c] = pure_w[i](ti, static_cast<Index>(c));
            const double nrm = norms(static_cast<Index>(i), ti);
            table.add_row(trace_row(times[static_cast<std::size_t>(ti)], w, nrm * nrm, dec, cfg, max_row_error));
        }
        const double final_eq = pure_w[i](n_times - 1, eq_col);
        const double max_eq = pure_w[i].col(eq_col).maxCoeff();
        reached_final += final_eq >= 0.5 ? 1 : 0;
        reached_any += max_eq >= 0.5 ? 1 : 0;
        per_sample.push_back({{"final_eq_weight", final_eq}, {"max_eq_weight", max_eq}});
        if (sink) sink->write("entropy_psi_" + padded(i, m) + ".csv", table);
    }

    CsvTable w_table(header);
    for (int ti = 0; ti < n_times; ++ti) {
        std::vector<double> w(n_cells);
        for (std::size_t c = 0; c < n_cells; ++c) w[c] = w_iph(ti, static_cast<Index>(c));
        w_table.add_row(trace_row(times[static_cast<std::size_t>(ti)], w, purity_w[ti], dec, cfg, max_row_error));
    }
    if (sink) sink->write("entropy_w_iph.csv", w_table);

    // The mixture of the sampled states has a time-independent purity.
    const ComplexMatrix mix = c0 * c0.adjoint() / static_cast<double>(m);
    const double mix_purity = mix.squaredNorm();
    CsvTable mean_table(header);
    double max_dev = 0.0;
    for (int ti = 0; ti < n_times; ++ti) {
        std::vector<double> w(n_cells, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < n_cells; ++c) w[c] += pure_w[i](ti, static_cast<Index>(c)) / static_cast<double>(m);
        for (std::size_t c = 0; c < n_cells; ++c)
            max_dev = std::max(max_dev, std::abs(w[c] - w_iph(ti, static_cast<Index>(c))));
        mean_table.add_row(trace_row(times[static_cast<std::size_t>(ti)], w, mix_purity, dec, cfg, max_row_error));
    }
    if (sink) sink->write("entropy_ensemble_mean.csv", mean_table);

    const DensityReport final_report = DensityMatrix::from_trusted(frame.evolve(x0, cfg.dynamics.t_end)).report();
    double max_norm_drift = 0.0;
    for (Index i = 0; i < norms.rows(); ++i)
        for (Index t = 0; t < norms.cols(); ++t) max_norm_drift = std::max(max_norm_drift, std::abs(norms(i, t) - 1.0));
    double max_trace_drift = 0.0, max_purity_drift = 0.0;
    for (Index t = 0; t < n_times; ++t) {
        max_trace_drift = std::max(max_trace_drift, std::abs(trace_w[t] - 1.0));
        max_purity_drift = std::max(max_purity_drift, std::abs(purity_w[t] - purity_w[0]));
    }

    rec.incidents = {{"psd_clamps", final_report.min_eigenvalue < -numeric_policy().algebraic_tol ? 1 : 0},
                     {"equilibrium_ties", eq.tie ? 1 : 0}};
    rec.diagnostics = {{"max_norm_drift", max_norm_drift},
                       {"max_trace_drift", max_trace_drift},
                       {"max_purity_drift", max_purity_drift},
                       {"max_row_sum_error", max_row_error},
                       {"min_eigenvalue_t_end", final_report.min_eigenvalue}};
    const double tol = 3.0 / std::sqrt(static_cast<double>(m)) + 1e-6;
    rec.results = {{"shell_dim", frame.size()},
                   {"ensemble_size", m},
                   {"equilibrium_label", eq.label},
                   {"equilibrium_ratio", eq.ratio},
                   {"initial_dim", sc.iph().selected().dim()},
                   {"initial_entropy", cfg.k_b * std::log(static_cast<double>(sc.iph().selected().dim()))},
                   {"fraction_eq_weight_half_at_t_end", static_cast<double>(reached_final) / m},
                   {"fraction_eq_weight_half_by_t_end", static_cast<double>(reached_any) / m},
                   {"max_mean_deviation", max_dev},
                   {"mean_deviation_tolerance", tol},
                   {"samples", per_sample}};
    finish_record(rec, sink);
    return rec;
}

RunRecord run_equivalence_experiment(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.iph.mode != IPHMode::Strong) config_error("iph.mode", "the equivalence experiment needs strong IPH");
    const std::size_t m = cfg.ensemble_size;
    if (m < 16) config_error("ensemble.size", "must be at least 16");
    RunRecord rec = begin_record("equivalence", cfg);
    const Scenario sc(cfg);
    const Subspace& s = sc.iph().selected();
    const Index d = s.dim();

    // Coordinates in the subspace basis; the basis is an isometry, so the
    // Frobenius distance is the same as in the ambient space.
    ComplexMatrix coeff(d, static_cast<Index>(m));
    parallel_for(m, opts.threads, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i, StreamPurpose::PureSamples);
        coeff.col(static_cast<Index>(i)) = s.basis().adjoint() * sample_mu_s(s, rng).amplitudes();
    });
    const std::vector<std::size_t> sizes{m / 16, m / 4, m};
    std::vector<double> ms, dist;
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    const ComplexMatrix target = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    std::size_t next = 0;
    for (std::size_t i = 0; i < m && next < sizes.size(); ++i) {
        sum.selfadjointView<Eigen::Lower>().rankUpdate(coeff.col(static_cast<Index>(i)));
        while (next < sizes.size() && i + 1 == sizes[next]) {
            ComplexMatrix full = sum.selfadjointView<Eigen::Lower>();
            full /= static_cast<double>(i + 1);
            ms.push_back(static_cast<double>(i + 1));
            dist.push_back((full - target).norm());
            ++next;
        }
    }
    const auto slope = log_log_slope(ms, dist);

    std::optional<OutputSink> sink = open_sink(cfg, opts);
    CsvTable table({"M", "frobenius_distance"});
    for (std::size_t i = 0; i < ms.size(); ++i)
        table.add_row({std::to_string(static_cast<std::size_t>(ms[i])), format_double(dist[i])});
    rec.results = {{"subspace_dim", d},
                   {"sizes", ms},
                   {"distances", dist},
                   {"slope", slope ? json(*slope) : json(nullptr)},
                   {"reference_slope", -0.5}};
    rec.incidents = json::object();
    rec.diagnostics = json::object();
    if (sink) {
        sink->write("equivalence.csv", table);
        sink->write("equivalence.json", rec.results);
    }
    finish_record(rec, sink);
    return rec;
}

// ---------------------------------------------------------------------------

namespace {

struct FirstFlash {
    bool present = false;
    CollapseEvent event;
    double trace_error = 0.0;
};

std::vector<double> center_histogram(const std::vector<FirstFlash>& runs, const GridModel& g, int n_bins) {
    std::vector<double> h(static_cast<std::size_t>(n_bins), 0.0);
    for (const auto& r : runs) {
        if (!r.present) continue;
        const int b = std::clamp(static_cast<int>(std::floor(r.event.center / g.box_length * n_bins)), 0, n_bins - 1);
        h[static_cast<std::size_t>(b)] += 1.0;
    }
    return h;
}

// Distribution of the first flash center conditioned on a flash before
// t_end: exponential waiting time with rate N lambda, state evolved exactly
// up to the flash time. The time integral is done in the eigenbasis.
std::vector<double> first_flash_theory(const SpectralPropagator& p, const DensityMatrix& w0,
                                       const CollapseKernel& kernel, const GRWParams& params, double t_end,
                                       int n_bins) {
    const GridModel& g = kernel.grid();
    const double a = params.total_rate();
    const ComplexMatrix& v = p.spectrum().eigenvectors;
    const RealVector& e = p.spectrum().eigenvalues;
    ComplexMatrix wt = v.adjoint() * w0.matrix() * v;
    const double norm = -std::expm1(-a * t_end);
    for (Index k = 0; k < wt.rows(); ++k)
        for (Index l = 0; l < wt.cols(); ++l) {
            const cplx z(a, (e[k] - e[l]) / p.hbar());
            wt(k, l) *= a * (1.0 - std::exp(-z * t_end)) / (z * norm);
        }
    const RealVector pops = ((v * wt).cwiseProduct(v.conjugate())).rowwise().sum().real();
    RealVector centers = RealVector::Zero(g.grid_points);
    for (int k = 1; k <= g.n_particles; ++k) centers += kernel.center_probabilities(pops, k) / g.n_particles;
    std::vector<double> h(static_cast<std::size_t>(n_bins), 0.0);
    for (int j = 0; j < g.grid_points; ++j) {
        const int b = std::clamp(static_cast<int>(std::floor(g.position(j) / g.box_length * n_bins)), 0, n_bins - 1);
        h[static_cast<std::size_t>(b)] += centers[j];
    }
    return h;
}

CsvTable flash_table(const std::vector<FirstFlash>& runs) {
    CsvTable t({"run_id", "T", "k", "X"});
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].present)
            t.add_row({std::to_string(i), format_double(runs[i].event.time), std::to_string(runs[i].event.particle),
                       format_double(runs[i].event.center)});
    return t;
}

}  // namespace

RunRecord run_grw_equivalence(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.model.kind != ModelConfig::Kind::Grid) config_error("model.type", "GRW needs a grid model");
    require_kind(cfg, DynamicsConfig::Kind::GRW, "grw dynamics");
    RunRecord rec = begin_record("grw", cfg);
    const Scenario sc(cfg);
    const GridModel& g = sc.grid();
    const SpectralPropagator& p = sc.propagator();
    GRWParams params{cfg.dynamics.lambda, cfg.dynamics.sigma, g.n_particles};
    params.validate();
    const CollapseKernel kernel(g, params.sigma);
    const DensityMatrix w0 = sc.initial_density();
    const FactoredDensity w0_factored(w0);
    const Subspace& s = sc.iph().selected();
    const double t_end = cfg.dynamics.t_end;
    const std::size_t runs = cfg.ensemble_size;
    const MacroDecomposition& dec = sc.decomposition();
    constexpr std::size_t kWeightChecks = 64;

    std::vector<FirstFlash> w_runs(runs), psi_runs(runs);
    std::vector<double> row_error(runs, 0.0);
    parallel_for(runs, opts.threads, [&](std::size_t i) {
        {
            RandomStream rng(cfg.seed, i, StreamPurpose::CollapseW);
            const auto sched = sample_collapse_schedule(params, t_end, rng);
            if (!sched.empty()) {
                const DensityMatrix wt = w0_factored.evolve(p, sched.front().time);
                const WCollapse c = w_grw_collapse(wt, sched.front().particle, kernel, rng, sched.front().time);
                w_runs[i] = {true, c.event, std::abs(c.state.trace() - 1.0)};
                if (i < kWeightChecks) {
                    const auto w = macro_weights(c.state, dec);
                    row_error[i] = std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0);
                }
            }
        }
        {
            RandomStream sample_rng(cfg.seed, i, StreamPurpose::PureSamples);
            const WaveFunction psi0 = sample_mu_s(s, sample_rng);
            RandomStream rng(cfg.seed, i, StreamPurpose::CollapsePsi);
            const auto sched = sample_collapse_schedule(params, t_end, rng);
            if (!sched.empty()) {
                const WaveFunction psit = evolve_wavefunction(p, psi0, sched.front().time);
                const PsiCollapse c = psi_grw_collapse(psit, sched.front().particle, kernel, rng, sched.front().time);
                psi_runs[i] = {true, c.event, std::abs(c.state.amplitudes().squaredNorm() - 1.0)};
            }
        }
    });

    const int n_bins = cfg.dynamics.n_bins;
    const auto hw = center_histogram(w_runs, g, n_bins);
    const auto hpsi = center_histogram(psi_runs, g, n_bins);
    const double nw = std::accumulate(hw.begin(), hw.end(), 0.0);
    const double npsi = std::accumulate(hpsi.begin(), hpsi.end(), 0.0);
    std::optional<std::vector<double>> theory;
    if (params.total_rate() > 0.0) theory = first_flash_theory(p, w0, kernel, params, t_end, n_bins);

    std::optional<OutputSink> sink = open_sink(cfg, opts);
    CsvTable hist({"bin", "x_lo", "x_hi", "p_w", "p_psi", "rho_theory"});
    for (int b = 0; b < n_bins; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        hist.add_row({std::to_string(b), format_double(g.box_length * b / n_bins),
                      format_double(g.box_length * (b + 1) / n_bins), format_double(nw > 0 ? hw[ub] / nw : 0.0),
                      format_double(npsi > 0 ? hpsi[ub] / npsi : 0.0),
                      theory ? format_double((*theory)[ub]) : std::string()});
    }
    if (sink) {
        sink->write("flashes_w.csv", flash_table(w_runs));
        sink->write("flashes_psi.csv", flash_table(psi_runs));
        sink->write("grw_first_flash_histogram.csv", hist);
    }

    double max_trace = 0.0, max_norm = 0.0;
    for (std::size_t i = 0; i < runs; ++i) {
        max_trace = std::max(max_trace, w_runs[i].trace_error);
        max_norm = std::max(max_norm, psi_runs[i].trace_error);
    }
    const auto nonempty = [](double n) { return n > 0.0; };
    json tv = nullptr, tv_w_theory = nullptr, tv_psi_theory = nullptr;
    if (nonempty(nw) && nonempty(npsi)) tv = total_variation(hw, hpsi);
    if (theory && nonempty(nw)) tv_w_theory = total_variation(hw, *theory);
    if (theory && nonempty(npsi)) tv_psi_theory = total_variation(hpsi, *theory);
    rec.incidents = {{"dropped_runs_w", runs - static_cast<std::size_t>(nw)},
                     {"dropped_runs_psi", runs - static_cast<std::size_t>(npsi)}};
    rec.diagnostics = {{"max_trace_drift", max_trace},
                       {"max_norm_drift", max_norm},
                       {"max_row_sum_error", *std::max_element(row_error.begin(), row_error.end())}};
    rec.results = {{"runs", runs},
                   {"subspace_dim", s.dim()},
                   {"n_bins", n_bins},
                   {"tv_w_psi", tv},
                   {"tv_w_theory", tv_w_theory},
                   {"tv_psi_theory", tv_psi_theory}};
    finish_record(rec, sink);
    return rec;
}

// ---------------------------------------------------------------------------

RunRecord run_bohm_experiment(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.model.kind != ModelConfig::Kind::Grid) config_error("model.type", "Bohmian runs need a grid model");
    require_kind(cfg, DynamicsConfig::Kind::Bohm, "bohm dynamics");
    RunRecord rec = begin_record("bohm", cfg);
    const Scenario sc(cfg);
    const GridModel& g = sc.grid();
    const SpectralPropagator& p = sc.propagator();
    const DynamicsConfig& dyn = cfg.dynamics;
    const int steps = static_cast<int>(std::lround(dyn.t_end / dyn.dt));
    if (steps < 1 || std::abs(steps * dyn.dt - dyn.t_end) > 1e-9 * dyn.t_end)
        config_error("dynamics.dt", "must divide t_end");

    const WaveFunction psi0 = sc.reference_state();
    const DensityMatrix w0 = sc.initial_density();
    const PsiGuidance gpsi(p, g, psi0);
    const WGuidance gw(p, g, w0);
    const auto n = static_cast<std::size_t>(dyn.trajectories);
    std::vector<Configuration> q_psi(n), q_w(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream r1(cfg.seed, i, StreamPurpose::BohmPsi);
        q_psi[i] = sample_initial_configuration(g, psi0, r1);
        RandomStream r2(cfg.seed, i, StreamPurpose::BohmW);
        q_w[i] = sample_initial_configuration(g, w0, r2);
    }
    const EnsembleRun run_psi = integrate_ensemble(gpsi, q_psi, dyn.dt, steps, dyn.record_every, opts.threads);
    const EnsembleRun run_w = integrate_ensemble(gw, q_w, dyn.dt, steps, dyn.record_every, opts.threads);

    const double purity0 = purity(w0);
    double max_norm = 0.0, max_trace = 0.0, max_purity = 0.0;
    std::vector<double> l1_psi, l1_w;
    CsvTable eq({"t", "l1_psi", "l1_w"});
    for (std::size_t ti = 0; ti < run_psi.times.size(); ++ti) {
        const double t = run_psi.times[ti];
        const RealVector pop_psi = gpsi.populations_at(t);
        const DensityMatrix wt = gw.state_at(t);
        const RealVector pop_w = wt.matrix().diagonal().real();
        max_norm = std::max(max_norm, std::abs(pop_psi.sum() - 1.0));
        max_trace = std::max(max_trace, std::abs(pop_w.sum() - 1.0));
        max_purity = std::max(max_purity, std::abs(purity(wt) - purity0));
        l1_psi.push_back(equivariance_distance(g, run_psi.snapshots[ti], pop_psi, dyn.n_bins));
        l1_w.push_back(equivariance_distance(g, run_w.snapshots[ti], pop_w, dyn.n_bins));
        eq.add_row({format_double(t), format_double(l1_psi.back()), format_double(l1_w.back())});
    }
    const DensityReport final_report = gw.state_at(dyn.t_end).report();

    std::optional<OutputSink> sink = open_sink(cfg, opts);
    if (sink) {
        auto traj_table = [&](const EnsembleRun& run) {
            std::vector<std::string> header{"run_id", "t", "q1"};
            if (g.n_particles == 2) header.push_back("q2");
            CsvTable t(header);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t ti = 0; ti < run.times.size(); ++ti) {
                    std::vector<std::string> row{std::to_string(i), format_double(run.times[ti])};
                    for (double q : run.snapshots[ti][i].positions) row.push_back(format_double(q));
                    t.add_row(std::move(row));
                }
            return t;
        };
        sink->write("trajectories_psi.csv", traj_table(run_psi));
        sink->write("trajectories_w.csv", traj_table(run_w));
        sink->write("equivariance.csv", eq);
    }

    rec.incidents = {{"psi", incidents_json(run_psi.incidents)},
                     {"w", incidents_json(run_w.incidents)},
                     {"psd_clamps", final_report.min_eigenvalue < -numeric_policy().algebraic_tol ? 1 : 0}};
    rec.diagnostics = {{"max_norm_drift", max_norm},
                       {"max_trace_drift", max_trace},
                       {"max_purity_drift", max_purity},
                       {"min_eigenvalue_t_end", final_report.min_eigenvalue}};
    rec.results = {{"trajectories", n},
                   {"steps", steps},
                   {"n_bins", dyn.n_bins},
                   {"times", run_psi.times},
                   {"l1_psi", l1_psi},
                   {"l1_w", l1_w},
                   {"w_rank", FactoredDensity(w0).rank()}};
    finish_record(rec, sink);
    return rec;
}

json decompose_summary(const ScenarioConfig& cfg) {
    const Scenario sc(cfg);
    const MacroDecomposition& dec = sc.decomposition();
    const EquilibriumInfo eq = equilibrium_cell(dec);
    json dims = json::array();
    for (const auto& s : sc.iph().subspaces) dims.push_back(s.dim());
    return json{{"config_hash", config_hash(cfg)},
                {"ambient_dim", sc.propagator().dim()},
                {"shell_dim", dec.shell().dim()},
                {"macrostructure", decomposition_summary(dec, cfg.k_b)},
                {"equilibrium", {{"label", eq.label}, {"ratio", eq.ratio}, {"tie", eq.tie}}},
                {"iph",
                 {{"mode", sc.iph().mode == IPHMode::Strong ? "strong" : "weak"},
                  {"subspace_dims", dims},
                  {"selected_index", sc.iph().selected_index},
                  {"fuzzy", sc.iph().fuzzy}}}};
}

}  // namespace qsm
