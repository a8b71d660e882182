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
#include "qsm/coarse.hpp"

#include <cmath>
#include <string>

#include "qsm/error.hpp"
#include "qsm/policy.hpp"

namespace qsm {

void ClosenessPolicy::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        fail(ErrorCode::InvalidArgument, "closeness epsilon must lie in (0, 1)");
}

MacroDecomposition::MacroDecomposition(Subspace shell, std::vector<MacroCell> cells,
                                       std::vector<int> dropped)
    : shell_(std::move(shell)), cells_(std::move(cells)), dropped_(std::move(dropped)) {
    if (cells_.empty()) fail(ErrorCode::InvalidArgument, "decomposition has no cells");
    Index total = 0;
    for (const auto& c : cells_) {
        if (c.space.ambient_dim() != shell_.ambient_dim())
            fail(ErrorCode::DimensionMismatch, "cell and shell ambient dimensions differ");
        total += c.dim();
    }
    if (total != shell_.dim())
        fail(ErrorCode::DecompositionIncompatible, "cell dimensions do not sum to the shell dimension");
}

bool MacroDecomposition::has_label(int label) const {
    for (const auto& c : cells_)
        if (c.label == label) return true;
    return false;
}

std::size_t MacroDecomposition::position_of(int label) const {
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i].label == label) return i;
    fail(ErrorCode::IndexOutOfRange, "no macro cell with label " + std::to_string(label));
}

namespace {

bool is_identity_basis(const Subspace& s) {
    if (s.dim() != s.ambient_dim()) return false;
    return (s.basis() - ComplexMatrix::Identity(s.dim(), s.dim())).norm() <=
           numeric_policy().algebraic_tol;
}

}  // namespace

MacroDecomposition decompose(const Subspace& shell, const MacroVariable& mv) {
    if (mv.op().dim() != shell.ambient_dim())
        fail(ErrorCode::DimensionMismatch, "macro-variable and shell differ in dimension");
    const RealVector values = mv.values();
    const ComplexMatrix& b = shell.basis();

    // For a diagonal D and projector P = B B^H, ||[D, P]||_F = sqrt(2) ||(1 - P) D B||_F.
    const ComplexMatrix db = values.cast<cplx>().asDiagonal() * b;
    const double comm = std::sqrt(2.0) * (db - b * (b.adjoint() * db)).norm();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (comm > numeric_policy().commute_tol * scale)
        fail(ErrorCode::DecompositionIncompatible,
             "macro-variable does not commute with the shell projector (" + std::to_string(comm) + ")");

    std::vector<int> bin(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i) bin[i] = mv.bin_of(values[i]);

    std::vector<MacroCell> cells;
    std::vector<int> dropped;
    const auto& edges = mv.bin_edges();
    const bool identity = is_identity_basis(shell);

    for (int label = 0; label < static_cast<int>(mv.n_bins()); ++label) {
        ComplexMatrix cell_basis;
        if (identity) {
            std::vector<Index> members;
            for (Index i = 0; i < values.size(); ++i)
                if (bin[i] == label) members.push_back(i);
            cell_basis = ComplexMatrix::Zero(b.rows(), static_cast<Index>(members.size()));
            for (std::size_t j = 0; j < members.size(); ++j) cell_basis(members[j], static_cast<Index>(j)) = 1.0;
        } else {
            RealVector chi(values.size());
            for (Index i = 0; i < values.size(); ++i) chi[i] = bin[i] == label ? 1.0 : 0.0;
            const ComplexMatrix m = b.adjoint() * chi.cast<cplx>().asDiagonal() * b;
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
            std::vector<Index> keep;
            for (Index k = 0; k < es.eigenvalues().size(); ++k) {
                const double lam = es.eigenvalues()[k];
                if (lam > 0.5) keep.push_back(k);
                if (std::min(std::abs(lam), std::abs(lam - 1.0)) > numeric_policy().commute_tol * 1e2)
                    fail(ErrorCode::DecompositionIncompatible,
                         "bin projector restricted to the shell is not a projector");
            }
            cell_basis.resize(b.rows(), static_cast<Index>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j)
                cell_basis.col(static_cast<Index>(j)) = b * es.eigenvectors().col(keep[j]);
        }
        if (cell_basis.cols() == 0) {
            dropped.push_back(label);
            continue;
        }
        cells.push_back(MacroCell{label, edges[label], edges[label + 1],
                                  Subspace::from_orthonormal(std::move(cell_basis))});
    }
    return MacroDecomposition(shell, std::move(cells), std::move(dropped));
}

double macro_weight(const WaveFunction& psi, const MacroCell& cell) {
    if (psi.dim() != cell.space.ambient_dim())
        fail(ErrorCode::DimensionMismatch, "state and cell differ in dimension");
    return (cell.space.basis().adjoint() * psi.amplitudes()).squaredNorm();
}

double macro_weight(const DensityMatrix& w, const MacroCell& cell) {
    if (w.dim() != cell.space.ambient_dim())
        fail(ErrorCode::DimensionMismatch, "state and cell differ in dimension");
    const ComplexMatrix& c = cell.space.basis();
    return (c.adjoint() * w.matrix() * c).trace().real();
}

std::vector<double> macro_weights(const WaveFunction& psi, const MacroDecomposition& dec) {
    std::vector<double> out;
    for (const auto& c : dec.cells()) out.push_back(macro_weight(psi, c));
    return out;
}

std::vector<double> macro_weights(const DensityMatrix& w, const MacroDecomposition& dec) {
    std::vector<double> out;
    for (const auto& c : dec.cells()) out.push_back(macro_weight(w, c));
    return out;
}

std::optional<int> effective_macrostate(std::span<const double> weights,
                                        const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy) {
    policy.validate();
    if (weights.size() != dec.size())
        fail(ErrorCode::DimensionMismatch, "one weight per cell required");
    std::optional<int> found;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] >= policy.epsilon) {
            if (found) return std::nullopt;
            found = dec.cells()[i].label;
        }
    }
    return found;
}

std::optional<int> effective_macrostate(const WaveFunction& psi, const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy) {
    const auto w = macro_weights(psi, dec);
    return effective_macrostate(w, dec, policy);
}

std::optional<int> effective_macrostate(const DensityMatrix& w, const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy) {
    const auto ws = macro_weights(w, dec);
    return effective_macrostate(ws, dec, policy);
}

double boltzmann_entropy(const MacroCell& cell, double k_b) {
    return k_b * std::log(static_cast<double>(cell.dim()));
}

std::optional<double> effective_entropy(std::span<const double> weights,
                                        const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy, double k_b) {
    const auto label = effective_macrostate(weights, dec, policy);
    if (!label) return std::nullopt;
    return boltzmann_entropy(dec.cell(*label), k_b);
}

EquilibriumInfo equilibrium_cell(const MacroDecomposition& dec) {
    EquilibriumInfo info;
    Index best = -1;
    for (const auto& c : dec.cells()) {
        if (c.dim() > best) {
            best = c.dim();
            info.label = c.label;
            info.tie = false;
        } else if (c.dim() == best) {
            info.tie = true;
        }
    }
    info.ratio = static_cast<double>(best) / static_cast<double>(dec.shell().dim());
    return info;
}

nlohmann::json decomposition_summary(const MacroDecomposition& dec, double k_b) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : dec.cells()) {
        cells.push_back({{"label", c.label},
                         {"bin", {c.bin_lo, c.bin_hi}},
                         {"dim", c.dim()},
                         {"entropy", boltzmann_entropy(c, k_b)}});
    }
    const auto eq = equilibrium_cell(dec);
    return {{"shell_dim", dec.shell().dim()},
            {"ambient_dim", dec.shell().ambient_dim()},
            {"cells", cells},
            {"dropped_labels", dec.dropped_labels()},
            {"equilibrium", {{"label", eq.label}, {"ratio", eq.ratio}, {"tie", eq.tie}}},
            {"entropy_units", "k_B (natural log)"},
            {"k_B", k_b}};
}

}  // namespace qsm
