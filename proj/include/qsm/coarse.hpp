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

#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "qsm/hilbert.hpp"
#include "qsm/models.hpp"
#include "qsm/state.hpp"

namespace qsm {

/// Closeness threshold for "the state lies almost entirely in a cell".
struct ClosenessPolicy {
    double epsilon = 0.99;
    void validate() const;
};

struct MacroCell {
    int label = 0;          // index of the macro-variable bin
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    Subspace space;

    Index dim() const { return space.dim(); }
};

/// Orthogonal decomposition of an energy shell into macro-spaces.
class MacroDecomposition {
public:
    MacroDecomposition(Subspace shell, std::vector<MacroCell> cells, std::vector<int> dropped);

    const Subspace& shell() const noexcept { return shell_; }
    const std::vector<MacroCell>& cells() const noexcept { return cells_; }
    /// Labels of bins whose intersection with the shell was empty.
    const std::vector<int>& dropped_labels() const noexcept { return dropped_; }
    std::size_t size() const noexcept { return cells_.size(); }

    bool has_label(int label) const;
    std::size_t position_of(int label) const;  // IndexOutOfRange if absent
    const MacroCell& cell(int label) const { return cells_[position_of(label)]; }

private:
    Subspace shell_;
    std::vector<MacroCell> cells_;
    std::vector<int> dropped_;
};

/// Intersects the shell with each bin eigenspace of a diagonal macro-variable.
/// Throws DecompositionIncompatible when the variable does not commute with
/// the shell projector.
MacroDecomposition decompose(const Subspace& shell, const MacroVariable& mv);

double macro_weight(const WaveFunction& psi, const MacroCell& cell);
double macro_weight(const DensityMatrix& w, const MacroCell& cell);
std::vector<double> macro_weights(const WaveFunction& psi, const MacroDecomposition& dec);
std::vector<double> macro_weights(const DensityMatrix& w, const MacroDecomposition& dec);

/// Label of the unique cell carrying weight >= epsilon, if any.
std::optional<int> effective_macrostate(std::span<const double> weights,
                                        const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy);
std::optional<int> effective_macrostate(const WaveFunction& psi, const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy);
std::optional<int> effective_macrostate(const DensityMatrix& w, const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy);

/// k_B log dim, natural log.
double boltzmann_entropy(const MacroCell& cell, double k_b = 1.0);

/// Entropy of the effective macrostate; empty when there is none.
std::optional<double> effective_entropy(std::span<const double> weights,
                                        const MacroDecomposition& dec,
                                        const ClosenessPolicy& policy, double k_b = 1.0);

struct EquilibriumInfo {
    int label = 0;
    double ratio = 0.0;  // dim H_eq / D
    bool tie = false;
};

/// Largest cell; ties resolve to the lowest label and set `tie`.
EquilibriumInfo equilibrium_cell(const MacroDecomposition& dec);

nlohmann::json decomposition_summary(const MacroDecomposition& dec, double k_b = 1.0);

}  // namespace qsm
