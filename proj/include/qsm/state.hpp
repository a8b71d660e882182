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

#include "qsm/hilbert.hpp"

namespace qsm {

/// Unit-norm state vector. The norm is checked to 1e-10 on construction.
class WaveFunction {
public:
    explicit WaveFunction(ComplexVector amplitudes);

    /// Rescales to unit norm; throws InvalidArgument on a zero or
    /// non-finite vector.
    static WaveFunction normalized(ComplexVector v);

    const ComplexVector& amplitudes() const noexcept { return amps_; }
    Index dim() const noexcept { return amps_.size(); }
    ComplexMatrix outer() const { return amps_ * amps_.adjoint(); }

private:
    ComplexVector amps_;
};

/// Global phase is not physical: |<a|b>| >= 1 - tol.
bool same_ray(const WaveFunction& a, const WaveFunction& b, double tol = 1e-10);

struct DensityReport {
    double hermiticity = 0.0;  // ||W - W^H||_F
    double trace_error = 0.0;  // |tr W - 1|
    double min_eigenvalue = 0.0;
};

/// Hermitian, positive semidefinite, trace-one operator.
class DensityMatrix {
public:
    /// Full validation including the eigenvalue check (O(d^3)).
    static DensityMatrix from_matrix(ComplexMatrix m);
    /// For results of invariant-preserving maps (projector averages, unitary
    /// conjugation, collapse updates): checks hermiticity and trace only.
    static DensityMatrix from_trusted(ComplexMatrix m);
    static DensityMatrix pure(const WaveFunction& psi);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    double trace() const { return m_.trace().real(); }

    DensityReport report() const;

private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

}  // namespace qsm
