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

#include <cmath>
#include <functional>

#include "doctest.h"
#include "qsm/error.hpp"
#include "qsm/hilbert.hpp"
#include "qsm/rng.hpp"

namespace qsm::testing {

inline ComplexVector random_vector(Index n, RandomStream& rng) {
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
    return v;
}

inline ComplexMatrix random_matrix(Index r, Index c, RandomStream& rng) {
    ComplexMatrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = cplx(rng.normal(), rng.normal());
    return m;
}

/// GUE-like: (A + A^H) / 2 with i.i.d. complex normal entries.
inline HermitianOperator random_hermitian(Index d, RandomStream& rng) {
    const ComplexMatrix a = random_matrix(d, d, rng);
    return HermitianOperator(0.5 * (a + a.adjoint()));
}

inline bool throws_code(const std::function<void()>& fn, ErrorCode code) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

}  // namespace qsm::testing

#define CHECK_THROWS_CODE(expr, code) CHECK(::qsm::testing::throws_code([&] { (void)(expr); }, code))
