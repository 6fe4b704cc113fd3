// Copyright 2026 The qmlsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmlsim/hamiltonian.h"
#include "qmlsim/statevec.h"

namespace qmlsim {

struct Spectrum {
    std::string method;                // "dense" or "lanczos"
    std::vector<double> eigenvalues;   // ascending
    std::vector<double> residuals;     // ||H v - lambda v|| per eigenvalue
    std::vector<bool> converged;
    std::optional<Matrix> eigenvectors;  // columns, dense solver only
    std::uint64_t seed = 0;            // Lanczos start-vector seed
    int iterations = 0;
};

/// All eigenvalues of a dense Hermitian matrix (Householder tridiagonalization
/// followed by implicit QR). Throws ResourceError when the matrix is larger
/// than 2^dense_cap.
Spectrum full_spectrum(const Matrix &hamiltonian, bool want_vectors, int dense_cap = kDenseCapQubits);

/// y = H x for a Hermitian operator of dimension x.size().
using LinearOperator = std::function<void(std::span<const Complex> x, std::span<Complex> y)>;

struct LanczosOptions {
    int k = 4;
    int max_iter = 300;
    double tol = 1e-8;
    std::uint64_t seed = 0x5eed;
};

/// The k smallest and k largest eigenvalues (returned together, ascending) of
/// a matrix-free Hermitian operator. The Krylov basis is fully
/// reorthogonalized; an exhausted Krylov space is restarted with a fresh random
/// vector so repeated eigenvalues show up with their multiplicity. Pairs whose
/// true residual stays above `tol` are flagged unconverged rather than thrown.
Spectrum lanczos_margins(const LinearOperator &apply, std::size_t dim, const LanczosOptions &options);

/// Matrix-free operator of a coupling model, sum of its Pauli terms.
LinearOperator model_operator(const PauliCouplingModel &model);

}  // namespace qmlsim
