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

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmlsim/gates.h"
#include "qmlsim/statevec.h"

namespace qmlsim {

/// Largest model turned into a dense 2^n x 2^n matrix (4096^2 complex = 256 MiB).
inline constexpr int kDenseCapQubits = 12;

/// Pairwise Pauli coupling Hamiltonian
///
///     H = sum_{i<j} J_ij (sigma^(i))^T E2_ij sigma^(j) + sum_i E1_i . sigma^(i)
///
/// with sigma = (sigma_x, sigma_y, sigma_z) and hbar = 1. Qubits are 1-based.
struct PauliCouplingModel {
    int n_qubits = 0;
    Eigen::MatrixXd coupling;                                  // J, symmetric, zero diagonal
    std::map<std::pair<int, int>, Eigen::Matrix3d> pair_terms;  // E2_ij keyed with i < j
    std::vector<Eigen::Vector3d> fields;                        // E1_i at index i-1

    static PauliCouplingModel zeros(int n_qubits);

    /// Stores J_ij = J_ji = jij and E2. A pair given as (j, i) is stored as
    /// (i, j) with E2 transposed, so both orientations describe the same term.
    void set_coupling(int i, int j, double jij, const Eigen::Matrix3d &e2);
    void set_field(int i, const Eigen::Vector3d &e1);

    /// Throws InputError on asymmetric J, nonzero diagonal, non-finite entries
    /// or out-of-range qubits.
    void validate() const;

    friend bool operator==(const PauliCouplingModel &a, const PauliCouplingModel &b);
};

/// Transverse-field Ising chain: E0 sigma_z sigma_z on neighbours, field B along x.
PauliCouplingModel ising_chain(int n_qubits, double e0, double b);

/// One Hermitian 1- or 2-qubit term of a model, placed on state qubits.
struct PauliTerm {
    std::vector<QubitIndex> qubits;  // ascending
    Matrix local;                    // 2x2 or 4x4, qubits[0] most significant
};

/// Nonzero terms in the canonical splitting order: single-qubit fields by
/// qubit, then pairs by (i, j). Model qubit i is placed on placement[i-1]
/// (identity placement when empty).
std::vector<PauliTerm> model_terms(const PauliCouplingModel &model, std::span<const QubitIndex> placement = {});

/// Embeds `op` (acting on `op_qubits`) into the space of `space_qubits`, which
/// must contain every operand. space_qubits[0] is the most significant bit.
Matrix embed_operator(const Matrix &op, std::span<const QubitIndex> op_qubits,
                      std::span<const QubitIndex> space_qubits);

/// Dense Hermitian matrix of the model. Throws ResourceError above `dense_cap`.
Matrix build_dense(const PauliCouplingModel &model, int dense_cap = kDenseCapQubits);

/// exp(-i t H) via H = V diag(lambda) V^dagger.
Matrix exact_propagator(const Matrix &hamiltonian, double t);

/// state <- exp(-i t H) state. H must span the whole state.
void exact_evolve(const Matrix &hamiltonian, double t, StateVector &state);

/// out = sum_k term_k |in>, evaluated without forming the dense matrix.
void apply_terms(std::span<const PauliTerm> terms, const StateVector &in, StateVector &out);

struct TrotterPlan {
    int order = 2;  // 1, 2 or 4
    double t = 0.0;
    int slices = 1;
    std::vector<PauliTerm> terms;
};

struct TrotterReport {
    std::size_t factors_per_slice = 0;
    std::vector<std::string> warnings;
};

/// One unitary factor of a product formula, in application order.
struct TrotterFactor {
    std::vector<QubitIndex> qubits;
    Matrix unitary;
};

/// Factors of one slice exp(-i (t/n) H) for the given order, applied front to
/// back. The term list is split recursively into head H0 and rest H1:
///   order 1: e^{-i tau H0} e^{-i tau H1}
///   order 2: e^{-i tau H0/2} e^{-i tau H1} e^{-i tau H0/2}
///   order 4: e^{-i tau H0/2} e^{-i tau H1/2} e^{i tau^3 C} e^{-i tau H1/2} e^{-i tau H0/2},
///            C = [H0 + 2 H1, [H0, H1]] / 24,
/// with each e^{-i s H1} expanded by the same rule. C is formed densely on
/// the joint support of H0 and H1 when that support has at most 4 qubits;
/// otherwise the level drops C and a warning is recorded.
std::vector<TrotterFactor> trotter_slice(const TrotterPlan &plan, std::vector<std::string> *warnings = nullptr);

TrotterReport trotter_evolve(const TrotterPlan &plan, StateVector &state);

struct ExpReport {
    std::string route;  // "exact" or "trotter-<order>"
    std::vector<std::string> warnings;
};

/// EXP gate: exact evolution when `params.order` is exact and the model fits
/// under `dense_cap`, otherwise a product formula (exact requests above the
/// cap fall back to order 2).
ExpReport exp_gate_execute(StateVector &state, const PauliCouplingModel &model, std::span<const QubitIndex> placement,
                           const ExpParams &params, int dense_cap = kDenseCapQubits);

/// Largest dense operator dimension allocated by this module since the last
/// reset. Lets callers confirm which route a computation took.
std::size_t dense_dimension_high_water();
void reset_dense_dimension_high_water();

}  // namespace qmlsim
