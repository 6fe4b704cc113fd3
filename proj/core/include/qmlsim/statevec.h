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

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qmlsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr int kMaxQubits = 31;
inline constexpr double kUnitarityTolerance = 1e-10;

/// 1-based qubit position. Qubit 1 is the most significant bit of a basis
/// index, so basis index b reads as the bitstring b_1 b_2 ... b_N.
struct QubitIndex {
    int value = 0;

    friend constexpr auto operator<=>(const QubitIndex &, const QubitIndex &) = default;
};

std::vector<QubitIndex> qubits(std::initializer_list<int> values);
std::vector<QubitIndex> qubits(std::span<const int> values);

/// Bytes needed for a dense state of `n_qubits` (16 bytes per amplitude).
std::uint64_t state_bytes(int n_qubits);

/// Memory cap for state allocations: $QMLSIM_MEMORY_CAP (bytes) if set,
/// otherwise 4 GiB.
std::uint64_t default_memory_cap();

/// Worker count used by the amplitude kernels. Results never depend on it.
void set_worker_count(int workers);
int worker_count();

class StateVector {
   public:
    /// |index> on `n_qubits` qubits. Throws ResourceError when the state would
    /// not fit under `memory_cap`, InputError on a bad index.
    static StateVector basis(int n_qubits, std::uint64_t index, std::uint64_t memory_cap = default_memory_cap());

    /// Wraps explicit amplitudes; length must be a power of two >= 2.
    /// No normalization is applied.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    int num_qubits() const noexcept {
        return n_qubits_;
    }
    std::size_t dim() const noexcept {
        return amplitudes_.size();
    }

    std::span<const Complex> amplitudes() const noexcept {
        return amplitudes_;
    }
    std::span<Complex> amplitudes() noexcept {
        return amplitudes_;
    }

    const Complex &operator[](std::size_t i) const {
        return amplitudes_[i];
    }
    Complex &operator[](std::size_t i) {
        return amplitudes_[i];
    }

    double norm_squared() const;

    /// Bit position (0 = least significant) of a qubit in a basis index.
    int bit_of(QubitIndex q) const noexcept {
        return n_qubits_ - q.value;
    }

   private:
    StateVector(int n_qubits, std::vector<Complex> amplitudes);

    int n_qubits_ = 0;
    std::vector<Complex> amplitudes_;
};

/// Throws InputError unless every target lies in 1..n and no target repeats.
void check_targets(int n_qubits, std::span<const QubitIndex> targets);

bool is_unitary(const Matrix &u, double tolerance = kUnitarityTolerance);

/// Applies the 2^k x 2^k unitary `u` to the listed targets. targets[0] is the
/// most significant bit of the matrix row/column index. Rejects non-unitary
/// matrices (entrywise tolerance 1e-10 on U^dagger U - I).
void apply_kqubit_op(StateVector &state, const Matrix &u, std::span<const QubitIndex> targets);

/// Same contract as apply_kqubit_op without the unitarity check. Used for
/// operators built internally and for Hermitian (non-unitary) terms.
void apply_matrix_unchecked(StateVector &state, const Matrix &m, std::span<const QubitIndex> targets);

/// sum_i conj(a_i) b_i.
Complex inner_product(const StateVector &a, const StateVector &b);

namespace detail {

/// Basis offsets for each local index of a k-qubit operator: entry j holds the
/// global bits set by local index j (targets[0] is the local MSB).
std::vector<std::uint64_t> local_offsets(int n_qubits, std::span<const QubitIndex> targets);

/// Spreads the bits of `compact` around the (ascending) `zero_positions`.
inline std::uint64_t insert_zero_bits(std::uint64_t compact, std::span<const int> zero_positions) {
    for (int p : zero_positions) {
        const std::uint64_t low = compact & ((std::uint64_t{1} << p) - 1);
        compact = ((compact >> p) << (p + 1)) | low;
    }
    return compact;
}

/// Ascending bit positions of the targets.
std::vector<int> sorted_positions(int n_qubits, std::span<const QubitIndex> targets);

/// Value of a register inside basis index `index`, register[0] as MSB.
std::uint64_t register_value(std::uint64_t index, int n_qubits, std::span<const QubitIndex> reg);

}  // namespace detail

}  // namespace qmlsim
