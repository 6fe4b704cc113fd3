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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmlsim/statevec.h"

namespace qmlsim {

enum class GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Phase,
    RX,
    RY,
    RZ,
    CNOT,
    CZ,
    Swap,
    Toffoli,
    Fredkin,
    Custom1,
    Custom2,
    QFT,
    InvQFT,
    Oracle,
    GroverStep,
    Grover,
    Modulo,
    Exp,
    Measure,
};

/// Upper-case QML spelling ("H", "CNOT", "GROVERSTEP", ...). EXP and MEASURE
/// are spelled "EXP" and "MEASURE" although QML writes them as elements.
std::string_view kind_name(GateKind kind);
std::optional<GateKind> parse_kind(std::string_view name);

/// Fixed gates have a constant-size matrix (k <= 3 qubits).
bool is_fixed(GateKind kind);

/// Evolution order for an EXP node; 0 means exact (dense diagonalization).
inline constexpr int kExactOrder = 0;

struct ExpParams {
    std::string hamiltonian;
    double t = 0.0;
    int slices = 1;
    int order = 2;

    friend bool operator==(const ExpParams &, const ExpParams &) = default;
};

struct GateSpec {
    GateKind kind = GateKind::H;
    std::vector<QubitIndex> targets;
    std::vector<QubitIndex> controls;
    double theta = 0.0;
    Matrix matrix;  // CUSTOM1 / CUSTOM2 only
    std::vector<std::uint64_t> marked;
    int iterations = 1;
    std::uint64_t base = 0;     // MODULO a
    std::uint64_t modulus = 0;  // MODULO N
    std::vector<QubitIndex> xreg;
    std::vector<QubitIndex> yreg;
    ExpParams exp;

    /// All qubits the gate touches, in operand order.
    std::vector<QubitIndex> support() const;

    friend bool operator==(const GateSpec &a, const GateSpec &b);
};

struct TimeStep {
    std::vector<GateSpec> gates;

    friend bool operator==(const TimeStep &, const TimeStep &) = default;
};

struct Circuit {
    int n_qubits = 0;
    std::vector<TimeStep> steps;

    friend bool operator==(const Circuit &, const Circuit &) = default;
};

/// Convenience constructors.
namespace gate {
GateSpec single(GateKind kind, int target, double theta = 0.0);
GateSpec controlled(GateKind kind, std::vector<int> controls, std::vector<int> targets);
GateSpec swap(int a, int b);
GateSpec custom(const Matrix &m, std::vector<int> targets);
GateSpec qft(std::vector<int> reg, bool inverse = false);
GateSpec oracle(std::vector<int> reg, std::vector<std::uint64_t> marked);
GateSpec grover_step(std::vector<int> reg, std::vector<std::uint64_t> marked);
GateSpec grover(std::vector<int> reg, std::vector<std::uint64_t> marked, int iterations);
GateSpec modulo(std::uint64_t a, std::uint64_t n, std::vector<int> xreg, std::vector<int> yreg);
GateSpec exp(std::string hamiltonian, std::vector<int> targets, double t, int slices, int order);
GateSpec measure(std::vector<int> targets);
}  // namespace gate

/// Arity, range, disjointness, unitarity and register checks for one gate.
void validate_gate(const GateSpec &spec, int n_qubits);

/// Validates every gate and the pairwise-disjoint supports inside each step.
/// Error messages name the 1-based step.
void validate_circuit(const Circuit &circuit);

/// Standard matrix of a fixed gate, operands ordered controls then targets
/// (operand 0 is the most significant local bit). Standard Pauli convention,
/// sigma_y = [[0,-i],[i,0]].
Matrix gate_matrix(const GateSpec &spec);

/// Applies a unitary gate. EXP and MEASURE are not handled here.
void apply_gate(StateVector &state, const GateSpec &spec);

/// F_jk = w^{jk} / sqrt(2^m), w = exp(2 pi i / 2^m), on the register
/// (register[0] most significant). `inverse` applies F^dagger.
void apply_qft(StateVector &state, std::span<const QubitIndex> reg, bool inverse);

/// Negates amplitudes whose register value is in `marked`.
void apply_oracle(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked);

/// Oracle followed by the diffusion 2|u><u| - I on the register.
void apply_grover_step(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked);

void apply_grover(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked,
                  int iterations);

/// |x>|y> -> |x>|y XOR (a^x mod N)>.
void apply_modulo(StateVector &state, std::uint64_t a, std::uint64_t modulus, std::span<const QubitIndex> xreg,
                  std::span<const QubitIndex> yreg);

/// Dense local operator of any unitary gate together with its operand order,
/// built directly from the defining formulas (used by the matrix engine).
struct LocalOperator {
    Matrix matrix;
    std::vector<QubitIndex> qubits;
};
LocalOperator local_operator(const GateSpec &spec);

}  // namespace qmlsim
