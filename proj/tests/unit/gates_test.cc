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

#include "qmlsim/gates.h"

#include <gtest/gtest.h>

#include "helpers.h"
#include "qmlsim/errors.h"
#include "qmlsim/shor.h"

using namespace qmlsim;
using oracle::C;
using oracle::M;
using oracle::V;
using testing_support::from_vec;
using testing_support::max_diff;
using testing_support::to_vec;

namespace {

const C kI(0, 1);

// Expected operator for each fixed kind, built from Pauli exponentials and
// Kronecker products rather than from gate_matrix.
M expected_matrix(const GateSpec &g) {
    using namespace oracle;
    switch (g.kind) {
        case GateKind::H:
            return hadamard();
        case GateKind::X:
            return pauli_x();
        case GateKind::Y:
            return pauli_y();
        case GateKind::Z:
            return pauli_z();
        case GateKind::S:
            return mat2(1, 0, 0, kI);
        case GateKind::T:
            return mat2(1, 0, 0, std::exp(kI * M_PI / 4.0));
        case GateKind::Phase:
            return mat2(1, 0, 0, std::exp(kI * g.theta));
        case GateKind::RX:
            return expm(-kI * (g.theta / 2) * pauli_x());
        case GateKind::RY:
            return expm(-kI * (g.theta / 2) * pauli_y());
        case GateKind::RZ:
            return expm(-kI * (g.theta / 2) * pauli_z());
        case GateKind::CNOT:
            return controlled(pauli_x());
        case GateKind::CZ:
            return controlled(pauli_z());
        case GateKind::Swap: {
            M s = M::Zero(4, 4);
            s(0, 0) = s(3, 3) = s(1, 2) = s(2, 1) = 1;
            return s;
        }
        case GateKind::Toffoli:
            return controlled(controlled(pauli_x()));
        case GateKind::Fredkin: {
            M s = M::Zero(4, 4);
            s(0, 0) = s(3, 3) = s(1, 2) = s(2, 1) = 1;
            return controlled(s);
        }
        default:
            return g.matrix;
    }
}

std::vector<int> operands(const GateSpec &g) {
    std::vector<int> out;
    for (QubitIndex q : g.support()) {
        out.push_back(q.value);
    }
    return out;
}

}  // namespace

TEST(GateMatrix, StandardMatrices) {
    M cnot(4, 4);
    cnot << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
    EXPECT_LT((gate_matrix(gate::controlled(GateKind::CNOT, {1}, {2})) - cnot).norm(), 1e-15);
    EXPECT_LT((gate_matrix(gate::single(GateKind::H, 1)) - oracle::hadamard()).norm(), 1e-15);
    EXPECT_LT((gate_matrix(gate::single(GateKind::RZ, 1, 0.0)) - M::Identity(2, 2)).norm(), 1e-15);
    // Standard sign of sigma_y.
    const M y = gate_matrix(gate::single(GateKind::Y, 1));
    EXPECT_EQ(y(0, 1), C(0, -1));
    EXPECT_EQ(y(1, 0), C(0, 1));
}

TEST(GateMatrix, ScalableKindsRejected) {
    EXPECT_THROW(gate_matrix(gate::qft({1, 2})), InputError);
    EXPECT_THROW(gate_matrix(gate::modulo(2, 3, {1}, {2, 3})), InputError);
}

TEST(GateMatrix, FixedGatesAreUnitary) {
    const std::vector<GateSpec> gates = {
        gate::single(GateKind::H, 1),       gate::single(GateKind::X, 1),
        gate::single(GateKind::Y, 1),       gate::single(GateKind::Z, 1),
        gate::single(GateKind::S, 1),       gate::single(GateKind::T, 1),
        gate::single(GateKind::Phase, 1, 0.3), gate::single(GateKind::RX, 1, 1.1),
        gate::single(GateKind::RY, 1, -0.4), gate::single(GateKind::RZ, 1, 2.5),
        gate::controlled(GateKind::CNOT, {1}, {2}), gate::controlled(GateKind::CZ, {1}, {2}),
        gate::swap(1, 2),                   gate::controlled(GateKind::Toffoli, {1, 2}, {3}),
        gate::controlled(GateKind::Fredkin, {1}, {2, 3})};
    for (const GateSpec &g : gates) {
        const M u = gate_matrix(g);
        EXPECT_LT((u.adjoint() * u - M::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), 1e-12)
            << kind_name(g.kind);
    }
}

TEST(ApplyGate, FixedKindsMatchDenseOracle) {
    const int n = 4;
    const std::vector<GateSpec> gates = {
        gate::single(GateKind::H, 3),
        gate::single(GateKind::X, 1),
        gate::single(GateKind::Y, 4),
        gate::single(GateKind::Z, 2),
        gate::single(GateKind::S, 1),
        gate::single(GateKind::T, 2),
        gate::single(GateKind::Phase, 3, 0.77),
        gate::single(GateKind::RX, 2, 1.3),
        gate::single(GateKind::RY, 4, -2.1),
        gate::single(GateKind::RZ, 1, 0.9),
        gate::controlled(GateKind::CNOT, {3}, {1}),
        gate::controlled(GateKind::CZ, {2}, {4}),
        gate::swap(4, 1),
        gate::controlled(GateKind::Toffoli, {4, 2}, {3}),
        gate::controlled(GateKind::Fredkin, {2}, {4, 1}),
        gate::custom(oracle::random_unitary(2, 31), {3}),
        gate::custom(oracle::random_unitary(4, 32), {4, 2}),
    };
    int seed = 0;
    for (const GateSpec &g : gates) {
        const V psi = oracle::random_state(n, 300 + seed++);
        StateVector s = from_vec(psi);
        apply_gate(s, g);
        const V expected = oracle::embed(expected_matrix(g), operands(g), n) * psi;
        EXPECT_LT(max_diff(to_vec(s), expected), 1e-12) << kind_name(g.kind);
    }
}

TEST(ApplyGate, YSignOnBlochSphere) {
    // Y|0> = i|1>.
    StateVector s = StateVector::basis(1, 0);
    apply_gate(s, gate::single(GateKind::Y, 1));
    EXPECT_NEAR(std::abs(s[1] - C(0, 1)), 0.0, 1e-15);
}

TEST(Qft, OneQubitIsHadamard) {
    const V psi = oracle::random_state(1, 40);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::qft({1}));
    EXPECT_LT(max_diff(to_vec(s), oracle::hadamard() * psi), 1e-14);
}

TEST(Qft, ZeroStateGivesUniformSuperposition) {
    StateVector s = StateVector::basis(5, 0);
    apply_gate(s, gate::qft({1, 2, 3, 4, 5}));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        EXPECT_NEAR(s[i].real(), 1.0 / std::sqrt(32.0), 1e-14);
        EXPECT_NEAR(s[i].imag(), 0.0, 1e-14);
    }
}

TEST(Qft, MatchesDftOnScatteredRegister) {
    const int n = 6;
    const std::vector<int> reg = {5, 2, 6};
    const V psi = oracle::random_state(n, 41);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::qft(reg));
    EXPECT_LT(max_diff(to_vec(s), oracle::embed(oracle::dft(3), reg, n) * psi), 1e-12);

    StateVector t = from_vec(psi);
    apply_gate(t, gate::qft(reg, true));
    EXPECT_LT(max_diff(to_vec(t), oracle::embed(oracle::dft(3).adjoint(), reg, n) * psi), 1e-12);
}

TEST(Qft, InverseRoundTrip) {
    const V psi = oracle::random_state(6, 42);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::qft({1, 2, 3, 4, 5, 6}));
    apply_gate(s, gate::qft({1, 2, 3, 4, 5, 6}, true));
    EXPECT_LT(max_diff(to_vec(s), psi), 1e-10);
}

TEST(Qft, PeriodicStateConcentratesOnMultiples) {
    // Period r = 4 on m = 6 qubits: peaks at multiples of 64 / 4 = 16.
    std::vector<Complex> amps(64, 0.0);
    for (int x = 1; x < 64; x += 4) {
        amps[static_cast<std::size_t>(x)] = 0.25;
    }
    StateVector s = StateVector::from_amplitudes(amps);
    const V before = to_vec(s);
    apply_gate(s, gate::qft({1, 2, 3, 4, 5, 6}));
    const V expected = oracle::dft(6) * before;
    EXPECT_LT(max_diff(to_vec(s), expected), 1e-12);
    for (int k = 0; k < 64; ++k) {
        const double p = std::norm(s[static_cast<std::size_t>(k)]);
        EXPECT_NEAR(p, k % 16 == 0 ? 0.25 : 0.0, 1e-12) << k;
    }
}

TEST(Oracle, NegatesMarkedAmplitudes) {
    StateVector s = StateVector::from_amplitudes({0.5, 0.5, 0.5, 0.5});
    apply_gate(s, gate::oracle({1, 2}, {3}));
    EXPECT_EQ(s[3], Complex(-0.5, 0));
    EXPECT_EQ(s[0], Complex(0.5, 0));

    const V psi = oracle::random_state(4, 50);
    StateVector t = from_vec(psi);
    apply_gate(t, gate::oracle({2, 4}, {}));
    EXPECT_EQ(max_diff(to_vec(t), psi), 0.0);

    apply_gate(t, gate::oracle({2, 4}, {1, 2}));
    apply_gate(t, gate::oracle({2, 4}, {1, 2}));
    EXPECT_LT(max_diff(to_vec(t), psi), 1e-12);
}

TEST(Oracle, MarkedOutOfRange) {
    StateVector s = StateVector::basis(2, 0);
    EXPECT_THROW(apply_gate(s, gate::oracle({1, 2}, {4})), InputError);
}

TEST(Oracle, PreservesMagnitudeMultiset) {
    const V psi = oracle::random_state(5, 51);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::oracle({1, 3, 5}, {0, 2, 7}));
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        a.push_back(std::abs(psi(i)));
        b.push_back(std::abs(s[static_cast<std::size_t>(i)]));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

namespace {

StateVector uniform(int n) {
    StateVector s = StateVector::basis(n, 0);
    for (int q = 1; q <= n; ++q) {
        apply_gate(s, gate::single(GateKind::H, q));
    }
    return s;
}

}  // namespace

TEST(Grover, TwoQubitsOneIterationIsExact) {
    for (std::uint64_t marked = 0; marked < 4; ++marked) {
        StateVector s = uniform(2);
        apply_gate(s, gate::grover({1, 2}, {marked}, 1));
        EXPECT_NEAR(std::norm(s[marked]), 1.0, 1e-12);
    }
}

TEST(Grover, ZeroIterationsIsIdentity) {
    const V psi = oracle::random_state(3, 60);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::grover({1, 2, 3}, {5}, 0));
    EXPECT_EQ(max_diff(to_vec(s), psi), 0.0);
}

TEST(Grover, ThreeQubitsMatchesClosedForm) {
    for (int k = 0; k <= 4; ++k) {
        StateVector s = uniform(3);
        apply_gate(s, gate::grover({1, 2, 3}, {6}, k));
        EXPECT_NEAR(std::norm(s[6]), oracle::grover_probability(3, 1, k), 1e-12) << k;
    }
    StateVector s = uniform(3);
    apply_gate(s, gate::grover({1, 2, 3}, {6}, 2));
    EXPECT_NEAR(std::norm(s[6]), 0.9453, 1e-4);
}

TEST(Grover, StepIsOracleThenDiffusion) {
    const int n = 4;
    const std::vector<int> reg = {4, 1, 3};
    const V psi = oracle::random_state(n, 61);
    StateVector s = from_vec(psi);
    apply_gate(s, gate::grover_step(reg, {2, 5}));

    M oracle_op = M::Identity(8, 8);
    oracle_op(2, 2) = -1;
    oracle_op(5, 5) = -1;
    const M diffusion = M::Constant(8, 8, 2.0 / 8.0) - M::Identity(8, 8);
    const V expected = oracle::embed(diffusion * oracle_op, reg, n) * psi;
    EXPECT_LT(max_diff(to_vec(s), expected), 1e-12);
}

namespace {

std::uint64_t y_after_modulo(std::uint64_t a, std::uint64_t n, int xbits, int ybits, std::uint64_t x,
                             std::uint64_t y) {
    std::vector<int> xreg, yreg;
    for (int i = 1; i <= xbits; ++i) {
        xreg.push_back(i);
    }
    for (int i = 1; i <= ybits; ++i) {
        yreg.push_back(xbits + i);
    }
    StateVector s = StateVector::basis(xbits + ybits, (x << ybits) | y);
    apply_gate(s, gate::modulo(a, n, xreg, yreg));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (std::abs(s[i]) > 0.5) {
            EXPECT_EQ(i >> ybits, x);
            return i & ((std::uint64_t{1} << ybits) - 1);
        }
    }
    ADD_FAILURE() << "state vanished";
    return 0;
}

}  // namespace

TEST(Modulo, Examples) {
    EXPECT_EQ(y_after_modulo(2, 3, 2, 2, 3, 0), 2u);
    EXPECT_EQ(y_after_modulo(2, 3, 2, 2, 1, 3), 1u);
    EXPECT_EQ(y_after_modulo(11, 899, 8, 10, 210, 0), oracle::slow_modpow(11, 210, 899));
    EXPECT_EQ(y_after_modulo(11, 899, 8, 10, 210, 0), 869u);
    EXPECT_EQ(y_after_modulo(11, 899, 8, 10, 210, 5), 869u ^ 5u);
}

TEST(Modulo, InvolutionAndPermutation) {
    const V psi = oracle::random_state(7, 70);
    StateVector s = from_vec(psi);
    const GateSpec g = gate::modulo(4, 6, {7, 1, 3, 5}, {2, 6, 4});
    apply_gate(s, g);
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        a.push_back(std::abs(psi(i)));
        b.push_back(std::abs(s[static_cast<std::size_t>(i)]));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    apply_gate(s, g);
    EXPECT_EQ(max_diff(to_vec(s), psi), 0.0);
}

TEST(Modulo, RejectsShortYRegisterAndOverlap) {
    StateVector s = StateVector::basis(5, 0);
    EXPECT_THROW(apply_gate(s, gate::modulo(2, 9, {1, 2}, {3, 4, 5})), InputError);
    EXPECT_THROW(apply_gate(s, gate::modulo(2, 3, {1, 2}, {2, 3})), InputError);
}

TEST(Validation, ArityAndDisjointness) {
    EXPECT_THROW(validate_gate(gate::controlled(GateKind::CNOT, {1}, {1}), 2), InputError);
    EXPECT_THROW(validate_gate(gate::controlled(GateKind::Toffoli, {1}, {2}), 3), InputError);
    EXPECT_THROW(validate_gate(gate::single(GateKind::H, 3), 2), InputError);
    M bad = M::Identity(2, 2) * 2.0;
    EXPECT_THROW(validate_gate(gate::custom(bad, {1}), 1), InputError);

    Circuit c{3, {TimeStep{{gate::single(GateKind::H, 1), gate::controlled(GateKind::CNOT, {2}, {1})}}}};
    try {
        validate_circuit(c);
        FAIL();
    } catch (const InputError &e) {
        EXPECT_NE(std::string(e.what()).find("overlapping supports in step 1"), std::string::npos) << e.what();
    }
}

TEST(Validation, GatesInOneStepCommute) {
    // Disjoint supports make in-step order irrelevant.
    const V psi = oracle::random_state(6, 80);
    std::vector<GateSpec> step = {gate::single(GateKind::RX, 1, 0.3), gate::qft({2, 5}),
                                  gate::controlled(GateKind::CNOT, {3}, {6}), gate::oracle({4}, {1})};
    StateVector a = from_vec(psi);
    for (const auto &g : step) {
        apply_gate(a, g);
    }
    std::reverse(step.begin(), step.end());
    StateVector b = from_vec(psi);
    for (const auto &g : step) {
        apply_gate(b, g);
    }
    EXPECT_LT(max_diff(to_vec(a), to_vec(b)), 1e-12);
}

TEST(LocalOperator, ScalableKindsMatchKernels) {
    const int n = 5;
    const std::vector<GateSpec> gates = {gate::qft({2, 4, 5}), gate::qft({3, 1}, true), gate::oracle({1, 5}, {1}),
                                         gate::grover_step({2, 3, 4}, {0, 6}), gate::grover({1, 2}, {3}, 3),
                                         gate::modulo(2, 3, {1, 2}, {4, 5})};
    std::vector<QubitIndex> space = qubits({1, 2, 3, 4, 5});
    int seed = 0;
    for (const GateSpec &g : gates) {
        const V psi = oracle::random_state(n, 90 + seed++);
        StateVector s = from_vec(psi);
        apply_gate(s, g);
        const LocalOperator op = local_operator(g);
        std::vector<int> qs;
        for (QubitIndex q : op.qubits) {
            qs.push_back(q.value);
        }
        EXPECT_LT(max_diff(to_vec(s), oracle::embed(op.matrix, qs, n) * psi), 1e-12) << kind_name(g.kind);
    }
}
