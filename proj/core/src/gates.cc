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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "qmlsim/errors.h"

namespace qmlsim {

namespace {

struct KindInfo {
    GateKind kind;
    std::string_view name;
};

constexpr std::array kKinds = {
    KindInfo{GateKind::H, "H"},
    KindInfo{GateKind::X, "X"},
    KindInfo{GateKind::Y, "Y"},
    KindInfo{GateKind::Z, "Z"},
    KindInfo{GateKind::S, "S"},
    KindInfo{GateKind::T, "T"},
    KindInfo{GateKind::Phase, "PHASE"},
    KindInfo{GateKind::RX, "RX"},
    KindInfo{GateKind::RY, "RY"},
    KindInfo{GateKind::RZ, "RZ"},
    KindInfo{GateKind::CNOT, "CNOT"},
    KindInfo{GateKind::CZ, "CZ"},
    KindInfo{GateKind::Swap, "SWAP"},
    KindInfo{GateKind::Toffoli, "TOFFOLI"},
    KindInfo{GateKind::Fredkin, "FREDKIN"},
    KindInfo{GateKind::Custom1, "CUSTOM1"},
    KindInfo{GateKind::Custom2, "CUSTOM2"},
    KindInfo{GateKind::QFT, "QFT"},
    KindInfo{GateKind::InvQFT, "INVQFT"},
    KindInfo{GateKind::Oracle, "ORACLE"},
    KindInfo{GateKind::GroverStep, "GROVERSTEP"},
    KindInfo{GateKind::Grover, "GROVER"},
    KindInfo{GateKind::Modulo, "MODULO"},
    KindInfo{GateKind::Exp, "EXP"},
    KindInfo{GateKind::Measure, "MEASURE"},
};

constexpr Complex kI{0.0, 1.0};

std::vector<QubitIndex> to_qubits(const std::vector<int> &v) {
    return qubits(std::span<const int>(v));
}

std::string name_of(const GateSpec &spec) {
    return std::string(kind_name(spec.kind));
}

void expect_arity(const GateSpec &spec, std::size_t controls, std::size_t targets) {
    if (spec.controls.size() != controls || spec.targets.size() != targets) {
        throw InputError(name_of(spec) + " expects " + std::to_string(controls) + " control(s) and " +
                         std::to_string(targets) + " target(s), got " + std::to_string(spec.controls.size()) +
                         " and " + std::to_string(spec.targets.size()));
    }
}

void check_marked(std::span<const std::uint64_t> marked, std::size_t register_size) {
    const std::uint64_t limit = std::uint64_t{1} << register_size;
    for (std::uint64_t m : marked) {
        if (m >= limit) {
            throw InputError("marked index " + std::to_string(m) + " outside register range [0, " +
                             std::to_string(limit) + ")");
        }
    }
}

// Global bits of register value `v` (register[0] is the MSB).
std::uint64_t spread(std::uint64_t v, int n_qubits, std::span<const QubitIndex> reg) {
    std::uint64_t out = 0;
    const std::size_t m = reg.size();
    for (std::size_t t = 0; t < m; ++t) {
        if ((v >> (m - 1 - t)) & 1U) {
            out |= std::uint64_t{1} << (n_qubits - reg[t].value);
        }
    }
    return out;
}

// Unnormalized in-place DFT with kernel exp(sign * 2 pi i jk / M).
void fft_in_place(std::vector<Complex> &v, std::span<const Complex> twiddle) {
    const std::size_t size = v.size();
    for (std::size_t i = 1, j = 0; i < size; ++i) {
        std::size_t bit = size >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(v[i], v[j]);
        }
    }
    for (std::size_t len = 2; len <= size; len <<= 1) {
        const std::size_t stride = size / len;
        for (std::size_t start = 0; start < size; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex w = twiddle[k * stride];
                const Complex u = v[start + k];
                const Complex t = w * v[start + k + len / 2];
                v[start + k] = u + t;
                v[start + k + len / 2] = u - t;
            }
        }
    }
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::vector<std::uint64_t> modular_powers(std::uint64_t a, std::uint64_t modulus, std::size_t count) {
    std::vector<std::uint64_t> table(count);
    std::uint64_t cur = 1 % modulus;
    const std::uint64_t base = a % modulus;
    for (std::size_t x = 0; x < count; ++x) {
        table[x] = cur;
        cur = mulmod(cur, base, modulus);
    }
    return table;
}

void check_disjoint(const std::vector<QubitIndex> &all, const std::string &what) {
    std::set<int> seen;
    for (QubitIndex q : all) {
        if (!seen.insert(q.value).second) {
            throw InputError(what + ": qubit " + std::to_string(q.value) + " used more than once");
        }
    }
}

}  // namespace

std::string_view kind_name(GateKind kind) {
    for (const auto &info : kKinds) {
        if (info.kind == kind) {
            return info.name;
        }
    }
    return "?";
}

std::optional<GateKind> parse_kind(std::string_view name) {
    for (const auto &info : kKinds) {
        if (info.name == name) {
            return info.kind;
        }
    }
    return std::nullopt;
}

bool is_fixed(GateKind kind) {
    switch (kind) {
        case GateKind::QFT:
        case GateKind::InvQFT:
        case GateKind::Oracle:
        case GateKind::GroverStep:
        case GateKind::Grover:
        case GateKind::Modulo:
        case GateKind::Exp:
        case GateKind::Measure:
            return false;
        default:
            return true;
    }
}

std::vector<QubitIndex> GateSpec::support() const {
    std::vector<QubitIndex> out = controls;
    out.insert(out.end(), targets.begin(), targets.end());
    out.insert(out.end(), xreg.begin(), xreg.end());
    out.insert(out.end(), yreg.begin(), yreg.end());
    return out;
}

bool operator==(const GateSpec &a, const GateSpec &b) {
    const bool matrices_equal = a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
                                (a.matrix.size() == 0 || a.matrix == b.matrix);
    return a.kind == b.kind && a.targets == b.targets && a.controls == b.controls && a.theta == b.theta &&
           matrices_equal && a.marked == b.marked && a.iterations == b.iterations && a.base == b.base &&
           a.modulus == b.modulus && a.xreg == b.xreg && a.yreg == b.yreg && a.exp == b.exp;
}

namespace gate {

GateSpec single(GateKind kind, int target, double theta) {
    GateSpec g;
    g.kind = kind;
    g.targets = qubits({target});
    g.theta = theta;
    return g;
}

GateSpec controlled(GateKind kind, std::vector<int> controls, std::vector<int> targets) {
    GateSpec g;
    g.kind = kind;
    g.controls = to_qubits(controls);
    g.targets = to_qubits(targets);
    return g;
}

GateSpec swap(int a, int b) {
    GateSpec g;
    g.kind = GateKind::Swap;
    g.targets = qubits({a, b});
    return g;
}

GateSpec custom(const Matrix &m, std::vector<int> targets) {
    GateSpec g;
    g.kind = targets.size() == 1 ? GateKind::Custom1 : GateKind::Custom2;
    g.matrix = m;
    g.targets = to_qubits(targets);
    return g;
}

GateSpec qft(std::vector<int> reg, bool inverse) {
    GateSpec g;
    g.kind = inverse ? GateKind::InvQFT : GateKind::QFT;
    g.targets = to_qubits(reg);
    return g;
}

GateSpec oracle(std::vector<int> reg, std::vector<std::uint64_t> marked) {
    GateSpec g;
    g.kind = GateKind::Oracle;
    g.targets = to_qubits(reg);
    g.marked = std::move(marked);
    return g;
}

GateSpec grover_step(std::vector<int> reg, std::vector<std::uint64_t> marked) {
    GateSpec g = oracle(std::move(reg), std::move(marked));
    g.kind = GateKind::GroverStep;
    return g;
}

GateSpec grover(std::vector<int> reg, std::vector<std::uint64_t> marked, int iterations) {
    GateSpec g = oracle(std::move(reg), std::move(marked));
    g.kind = GateKind::Grover;
    g.iterations = iterations;
    return g;
}

GateSpec modulo(std::uint64_t a, std::uint64_t n, std::vector<int> xreg, std::vector<int> yreg) {
    GateSpec g;
    g.kind = GateKind::Modulo;
    g.base = a;
    g.modulus = n;
    g.xreg = to_qubits(xreg);
    g.yreg = to_qubits(yreg);
    return g;
}

GateSpec exp(std::string hamiltonian, std::vector<int> targets, double t, int slices, int order) {
    GateSpec g;
    g.kind = GateKind::Exp;
    g.targets = to_qubits(targets);
    g.exp = ExpParams{std::move(hamiltonian), t, slices, order};
    return g;
}

GateSpec measure(std::vector<int> targets) {
    GateSpec g;
    g.kind = GateKind::Measure;
    g.targets = to_qubits(targets);
    return g;
}

}  // namespace gate

void validate_gate(const GateSpec &spec, int n_qubits) {
    const std::vector<QubitIndex> all = spec.support();
    for (QubitIndex q : all) {
        if (q.value < 1 || q.value > n_qubits) {
            throw InputError(name_of(spec) + ": qubit " + std::to_string(q.value) + " out of range 1.." +
                             std::to_string(n_qubits));
        }
    }
    check_disjoint(all, name_of(spec));

    switch (spec.kind) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z:
        case GateKind::S:
        case GateKind::T:
        case GateKind::Phase:
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
            expect_arity(spec, 0, 1);
            if (!std::isfinite(spec.theta)) {
                throw InputError(name_of(spec) + ": theta must be finite");
            }
            break;
        case GateKind::CNOT:
        case GateKind::CZ:
            expect_arity(spec, 1, 1);
            break;
        case GateKind::Swap:
            expect_arity(spec, 0, 2);
            break;
        case GateKind::Toffoli:
            expect_arity(spec, 2, 1);
            break;
        case GateKind::Fredkin:
            expect_arity(spec, 1, 2);
            break;
        case GateKind::Custom1:
        case GateKind::Custom2: {
            const std::size_t k = spec.kind == GateKind::Custom1 ? 1 : 2;
            expect_arity(spec, 0, k);
            const auto dim = static_cast<Eigen::Index>(std::size_t{1} << k);
            if (spec.matrix.rows() != dim || spec.matrix.cols() != dim) {
                throw InputError(name_of(spec) + ": matrix must be " + std::to_string(dim) + "x" +
                                 std::to_string(dim));
            }
            if (!is_unitary(spec.matrix)) {
                throw InputError(name_of(spec) + ": matrix is not unitary within 1e-10");
            }
            break;
        }
        case GateKind::QFT:
        case GateKind::InvQFT:
        case GateKind::Oracle:
        case GateKind::GroverStep:
        case GateKind::Grover:
            if (!spec.controls.empty() || spec.targets.empty()) {
                throw InputError(name_of(spec) + " needs a non-empty target register and no controls");
            }
            check_marked(spec.marked, spec.targets.size());
            if (spec.kind == GateKind::Grover && spec.iterations < 0) {
                throw InputError("GROVER iterations must be >= 0");
            }
            break;
        case GateKind::Modulo: {
            if (!spec.targets.empty() || !spec.controls.empty() || spec.xreg.empty() || spec.yreg.empty()) {
                throw InputError("MODULO needs non-empty xreg and yreg and no targets/controls");
            }
            if (spec.modulus == 0) {
                throw InputError("MODULO modulus must be >= 1");
            }
            const auto needed = static_cast<std::size_t>(std::bit_width(spec.modulus - 1));
            if (spec.yreg.size() < needed) {
                throw InputError("MODULO y-register has " + std::to_string(spec.yreg.size()) + " qubits, " +
                                 std::to_string(needed) + " needed for N=" + std::to_string(spec.modulus));
            }
            if (spec.xreg.size() > 30) {
                throw InputError("MODULO x-register too wide");
            }
            break;
        }
        case GateKind::Exp:
            if (!spec.controls.empty() || spec.targets.empty()) {
                throw InputError("EXP needs target qubits and no controls");
            }
            if (spec.exp.hamiltonian.empty()) {
                throw InputError("EXP needs a hamiltonian reference");
            }
            if (!std::isfinite(spec.exp.t)) {
                throw InputError("EXP time must be finite");
            }
            if (spec.exp.slices < 1) {
                throw InputError("EXP slice count must be >= 1");
            }
            if (spec.exp.order != kExactOrder && spec.exp.order != 1 && spec.exp.order != 2 &&
                spec.exp.order != 4) {
                throw InputError("EXP order must be 1, 2, 4 or exact");
            }
            break;
        case GateKind::Measure:
            if (!spec.controls.empty() || spec.targets.empty()) {
                throw InputError("MEASURE needs target qubits and no controls");
            }
            break;
    }
}

void validate_circuit(const Circuit &circuit) {
    if (circuit.n_qubits < 1 || circuit.n_qubits > kMaxQubits) {
        throw InputError("qubit count must be in 1.." + std::to_string(kMaxQubits));
    }
    for (std::size_t s = 0; s < circuit.steps.size(); ++s) {
        std::uint64_t used = 0;
        for (const GateSpec &g : circuit.steps[s].gates) {
            try {
                validate_gate(g, circuit.n_qubits);
            } catch (const Error &e) {
                rethrow_with_prefix(e, "step " + std::to_string(s + 1) + ": ");
            }
            for (QubitIndex q : g.support()) {
                const std::uint64_t bit = std::uint64_t{1} << q.value;
                if (used & bit) {
                    throw InputError("overlapping supports in step " + std::to_string(s + 1) + " (qubit " +
                                     std::to_string(q.value) + ")");
                }
                used |= bit;
            }
        }
    }
}

Matrix gate_matrix(const GateSpec &spec) {
    if (!is_fixed(spec.kind)) {
        throw InputError(name_of(spec) + " is a scalable gate and has no fixed matrix");
    }
    const double r = 1.0 / std::numbers::sqrt2;
    const double half = spec.theta / 2.0;
    Matrix m;
    switch (spec.kind) {
        case GateKind::H:
            m.resize(2, 2);
            m << r, r, r, -r;
            return m;
        case GateKind::X:
            m.resize(2, 2);
            m << 0, 1, 1, 0;
            return m;
        case GateKind::Y:
            m.resize(2, 2);
            m << 0, -kI, kI, 0;
            return m;
        case GateKind::Z:
            m.resize(2, 2);
            m << 1, 0, 0, -1;
            return m;
        case GateKind::S:
            m.resize(2, 2);
            m << 1, 0, 0, kI;
            return m;
        case GateKind::T:
            m.resize(2, 2);
            m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
            return m;
        case GateKind::Phase:
            m.resize(2, 2);
            m << 1, 0, 0, std::polar(1.0, spec.theta);
            return m;
        case GateKind::RX:
            m.resize(2, 2);
            m << std::cos(half), -kI * std::sin(half), -kI * std::sin(half), std::cos(half);
            return m;
        case GateKind::RY:
            m.resize(2, 2);
            m << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
            return m;
        case GateKind::RZ:
            m.resize(2, 2);
            m << std::polar(1.0, -half), 0, 0, std::polar(1.0, half);
            return m;
        case GateKind::CNOT:
            m = Matrix::Identity(4, 4);
            m(2, 2) = 0;
            m(3, 3) = 0;
            m(2, 3) = 1;
            m(3, 2) = 1;
            return m;
        case GateKind::CZ:
            m = Matrix::Identity(4, 4);
            m(3, 3) = -1;
            return m;
        case GateKind::Swap:
            m = Matrix::Zero(4, 4);
            m(0, 0) = 1;
            m(1, 2) = 1;
            m(2, 1) = 1;
            m(3, 3) = 1;
            return m;
        case GateKind::Toffoli:
            m = Matrix::Identity(8, 8);
            m(6, 6) = 0;
            m(7, 7) = 0;
            m(6, 7) = 1;
            m(7, 6) = 1;
            return m;
        case GateKind::Fredkin:
            m = Matrix::Identity(8, 8);
            m(5, 5) = 0;
            m(6, 6) = 0;
            m(5, 6) = 1;
            m(6, 5) = 1;
            return m;
        case GateKind::Custom1:
        case GateKind::Custom2:
            return spec.matrix;
        default:
            break;
    }
    throw InputError(name_of(spec) + " has no fixed matrix");
}

void apply_qft(StateVector &state, std::span<const QubitIndex> reg, bool inverse) {
    const int n = state.num_qubits();
    check_targets(n, reg);
    const std::size_t m = reg.size();
    const std::size_t size = std::size_t{1} << m;
    const double sign = inverse ? -1.0 : 1.0;
    std::vector<Complex> twiddle(size / 2 + 1);
    for (std::size_t k = 0; k < twiddle.size(); ++k) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
        twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(size));
    const std::vector<int> positions = detail::sorted_positions(n, reg);
    const std::vector<std::uint64_t> offsets = detail::local_offsets(n, reg);
    const auto blocks = static_cast<std::int64_t>(state.dim() >> m);
    Complex *amps = state.amplitudes().data();

#pragma omp parallel num_threads(worker_count()) if (blocks > 1 && state.dim() >= 4096)
    {
        std::vector<Complex> v(size);
#pragma omp for schedule(static)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::uint64_t base = detail::insert_zero_bits(static_cast<std::uint64_t>(b), positions);
            for (std::size_t j = 0; j < size; ++j) {
                v[j] = amps[base | offsets[j]];
            }
            fft_in_place(v, twiddle);
            for (std::size_t j = 0; j < size; ++j) {
                amps[base | offsets[j]] = v[j] * scale;
            }
        }
    }
}

void apply_oracle(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked) {
    const int n = state.num_qubits();
    check_targets(n, reg);
    check_marked(marked, reg.size());
    const std::set<std::uint64_t> unique(marked.begin(), marked.end());
    const std::vector<int> positions = detail::sorted_positions(n, reg);
    const auto blocks = static_cast<std::int64_t>(state.dim() >> reg.size());
    Complex *amps = state.amplitudes().data();
    for (std::uint64_t value : unique) {
        const std::uint64_t off = spread(value, n, reg);
#pragma omp parallel for num_threads(worker_count()) schedule(static) if (blocks >= 4096)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::uint64_t base = detail::insert_zero_bits(static_cast<std::uint64_t>(b), positions);
            amps[base | off] = -amps[base | off];
        }
    }
}

namespace {

void apply_diffusion(StateVector &state, std::span<const QubitIndex> reg) {
    const int n = state.num_qubits();
    const std::size_t size = std::size_t{1} << reg.size();
    const std::vector<int> positions = detail::sorted_positions(n, reg);
    const std::vector<std::uint64_t> offsets = detail::local_offsets(n, reg);
    const auto blocks = static_cast<std::int64_t>(state.dim() >> reg.size());
    Complex *amps = state.amplitudes().data();
#pragma omp parallel for num_threads(worker_count()) schedule(static) if (blocks > 1 && state.dim() >= 4096)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::uint64_t base = detail::insert_zero_bits(static_cast<std::uint64_t>(b), positions);
        Complex sum = 0.0;
        for (std::size_t j = 0; j < size; ++j) {
            sum += amps[base | offsets[j]];
        }
        const Complex twice_mean = 2.0 * sum / static_cast<double>(size);
        for (std::size_t j = 0; j < size; ++j) {
            Complex &a = amps[base | offsets[j]];
            a = twice_mean - a;
        }
    }
}

}  // namespace

void apply_grover_step(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked) {
    apply_oracle(state, reg, marked);
    apply_diffusion(state, reg);
}

void apply_grover(StateVector &state, std::span<const QubitIndex> reg, std::span<const std::uint64_t> marked,
                  int iterations) {
    if (iterations < 0) {
        throw InputError("GROVER iterations must be >= 0");
    }
    check_targets(state.num_qubits(), reg);
    check_marked(marked, reg.size());
    for (int i = 0; i < iterations; ++i) {
        apply_grover_step(state, reg, marked);
    }
}

void apply_modulo(StateVector &state, std::uint64_t a, std::uint64_t modulus, std::span<const QubitIndex> xreg,
                  std::span<const QubitIndex> yreg) {
    const int n = state.num_qubits();
    GateSpec spec;
    spec.kind = GateKind::Modulo;
    spec.base = a;
    spec.modulus = modulus;
    spec.xreg.assign(xreg.begin(), xreg.end());
    spec.yreg.assign(yreg.begin(), yreg.end());
    validate_gate(spec, n);

    const std::vector<std::uint64_t> powers = modular_powers(a, modulus, std::size_t{1} << xreg.size());
    std::vector<std::uint64_t> masks(powers.size());
    for (std::size_t x = 0; x < powers.size(); ++x) {
        masks[x] = spread(powers[x], n, yreg);
    }
    const auto dim = static_cast<std::int64_t>(state.dim());
    Complex *amps = state.amplitudes().data();
    // XOR with a mask that depends only on x is an involution: swap each pair once.
#pragma omp parallel for num_threads(worker_count()) schedule(static) if (dim >= 4096)
    for (std::int64_t i = 0; i < dim; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const std::uint64_t partner = idx ^ masks[detail::register_value(idx, n, xreg)];
        if (idx < partner) {
            std::swap(amps[idx], amps[partner]);
        }
    }
}

void apply_gate(StateVector &state, const GateSpec &spec) {
    validate_gate(spec, state.num_qubits());
    switch (spec.kind) {
        case GateKind::QFT:
            apply_qft(state, spec.targets, false);
            return;
        case GateKind::InvQFT:
            apply_qft(state, spec.targets, true);
            return;
        case GateKind::Oracle:
            apply_oracle(state, spec.targets, spec.marked);
            return;
        case GateKind::GroverStep:
            apply_grover_step(state, spec.targets, spec.marked);
            return;
        case GateKind::Grover:
            apply_grover(state, spec.targets, spec.marked, spec.iterations);
            return;
        case GateKind::Modulo:
            apply_modulo(state, spec.base, spec.modulus, spec.xreg, spec.yreg);
            return;
        case GateKind::Exp:
        case GateKind::Measure:
            throw InputError(name_of(spec) + " cannot be applied as a plain unitary gate");
        default:
            break;
    }
    const std::vector<QubitIndex> operands = spec.support();
    apply_matrix_unchecked(state, gate_matrix(spec), operands);
}

LocalOperator local_operator(const GateSpec &spec) {
    if (is_fixed(spec.kind)) {
        return {gate_matrix(spec), spec.support()};
    }
    const auto m = static_cast<int>(spec.targets.size());
    const Eigen::Index size = Eigen::Index{1} << m;
    switch (spec.kind) {
        case GateKind::QFT:
        case GateKind::InvQFT: {
            const double sign = spec.kind == GateKind::QFT ? 1.0 : -1.0;
            Matrix f(size, size);
            const double scale = 1.0 / std::sqrt(static_cast<double>(size));
            for (Eigen::Index j = 0; j < size; ++j) {
                for (Eigen::Index k = 0; k < size; ++k) {
                    const auto phase = static_cast<double>((j * k) % size);
                    f(j, k) = std::polar(scale, sign * 2.0 * std::numbers::pi * phase / static_cast<double>(size));
                }
            }
            return {f, spec.targets};
        }
        case GateKind::Oracle:
        case GateKind::GroverStep:
        case GateKind::Grover: {
            Matrix oracle = Matrix::Identity(size, size);
            for (std::uint64_t v : std::set<std::uint64_t>(spec.marked.begin(), spec.marked.end())) {
                oracle(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) = -1.0;
            }
            if (spec.kind == GateKind::Oracle) {
                return {oracle, spec.targets};
            }
            const Matrix diffusion =
                Matrix::Constant(size, size, 2.0 / static_cast<double>(size)) - Matrix::Identity(size, size);
            const Matrix step = diffusion * oracle;
            if (spec.kind == GateKind::GroverStep) {
                return {step, spec.targets};
            }
            Matrix total = Matrix::Identity(size, size);
            for (int i = 0; i < spec.iterations; ++i) {
                total = step * total;
            }
            return {total, spec.targets};
        }
        case GateKind::Modulo: {
            const std::size_t nx = spec.xreg.size();
            const std::size_t ny = spec.yreg.size();
            const Eigen::Index local = Eigen::Index{1} << (nx + ny);
            Matrix p = Matrix::Zero(local, local);
            const std::uint64_t ymask = (std::uint64_t{1} << ny) - 1;
            for (Eigen::Index col = 0; col < local; ++col) {
                const auto c = static_cast<std::uint64_t>(col);
                const std::uint64_t x = c >> ny;
                std::uint64_t value = 1 % spec.modulus;
                for (std::uint64_t e = 0; e < x; ++e) {
                    value = mulmod(value, spec.base % spec.modulus, spec.modulus);
                }
                const std::uint64_t row = (x << ny) | ((c & ymask) ^ value);
                p(static_cast<Eigen::Index>(row), col) = 1.0;
            }
            std::vector<QubitIndex> operands = spec.xreg;
            operands.insert(operands.end(), spec.yreg.begin(), spec.yreg.end());
            return {p, operands};
        }
        default:
            break;
    }
    throw InputError(name_of(spec) + " has no local unitary");
}

}  // namespace qmlsim
