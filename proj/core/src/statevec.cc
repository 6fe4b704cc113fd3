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

#include "qmlsim/statevec.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <string>

#include "qmlsim/errors.h"

namespace qmlsim {

namespace {

std::atomic<int> g_workers{1};

// Below this many outer iterations the kernels stay on the calling thread.
constexpr std::int64_t kParallelThreshold = 1 << 12;

}  // namespace

std::vector<QubitIndex> qubits(std::initializer_list<int> values) {
    std::vector<QubitIndex> out;
    out.reserve(values.size());
    for (int v : values) {
        out.push_back(QubitIndex{v});
    }
    return out;
}

std::vector<QubitIndex> qubits(std::span<const int> values) {
    std::vector<QubitIndex> out;
    out.reserve(values.size());
    for (int v : values) {
        out.push_back(QubitIndex{v});
    }
    return out;
}

std::uint64_t state_bytes(int n_qubits) {
    return std::uint64_t{16} << n_qubits;
}

std::uint64_t default_memory_cap() {
    if (const char *env = std::getenv("QMLSIM_MEMORY_CAP")) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return v;
        }
    }
    return std::uint64_t{4} << 30;
}

void set_worker_count(int workers) {
    g_workers.store(std::max(1, workers));
}

int worker_count() {
    return g_workers.load();
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index, std::uint64_t memory_cap) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw InputError("qubit count must be in 1.." + std::to_string(kMaxQubits) + ", got " +
                         std::to_string(n_qubits));
    }
    const std::uint64_t bytes = state_bytes(n_qubits);
    if (bytes > memory_cap) {
        throw ResourceError("state of " + std::to_string(n_qubits) + " qubits requires " + std::to_string(bytes) +
                            " bytes, memory cap is " + std::to_string(memory_cap) + " bytes");
    }
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;
    if (index >= dim) {
        throw InputError("basis index " + std::to_string(index) + " out of range for " + std::to_string(n_qubits) +
                         " qubits");
    }
    std::vector<Complex> amps(dim);
    amps[index] = 1.0;
    return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw InputError("amplitude count must be a power of two >= 2, got " + std::to_string(dim));
    }
    const int n = std::countr_zero(dim);
    if (n > kMaxQubits) {
        throw InputError("too many amplitudes");
    }
    return StateVector(n, std::move(amplitudes));
}

double StateVector::norm_squared() const {
    double sum = 0.0;
    for (const Complex &c : amplitudes_) {
        sum += std::norm(c);
    }
    return sum;
}

void check_targets(int n_qubits, std::span<const QubitIndex> targets) {
    if (targets.empty()) {
        throw InputError("operator needs at least one target qubit");
    }
    std::uint64_t seen = 0;
    for (QubitIndex q : targets) {
        if (q.value < 1 || q.value > n_qubits) {
            throw InputError("qubit " + std::to_string(q.value) + " out of range 1.." + std::to_string(n_qubits));
        }
        const std::uint64_t bit = std::uint64_t{1} << q.value;
        if (seen & bit) {
            throw InputError("duplicate target qubit " + std::to_string(q.value));
        }
        seen |= bit;
    }
}

bool is_unitary(const Matrix &u, double tolerance) {
    if (u.rows() != u.cols() || u.rows() == 0) {
        return false;
    }
    const Matrix defect = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
    return defect.cwiseAbs().maxCoeff() <= tolerance;
}

namespace detail {

std::vector<int> sorted_positions(int n_qubits, std::span<const QubitIndex> targets) {
    std::vector<int> pos;
    pos.reserve(targets.size());
    for (QubitIndex q : targets) {
        pos.push_back(n_qubits - q.value);
    }
    std::sort(pos.begin(), pos.end());
    return pos;
}

std::vector<std::uint64_t> local_offsets(int n_qubits, std::span<const QubitIndex> targets) {
    const std::size_t k = targets.size();
    std::vector<std::uint64_t> offsets(std::size_t{1} << k, 0);
    for (std::size_t j = 0; j < offsets.size(); ++j) {
        std::uint64_t off = 0;
        for (std::size_t t = 0; t < k; ++t) {
            if ((j >> (k - 1 - t)) & 1U) {
                off |= std::uint64_t{1} << (n_qubits - targets[t].value);
            }
        }
        offsets[j] = off;
    }
    return offsets;
}

std::uint64_t register_value(std::uint64_t index, int n_qubits, std::span<const QubitIndex> reg) {
    std::uint64_t v = 0;
    for (QubitIndex q : reg) {
        v = (v << 1) | ((index >> (n_qubits - q.value)) & 1U);
    }
    return v;
}

}  // namespace detail

void apply_matrix_unchecked(StateVector &state, const Matrix &m, std::span<const QubitIndex> targets) {
    const int n = state.num_qubits();
    check_targets(n, targets);
    const std::size_t local_dim = std::size_t{1} << targets.size();
    if (static_cast<std::size_t>(m.rows()) != local_dim || static_cast<std::size_t>(m.cols()) != local_dim) {
        throw InputError("operator dimension " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " does not match " + std::to_string(targets.size()) + " target qubits");
    }
    const std::vector<int> positions = detail::sorted_positions(n, targets);
    const std::vector<std::uint64_t> offsets = detail::local_offsets(n, targets);
    const auto blocks = static_cast<std::int64_t>(state.dim() >> targets.size());
    Complex *amps = state.amplitudes().data();

    if (local_dim == 2) {
        const Complex m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
        const std::uint64_t off = offsets[1];
        const int p = positions[0];
#pragma omp parallel for num_threads(worker_count()) schedule(static) if (blocks >= kParallelThreshold)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::uint64_t low = static_cast<std::uint64_t>(b) & ((std::uint64_t{1} << p) - 1);
            const std::uint64_t i0 = ((static_cast<std::uint64_t>(b) >> p) << (p + 1)) | low;
            const Complex a0 = amps[i0];
            const Complex a1 = amps[i0 | off];
            amps[i0] = m00 * a0 + m01 * a1;
            amps[i0 | off] = m10 * a0 + m11 * a1;
        }
        return;
    }

    if (local_dim == 4) {
        Complex u[4][4];
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                u[r][c] = m(r, c);
            }
        }
        const std::uint64_t o1 = offsets[1], o2 = offsets[2], o3 = offsets[3];
#pragma omp parallel for num_threads(worker_count()) schedule(static) if (blocks >= kParallelThreshold)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::uint64_t base = detail::insert_zero_bits(static_cast<std::uint64_t>(b), positions);
            const Complex in[4] = {amps[base], amps[base | o1], amps[base | o2], amps[base | o3]};
            const std::uint64_t idx[4] = {base, base | o1, base | o2, base | o3};
            for (int r = 0; r < 4; ++r) {
                amps[idx[r]] = u[r][0] * in[0] + u[r][1] * in[1] + u[r][2] * in[2] + u[r][3] * in[3];
            }
        }
        return;
    }

#pragma omp parallel num_threads(worker_count()) if (blocks >= kParallelThreshold)
    {
        std::vector<Complex> in(local_dim);
#pragma omp for schedule(static)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::uint64_t base = detail::insert_zero_bits(static_cast<std::uint64_t>(b), positions);
            for (std::size_t j = 0; j < local_dim; ++j) {
                in[j] = amps[base | offsets[j]];
            }
            for (std::size_t r = 0; r < local_dim; ++r) {
                Complex acc = 0.0;
                for (std::size_t c = 0; c < local_dim; ++c) {
                    acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
                }
                amps[base | offsets[r]] = acc;
            }
        }
    }
}

void apply_kqubit_op(StateVector &state, const Matrix &u, std::span<const QubitIndex> targets) {
    if (!is_unitary(u)) {
        throw InputError("operator is not unitary within 1e-10");
    }
    apply_matrix_unchecked(state, u, targets);
}

Complex inner_product(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw InputError("inner product of states with " + std::to_string(a.num_qubits()) + " and " +
                         std::to_string(b.num_qubits()) + " qubits");
    }
    Complex sum = 0.0;
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += std::conj(x[i]) * y[i];
    }
    return sum;
}

}  // namespace qmlsim
