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

#include "qmlsim/hamiltonian.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <set>
#include <span>

#include "qmlsim/errors.h"

namespace qmlsim {

namespace {

std::atomic<std::size_t> g_dense_high_water{0};

void note_dense(std::size_t dim) {
    std::size_t prev = g_dense_high_water.load();
    while (prev < dim && !g_dense_high_water.compare_exchange_weak(prev, dim)) {
    }
}

const std::array<Matrix, 3> &paulis() {
    static const std::array<Matrix, 3> p = [] {
        std::array<Matrix, 3> out;
        out[0] = Matrix::Zero(2, 2);
        out[0](0, 1) = 1;
        out[0](1, 0) = 1;
        out[1] = Matrix::Zero(2, 2);
        out[1](0, 1) = Complex(0, -1);
        out[1](1, 0) = Complex(0, 1);
        out[2] = Matrix::Zero(2, 2);
        out[2](0, 0) = 1;
        out[2](1, 1) = -1;
        return out;
    }();
    return p;
}

Matrix kron2(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// exp(-i s H) for Hermitian H.
Matrix hermitian_exp(const Matrix &h, double s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Eigen::VectorXcd phases =
        (eig.eigenvalues().cast<Complex>() * Complex(0.0, -s)).array().exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

std::vector<QubitIndex> joint_support(std::span<const PauliTerm> terms) {
    std::set<QubitIndex> s;
    for (const PauliTerm &t : terms) {
        s.insert(t.qubits.begin(), t.qubits.end());
    }
    return {s.begin(), s.end()};
}

constexpr std::size_t kCommutatorSupportCap = 4;

void build_slice(std::span<const PauliTerm> terms, double tau, int order, std::vector<TrotterFactor> &out,
                 std::vector<std::string> *warnings, int level) {
    const PauliTerm &head = terms.front();
    if (terms.size() == 1) {
        out.push_back({head.qubits, hermitian_exp(head.local, tau)});
        return;
    }
    const auto rest = terms.subspan(1);
    switch (order) {
        case 1:
            // e^{-i tau H0} e^{-i tau H1}: the rightmost factor acts first.
            build_slice(rest, tau, 1, out, warnings, level + 1);
            out.push_back({head.qubits, hermitian_exp(head.local, tau)});
            return;
        case 2: {
            Matrix half = hermitian_exp(head.local, tau / 2);
            out.push_back({head.qubits, half});
            build_slice(rest, tau, 2, out, warnings, level + 1);
            out.push_back({head.qubits, std::move(half)});
            return;
        }
        case 4: {
            Matrix half = hermitian_exp(head.local, tau / 2);
            const std::vector<QubitIndex> support = joint_support(terms);
            out.push_back({head.qubits, half});
            if (support.size() <= kCommutatorSupportCap) {
                const auto dim = Eigen::Index{1} << support.size();
                note_dense(static_cast<std::size_t>(dim));
                const Matrix h0 = embed_operator(head.local, head.qubits, support);
                Matrix h1 = Matrix::Zero(dim, dim);
                for (const PauliTerm &t : rest) {
                    h1 += embed_operator(t.local, t.qubits, support);
                }
                const Matrix inner = h0 * h1 - h1 * h0;
                const Matrix outer = h0 + 2.0 * h1;
                Matrix c = (outer * inner - inner * outer) / 24.0;
                c = 0.5 * (c + c.adjoint());
                build_slice(rest, tau / 2, 4, out, warnings, level + 1);
                // e^{+i tau^3 C}
                out.push_back({support, hermitian_exp(c, -tau * tau * tau)});
                build_slice(rest, tau / 2, 4, out, warnings, level + 1);
            } else {
                if (warnings) {
                    warnings->push_back("order-4 commutator omitted at recursion level " + std::to_string(level) +
                                        " (joint support " + std::to_string(support.size()) + " qubits)");
                }
                build_slice(rest, tau, 4, out, warnings, level + 1);
            }
            out.push_back({head.qubits, std::move(half)});
            return;
        }
        default:
            throw InputError("Trotter order must be 1, 2 or 4, got " + std::to_string(order));
    }
}

}  // namespace

PauliCouplingModel PauliCouplingModel::zeros(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw InputError("model qubit count must be in 1.." + std::to_string(kMaxQubits));
    }
    PauliCouplingModel m;
    m.n_qubits = n_qubits;
    m.coupling = Eigen::MatrixXd::Zero(n_qubits, n_qubits);
    m.fields.assign(static_cast<std::size_t>(n_qubits), Eigen::Vector3d::Zero());
    return m;
}

void PauliCouplingModel::set_coupling(int i, int j, double jij, const Eigen::Matrix3d &e2) {
    if (i < 1 || j < 1 || i > n_qubits || j > n_qubits) {
        throw InputError("coupling (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    }
    if (i == j) {
        throw InputError("coupling of qubit " + std::to_string(i) + " with itself");
    }
    if (!std::isfinite(jij) || !e2.allFinite()) {
        throw InputError("coupling (" + std::to_string(i) + "," + std::to_string(j) + ") has non-finite entries");
    }
    const bool swapped = i > j;
    const std::pair<int, int> key = swapped ? std::pair{j, i} : std::pair{i, j};
    const Eigen::Matrix3d oriented = swapped ? Eigen::Matrix3d(e2.transpose()) : e2;
    if (auto it = pair_terms.find(key); it != pair_terms.end()) {
        if (it->second != oriented || coupling(key.first - 1, key.second - 1) != jij) {
            throw InputError("conflicting couplings given for pair (" + std::to_string(key.first) + "," +
                             std::to_string(key.second) + ")");
        }
        return;
    }
    pair_terms.emplace(key, oriented);
    coupling(i - 1, j - 1) = jij;
    coupling(j - 1, i - 1) = jij;
}

void PauliCouplingModel::set_field(int i, const Eigen::Vector3d &e1) {
    if (i < 1 || i > n_qubits) {
        throw InputError("field on qubit " + std::to_string(i) + " out of range");
    }
    if (!e1.allFinite()) {
        throw InputError("field on qubit " + std::to_string(i) + " has non-finite entries");
    }
    fields[static_cast<std::size_t>(i - 1)] = e1;
}

void PauliCouplingModel::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw InputError("model qubit count must be in 1.." + std::to_string(kMaxQubits));
    }
    if (coupling.rows() != n_qubits || coupling.cols() != n_qubits ||
        fields.size() != static_cast<std::size_t>(n_qubits)) {
        throw InputError("model arrays do not match its qubit count");
    }
    for (int i = 0; i < n_qubits; ++i) {
        if (coupling(i, i) != 0.0) {
            throw InputError("J has a nonzero diagonal entry at qubit " + std::to_string(i + 1));
        }
        for (int j = 0; j < n_qubits; ++j) {
            if (!std::isfinite(coupling(i, j)) || coupling(i, j) != coupling(j, i)) {
                throw InputError("J must be finite and symmetric");
            }
        }
        if (!fields[static_cast<std::size_t>(i)].allFinite()) {
            throw InputError("field on qubit " + std::to_string(i + 1) + " is not finite");
        }
    }
    for (const auto &[key, e2] : pair_terms) {
        if (key.first < 1 || key.first >= key.second || key.second > n_qubits) {
            throw InputError("invalid coupling key");
        }
        if (!e2.allFinite()) {
            throw InputError("coupling matrix is not finite");
        }
    }
}

bool operator==(const PauliCouplingModel &a, const PauliCouplingModel &b) {
    return a.n_qubits == b.n_qubits && a.coupling == b.coupling && a.pair_terms == b.pair_terms &&
           a.fields == b.fields;
}

PauliCouplingModel ising_chain(int n_qubits, double e0, double b) {
    PauliCouplingModel m = PauliCouplingModel::zeros(n_qubits);
    Eigen::Matrix3d zz = Eigen::Matrix3d::Zero();
    zz(2, 2) = e0;
    for (int i = 1; i < n_qubits; ++i) {
        m.set_coupling(i, i + 1, 1.0, zz);
    }
    for (int i = 1; i <= n_qubits; ++i) {
        m.set_field(i, Eigen::Vector3d(b, 0.0, 0.0));
    }
    return m;
}

std::vector<PauliTerm> model_terms(const PauliCouplingModel &model, std::span<const QubitIndex> placement) {
    model.validate();
    if (!placement.empty() && placement.size() != static_cast<std::size_t>(model.n_qubits)) {
        throw InputError("model has " + std::to_string(model.n_qubits) + " qubits but placement lists " +
                         std::to_string(placement.size()));
    }
    auto place = [&](int i) { return placement.empty() ? QubitIndex{i} : placement[static_cast<std::size_t>(i - 1)]; };
    const auto &s = paulis();
    std::vector<PauliTerm> terms;
    for (int i = 1; i <= model.n_qubits; ++i) {
        const Eigen::Vector3d &e1 = model.fields[static_cast<std::size_t>(i - 1)];
        if (e1.isZero(0.0)) {
            continue;
        }
        Matrix local = e1(0) * s[0] + e1(1) * s[1] + e1(2) * s[2];
        terms.push_back({{place(i)}, std::move(local)});
    }
    for (const auto &[key, e2] : model.pair_terms) {
        const double jij = model.coupling(key.first - 1, key.second - 1);
        if (jij == 0.0 || e2.isZero(0.0)) {
            continue;
        }
        Matrix local = Matrix::Zero(4, 4);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                if (e2(a, b) != 0.0) {
                    local += (jij * e2(a, b)) * kron2(s[a], s[b]);
                }
            }
        }
        QubitIndex qi = place(key.first);
        QubitIndex qj = place(key.second);
        if (qj < qi) {
            // Keep operands ascending: conjugate by SWAP.
            Matrix swap = Matrix::Zero(4, 4);
            swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1;
            local = swap * local * swap;
            std::swap(qi, qj);
        }
        terms.push_back({{qi, qj}, std::move(local)});
    }
    return terms;
}

Matrix embed_operator(const Matrix &op, std::span<const QubitIndex> op_qubits,
                      std::span<const QubitIndex> space_qubits) {
    const int space = static_cast<int>(space_qubits.size());
    // Re-express operands as positions inside the space.
    std::vector<QubitIndex> local;
    for (QubitIndex q : op_qubits) {
        auto it = std::find(space_qubits.begin(), space_qubits.end(), q);
        if (it == space_qubits.end()) {
            throw InputError("operand qubit " + std::to_string(q.value) + " not in embedding space");
        }
        local.push_back(QubitIndex{static_cast<int>(it - space_qubits.begin()) + 1});
    }
    const std::vector<std::uint64_t> offsets = detail::local_offsets(space, local);
    std::uint64_t op_mask = 0;
    for (std::uint64_t o : offsets) {
        op_mask |= o;
    }
    const auto dim = Eigen::Index{1} << space;
    Matrix out = Matrix::Zero(dim, dim);
    const auto k = static_cast<Eigen::Index>(offsets.size());
    for (Eigen::Index c = 0; c < dim; ++c) {
        const auto col = static_cast<std::uint64_t>(c);
        const std::uint64_t rest = col & ~op_mask;
        const auto c_local = static_cast<Eigen::Index>(detail::register_value(col, space, local));
        for (Eigen::Index j = 0; j < k; ++j) {
            const Complex v = op(j, c_local);
            if (v != Complex(0.0, 0.0)) {
                out(static_cast<Eigen::Index>(rest | offsets[static_cast<std::size_t>(j)]), c) += v;
            }
        }
    }
    return out;
}

Matrix build_dense(const PauliCouplingModel &model, int dense_cap) {
    model.validate();
    if (model.n_qubits > dense_cap) {
        throw ResourceError("dense Hamiltonian of " + std::to_string(model.n_qubits) +
                            " qubits exceeds the dense cap of " + std::to_string(dense_cap) + " qubits");
    }
    std::vector<QubitIndex> all;
    for (int i = 1; i <= model.n_qubits; ++i) {
        all.push_back(QubitIndex{i});
    }
    const auto dim = Eigen::Index{1} << model.n_qubits;
    note_dense(static_cast<std::size_t>(dim));
    Matrix h = Matrix::Zero(dim, dim);
    for (const PauliTerm &t : model_terms(model)) {
        const std::vector<std::uint64_t> offsets = detail::local_offsets(model.n_qubits, t.qubits);
        std::uint64_t op_mask = 0;
        for (std::uint64_t o : offsets) {
            op_mask |= o;
        }
        const auto k = static_cast<Eigen::Index>(offsets.size());
        for (Eigen::Index c = 0; c < dim; ++c) {
            const auto col = static_cast<std::uint64_t>(c);
            const std::uint64_t rest = col & ~op_mask;
            const auto c_local = static_cast<Eigen::Index>(detail::register_value(col, model.n_qubits, t.qubits));
            for (Eigen::Index j = 0; j < k; ++j) {
                h(static_cast<Eigen::Index>(rest | offsets[static_cast<std::size_t>(j)]), c) += t.local(j, c_local);
            }
        }
    }
    return h;
}

Matrix exact_propagator(const Matrix &hamiltonian, double t) {
    if (hamiltonian.rows() != hamiltonian.cols()) {
        throw InputError("Hamiltonian must be square");
    }
    note_dense(static_cast<std::size_t>(hamiltonian.rows()));
    return hermitian_exp(hamiltonian, t);
}

void exact_evolve(const Matrix &hamiltonian, double t, StateVector &state) {
    if (hamiltonian.rows() != static_cast<Eigen::Index>(state.dim()) || hamiltonian.cols() != hamiltonian.rows()) {
        throw InputError("Hamiltonian dimension " + std::to_string(hamiltonian.rows()) +
                         " does not match state dimension " + std::to_string(state.dim()));
    }
    if (t == 0.0) {
        return;
    }
    const Matrix u = exact_propagator(hamiltonian, t);
    Eigen::Map<Eigen::VectorXcd> psi(state.amplitudes().data(), static_cast<Eigen::Index>(state.dim()));
    const Eigen::VectorXcd out = u * psi;
    psi = out;
}

void apply_terms(std::span<const PauliTerm> terms, const StateVector &in, StateVector &out) {
    if (in.num_qubits() != out.num_qubits()) {
        throw InputError("apply_terms: state size mismatch");
    }
    auto dst = out.amplitudes();
    std::fill(dst.begin(), dst.end(), Complex(0.0, 0.0));
    StateVector scratch = in;
    for (const PauliTerm &t : terms) {
        std::copy(in.amplitudes().begin(), in.amplitudes().end(), scratch.amplitudes().begin());
        apply_matrix_unchecked(scratch, t.local, t.qubits);
        const auto src = scratch.amplitudes();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += src[i];
        }
    }
}

std::vector<TrotterFactor> trotter_slice(const TrotterPlan &plan, std::vector<std::string> *warnings) {
    if (plan.order != 1 && plan.order != 2 && plan.order != 4) {
        throw InputError("Trotter order must be 1, 2 or 4, got " + std::to_string(plan.order));
    }
    if (plan.slices < 1) {
        throw InputError("Trotter slice count must be >= 1");
    }
    for (const PauliTerm &t : plan.terms) {
        if (t.qubits.empty() || t.qubits.size() > 2) {
            throw InputError("Trotter terms must act on 1 or 2 qubits");
        }
    }
    std::vector<TrotterFactor> out;
    if (plan.terms.empty()) {
        return out;
    }
    const double tau = plan.t / static_cast<double>(plan.slices);
    build_slice(plan.terms, tau, plan.order, out, warnings, 0);
    return out;
}

TrotterReport trotter_evolve(const TrotterPlan &plan, StateVector &state) {
    TrotterReport report;
    const std::vector<TrotterFactor> factors = trotter_slice(plan, &report.warnings);
    report.factors_per_slice = factors.size();
    if (plan.t == 0.0) {
        return report;
    }
    for (int s = 0; s < plan.slices; ++s) {
        for (const TrotterFactor &f : factors) {
            apply_matrix_unchecked(state, f.unitary, f.qubits);
        }
    }
    return report;
}

ExpReport exp_gate_execute(StateVector &state, const PauliCouplingModel &model, std::span<const QubitIndex> placement,
                           const ExpParams &params, int dense_cap) {
    ExpReport report;
    std::vector<QubitIndex> targets(placement.begin(), placement.end());
    if (targets.empty()) {
        for (int i = 1; i <= model.n_qubits; ++i) {
            targets.push_back(QubitIndex{i});
        }
    }
    if (targets.size() != static_cast<std::size_t>(model.n_qubits)) {
        throw InputError("EXP places a " + std::to_string(model.n_qubits) + "-qubit Hamiltonian on " +
                         std::to_string(targets.size()) + " qubits");
    }
    check_targets(state.num_qubits(), targets);
    int order = params.order;
    if (order == kExactOrder) {
        if (model.n_qubits <= dense_cap) {
            const Matrix u = exact_propagator(build_dense(model, dense_cap), params.t);
            apply_matrix_unchecked(state, u, targets);
            report.route = "exact";
            return report;
        }
        report.warnings.push_back("exact evolution requested for " + std::to_string(model.n_qubits) +
                                  " qubits above the dense cap; using order-2 product formula");
        order = 2;
    }
    TrotterPlan plan;
    plan.order = order;
    plan.t = params.t;
    plan.slices = params.slices;
    plan.terms = model_terms(model, targets);
    TrotterReport tr = trotter_evolve(plan, state);
    report.route = "trotter-" + std::to_string(order);
    report.warnings.insert(report.warnings.end(), tr.warnings.begin(), tr.warnings.end());
    return report;
}

std::size_t dense_dimension_high_water() {
    return g_dense_high_water.load();
}

void reset_dense_dimension_high_water() {
    g_dense_high_water.store(0);
}

}  // namespace qmlsim
