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

#include "qmlsim/engine.h"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>

#include "qmlsim/measurement.h"

namespace qmlsim::engine {

namespace {

using qml::JobTree;
using qml::JobType;

std::uint64_t pow2(int k) {
    return std::uint64_t{1} << k;
}

// Saturating helpers keep estimates for absurd jobs from wrapping around.
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) {
        return UINT64_MAX;
    }
    return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return b > UINT64_MAX - a ? UINT64_MAX : a + b;
}

std::uint64_t dense_bytes(int k) {
    return k >= 30 ? UINT64_MAX : 16 * pow2(2 * k);
}

bool has_exp(const JobTree &job) {
    for (const TimeStep &ts : job.circuit.steps) {
        for (const GateSpec &g : ts.gates) {
            if (g.kind == GateKind::Exp) {
                return true;
            }
        }
    }
    return false;
}

const PauliCouplingModel &spectrum_model(const JobTree &job) {
    auto it = job.hamiltonians.find(job.spectrum_hamiltonian);
    if (it == job.hamiltonians.end()) {
        throw InputError("unknown hamiltonian '" + job.spectrum_hamiltonian + "'");
    }
    return it->second;
}

class StateEngine final : public Engine {
   public:
    RunOutcome execute(const JobTree &job, const EnginePlan &plan, const Limits &limits,
                       const RunOptions &options) override {
        Trace trace;
        trace.engine = plan.engine_id;
        trace.seed = resolve_seed(job, options);
        trace.threshold = job.options.threshold;
        trace.warnings = plan.warnings;
        Rng rng(trace.seed);
        StateVector state = StateVector::basis(job.n_qubits, job.initial_state, limits.memory_cap);
        const std::size_t total = job.circuit.steps.size();
        for (std::size_t s = 0; s < total; ++s) {
            const int step = static_cast<int>(s + 1);
            std::vector<MeasurementRecord> measured;
            try {
                for (const GateSpec &g : job.circuit.steps[s].gates) {
                    if (g.kind == GateKind::Measure) {
                        measured.push_back(measure(state, g.targets, rng, step));
                    } else if (g.kind == GateKind::Exp) {
                        const auto &model = job.hamiltonians.at(g.exp.hamiltonian);
                        ExpReport report = exp_gate_execute(state, model, g.targets, g.exp, limits.dense_cap);
                        for (std::string &w : report.warnings) {
                            trace.warnings.push_back("step " + std::to_string(step) + ": " + w);
                        }
                    } else {
                        apply_gate(state, g);
                    }
                }
            } catch (const Error &e) {
                rethrow_with_prefix(e, "step " + std::to_string(step) + ": ");
            }
            StepRecord record = observe(state, step, job.options.threshold);
            record.measurements = std::move(measured);
            if (options.progress) {
                options.progress(record, total);
            }
            trace.records.push_back(std::move(record));
        }
        RunOutcome out;
        out.trace = std::move(trace);
        out.final_state = std::move(state);
        return out;
    }
};

class MatrixEngine final : public Engine {
   public:
    RunOutcome execute(const JobTree &job, const EnginePlan &plan, const Limits &limits,
                       const RunOptions &options) override {
        const int n = job.n_qubits;
        if (n > limits.matrix_cap) {
            throw ResourceError("matrix engine is limited to " + std::to_string(limits.matrix_cap) + " qubits");
        }
        Trace trace;
        trace.engine = plan.engine_id;
        trace.seed = resolve_seed(job, options);
        trace.threshold = job.options.threshold;
        trace.warnings = plan.warnings;
        Rng rng(trace.seed);
        StateVector state = StateVector::basis(n, job.initial_state, limits.memory_cap);
        std::vector<QubitIndex> space;
        for (int q = 1; q <= n; ++q) {
            space.push_back(QubitIndex{q});
        }
        const auto dim = static_cast<Eigen::Index>(pow2(n));
        Matrix total_unitary = Matrix::Identity(dim, dim);
        bool measurement_free = true;

        auto flush = [&](Matrix &pending) {
            Eigen::Map<Eigen::VectorXcd> amps(state.amplitudes().data(), dim);
            amps = pending * amps;
            if (measurement_free) {
                total_unitary = pending * total_unitary;
            }
            pending.setIdentity();
        };

        const std::size_t total = job.circuit.steps.size();
        for (std::size_t s = 0; s < total; ++s) {
            const int step = static_cast<int>(s + 1);
            std::vector<MeasurementRecord> measured;
            Matrix pending = Matrix::Identity(dim, dim);
            try {
                for (const GateSpec &g : job.circuit.steps[s].gates) {
                    if (g.kind == GateKind::Exp) {
                        throw InputError("matrix engine does not execute EXP gates");
                    }
                    if (g.kind == GateKind::Measure) {
                        flush(pending);
                        measured.push_back(measure(state, g.targets, rng, step));
                        measurement_free = false;
                        continue;
                    }
                    const LocalOperator op = local_operator(g);
                    pending = embed_operator(op.matrix, op.qubits, space) * pending;
                }
                flush(pending);
            } catch (const Error &e) {
                rethrow_with_prefix(e, "step " + std::to_string(step) + ": ");
            }
            StepRecord record = observe(state, step, job.options.threshold);
            record.measurements = std::move(measured);
            if (options.progress) {
                options.progress(record, total);
            }
            trace.records.push_back(std::move(record));
        }
        RunOutcome out;
        out.trace = std::move(trace);
        out.final_state = std::move(state);
        if (measurement_free) {
            out.unitary = std::move(total_unitary);
        }
        return out;
    }
};

class DenseSpectrumEngine final : public Engine {
   public:
    RunOutcome execute(const JobTree &job, const EnginePlan &, const Limits &limits, const RunOptions &) override {
        const Matrix h = build_dense(spectrum_model(job), limits.dense_cap);
        RunOutcome out;
        out.spectrum = full_spectrum(h, false, limits.dense_cap);
        return out;
    }
};

class LanczosSpectrumEngine final : public Engine {
   public:
    RunOutcome execute(const JobTree &job, const EnginePlan &, const Limits &, const RunOptions &options) override {
        const PauliCouplingModel &model = spectrum_model(job);
        LanczosOptions lo;
        lo.k = job.options.margins_k;
        lo.max_iter = job.options.max_iter;
        lo.tol = job.options.tol;
        if (options.seed) {
            lo.seed = *options.seed;
        } else if (job.options.seed) {
            lo.seed = *job.options.seed;
        }
        RunOutcome out;
        out.spectrum = lanczos_margins(model_operator(model), pow2(model.n_qubits), lo);
        return out;
    }
};

std::vector<EngineDescriptor> builtin_engines() {
    std::vector<EngineDescriptor> out;
    out.push_back(EngineDescriptor{
        "matrix-engine",
        [](const JobTree &job, const Limits &limits) {
            return job.type == JobType::Circuit && limits.preference == Preference::Matrix &&
                   job.n_qubits <= limits.matrix_cap && !has_exp(job);
        },
        [](const JobTree &job, const Limits &) {
            return sat_add(state_bytes(job.n_qubits), sat_mul(2, dense_bytes(job.n_qubits)));
        },
        [](const JobTree &job) {
            return sat_mul(static_cast<std::uint64_t>(job.circuit.steps.size()), pow2(3 * job.n_qubits));
        },
        [] { return std::make_unique<MatrixEngine>(); }});
    out.push_back(EngineDescriptor{
        "state-engine",
        [](const JobTree &job, const Limits &limits) {
            return job.type == JobType::Circuit && limits.preference != Preference::Matrix;
        },
        [](const JobTree &job, const Limits &limits) { return circuit_memory_bytes(job, limits.dense_cap); },
        [](const JobTree &job) { return circuit_est_ops(job); },
        [] { return std::make_unique<StateEngine>(); }});
    out.push_back(EngineDescriptor{
        "spectrum-dense",
        [](const JobTree &job, const Limits &limits) {
            return job.type == JobType::SpectrumFull && job.n_qubits <= limits.dense_cap;
        },
        [](const JobTree &job, const Limits &) { return sat_mul(2, dense_bytes(job.n_qubits)); },
        [](const JobTree &job) { return pow2(std::min(3 * job.n_qubits, 63)); },
        [] { return std::make_unique<DenseSpectrumEngine>(); }});
    out.push_back(EngineDescriptor{
        "spectrum-lanczos",
        [](const JobTree &job, const Limits &) { return job.type == JobType::SpectrumMargins; },
        [](const JobTree &job, const Limits &) {
            const std::uint64_t basis =
                std::min<std::uint64_t>(static_cast<std::uint64_t>(job.options.max_iter), pow2(job.n_qubits));
            return sat_mul(state_bytes(job.n_qubits), basis + 3);
        },
        [](const JobTree &job) {
            const std::uint64_t terms = static_cast<std::uint64_t>(job.n_qubits) * job.n_qubits;
            return sat_mul(sat_mul(pow2(job.n_qubits), terms),
                           static_cast<std::uint64_t>(job.options.max_iter));
        },
        [] { return std::make_unique<LanczosSpectrumEngine>(); }});
    return out;
}

std::mutex registry_mutex;
std::vector<EngineDescriptor> &extra_engines() {
    static std::vector<EngineDescriptor> extra;
    return extra;
}

}  // namespace

void register_engine(EngineDescriptor descriptor) {
    std::lock_guard lock(registry_mutex);
    extra_engines().insert(extra_engines().begin(), std::move(descriptor));
}

std::vector<EngineDescriptor> registered_engines() {
    std::vector<EngineDescriptor> all;
    {
        std::lock_guard lock(registry_mutex);
        all = extra_engines();
    }
    for (auto &d : builtin_engines()) {
        all.push_back(std::move(d));
    }
    return all;
}

std::uint64_t circuit_memory_bytes(const JobTree &job, int dense_cap) {
    std::uint64_t largest_dense = 0;
    for (const TimeStep &ts : job.circuit.steps) {
        for (const GateSpec &g : ts.gates) {
            if (g.kind == GateKind::Exp && g.exp.order == kExactOrder) {
                const int m = static_cast<int>(g.targets.size());
                if (m <= dense_cap) {
                    // Hamiltonian plus its eigenvector matrix.
                    largest_dense = std::max(largest_dense, sat_mul(2, dense_bytes(m)));
                }
            }
        }
    }
    return sat_add(state_bytes(job.n_qubits), largest_dense);
}

std::uint64_t circuit_est_ops(const JobTree &job) {
    std::uint64_t ops = 0;
    const std::uint64_t dim = pow2(job.n_qubits);
    for (const TimeStep &ts : job.circuit.steps) {
        for (const GateSpec &g : ts.gates) {
            std::uint64_t k = g.support().size();
            std::uint64_t per = sat_mul(dim, pow2(static_cast<int>(std::min<std::uint64_t>(k, 20))));
            if (g.kind == GateKind::QFT || g.kind == GateKind::InvQFT) {
                per = sat_mul(dim, std::max<std::uint64_t>(k, 1));
            } else if (g.kind == GateKind::Grover) {
                per = sat_mul(sat_mul(dim, 2), static_cast<std::uint64_t>(std::max(g.iterations, 1)));
            } else if (g.kind == GateKind::Exp) {
                const std::uint64_t terms = k * (k + 1) / 2;
                per = sat_mul(sat_mul(sat_mul(dim, 4), terms), static_cast<std::uint64_t>(g.exp.slices));
            }
            ops = sat_add(ops, per);
        }
    }
    return ops;
}

EnginePlan configure(const JobTree &job, const Limits &limits) {
    if (job.type == JobType::SpectrumFull && job.n_qubits > limits.dense_cap) {
        throw ResourceError("spectrum-full on " + std::to_string(job.n_qubits) +
                            " qubits exceeds the dense limit of " + std::to_string(limits.dense_cap) +
                            " qubits; use spectrum-margins");
    }
    if (job.type == JobType::Circuit && limits.preference == Preference::Matrix) {
        if (job.n_qubits > limits.matrix_cap) {
            throw ResourceError("matrix engine is limited to " + std::to_string(limits.matrix_cap) + " qubits");
        }
        if (has_exp(job)) {
            throw InputError("matrix engine does not execute EXP gates");
        }
    }
    for (const EngineDescriptor &d : registered_engines()) {
        if (!d.accepts(job, limits)) {
            continue;
        }
        EnginePlan plan;
        plan.engine_id = d.id;
        plan.memory_bytes = d.memory_bytes(job, limits);
        plan.est_ops = d.est_ops(job);
        plan.est_seconds = static_cast<double>(plan.est_ops) / std::max(limits.ops_per_second, 1.0);
        plan.workers = std::max(limits.workers, 1);
        if (job.type == JobType::Circuit) {
            for (std::size_t s = 0; s < job.circuit.steps.size(); ++s) {
                for (const GateSpec &g : job.circuit.steps[s].gates) {
                    if (g.kind == GateKind::Exp && g.exp.order == kExactOrder &&
                        static_cast<int>(g.targets.size()) > limits.dense_cap) {
                        plan.warnings.push_back("step " + std::to_string(s + 1) +
                                                ": exact EXP above the dense limit runs as order 2");
                    }
                }
            }
        }
        if (plan.memory_bytes > limits.memory_cap) {
            throw ResourceError(std::to_string(plan.memory_bytes) + " bytes required, memory cap is " +
                                std::to_string(limits.memory_cap) + " bytes");
        }
        return plan;
    }
    throw ResourceError("no engine accepts this job");
}

std::uint64_t resolve_seed(const JobTree &job, const RunOptions &options) {
    if (options.seed) {
        return *options.seed;
    }
    if (job.options.seed) {
        return *job.options.seed;
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

RunOutcome run(const JobTree &job, const EnginePlan &plan, const Limits &limits, const RunOptions &options) {
    for (const EngineDescriptor &d : registered_engines()) {
        if (d.id == plan.engine_id) {
            set_worker_count(plan.workers);
            return d.create()->execute(job, plan, limits, options);
        }
    }
    throw InputError("unknown engine '" + plan.engine_id + "'");
}

double calibrate_throughput(double budget_seconds) {
    constexpr int n = 16;
    StateVector state = StateVector::basis(n, 0);
    const GateSpec h = gate::single(GateKind::H, 1);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    std::uint64_t touched = 0;
    double elapsed = 0.0;
    int q = 1;
    do {
        GateSpec g = h;
        g.targets = {QubitIndex{q}};
        apply_gate(state, g);
        touched += 2 * state.dim();
        q = q % n + 1;
        elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < budget_seconds);
    return static_cast<double>(touched) / std::max(elapsed, 1e-9);
}

}  // namespace qmlsim::engine
