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

#ifndef QMLSIM_ENGINE_H
#define QMLSIM_ENGINE_H

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmlsim/observables.h"
#include "qmlsim/qml.h"
#include "qmlsim/solvers.h"

namespace qmlsim::engine {

inline constexpr int kMatrixCapQubits = 8;

enum class Preference { Auto, State, Matrix };

struct Limits {
    std::uint64_t memory_cap = default_memory_cap();
    int dense_cap = kDenseCapQubits;
    int matrix_cap = kMatrixCapQubits;
    int workers = 1;
    Preference preference = Preference::Auto;
    double ops_per_second = 1e9;
};

struct EnginePlan {
    std::string engine_id;  // state-engine | matrix-engine | spectrum-dense | spectrum-lanczos
    std::uint64_t memory_bytes = 0;
    std::uint64_t est_ops = 0;
    double est_seconds = 0.0;
    int workers = 1;
    std::vector<std::string> warnings;
};

/// Called after every completed step.
using ProgressCallback = std::function<void(const StepRecord &record, std::size_t total_steps)>;

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the job's seed
    ProgressCallback progress;
};

struct RunOutcome {
    std::optional<Trace> trace;
    std::optional<Spectrum> spectrum;
    std::optional<StateVector> final_state;
    std::optional<Matrix> unitary;  // matrix engine, measurement-free circuits only
};

class Engine {
   public:
    virtual ~Engine() = default;
    virtual RunOutcome execute(const qml::JobTree &job, const EnginePlan &plan, const Limits &limits,
                               const RunOptions &options) = 0;
};

/// Capability descriptor: an engine is eligible when `accepts` holds; the
/// first eligible registration wins.
struct EngineDescriptor {
    std::string id;
    std::function<bool(const qml::JobTree &, const Limits &)> accepts;
    std::function<std::uint64_t(const qml::JobTree &, const Limits &)> memory_bytes;
    std::function<std::uint64_t(const qml::JobTree &)> est_ops;
    std::function<std::unique_ptr<Engine>()> create;
};

/// Adds an engine ahead of the built-in ones.
void register_engine(EngineDescriptor descriptor);
std::vector<EngineDescriptor> registered_engines();

/// Pure function of (job, limits). Throws ResourceError when the estimate
/// exceeds limits.memory_cap or no engine can take the job.
EnginePlan configure(const qml::JobTree &job, const Limits &limits);

/// Runs the job on the engine named by the plan. Errors carry the step index.
RunOutcome run(const qml::JobTree &job, const EnginePlan &plan, const Limits &limits, const RunOptions &options = {});

/// Seed actually used for a run: explicit override, job seed, or fresh entropy.
std::uint64_t resolve_seed(const qml::JobTree &job, const RunOptions &options);

/// Amplitude touches per second of the single-qubit kernel on this host.
double calibrate_throughput(double budget_seconds = 0.05);

std::uint64_t circuit_memory_bytes(const qml::JobTree &job, int dense_cap = kDenseCapQubits);
std::uint64_t circuit_est_ops(const qml::JobTree &job);

}  // namespace qmlsim::engine

#endif
