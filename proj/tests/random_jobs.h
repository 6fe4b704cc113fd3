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

#ifndef QMLSIM_TESTS_RANDOM_JOBS_H
#define QMLSIM_TESTS_RANDOM_JOBS_H

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.h"
#include "qmlsim/gates.h"
#include "qmlsim/qml.h"

namespace testing_support {

/// Random measurement-free circuit job mixing fixed and scalable gate kinds.
/// Each step holds one or two gates on disjoint supports.
inline qmlsim::qml::JobTree random_circuit_job(int n, int gate_count, std::uint64_t seed) {
    using namespace qmlsim;
    std::mt19937_64 gen(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
    auto angle = [&]() { return std::uniform_real_distribution<double>(-3.0, 3.0)(gen); };

    qml::JobTree job;
    job.type = qml::JobType::Circuit;
    job.n_qubits = n;
    job.circuit.n_qubits = n;
    job.options.seed = seed;

    int placed = 0;
    while (placed < gate_count) {
        std::vector<int> free(n);
        std::iota(free.begin(), free.end(), 1);
        std::shuffle(free.begin(), free.end(), gen);
        auto take = [&](int k) {
            std::vector<int> out(free.end() - k, free.end());
            free.resize(free.size() - static_cast<std::size_t>(k));
            return out;
        };
        TimeStep step;
        const int per_step = std::min(pick(1, 2), gate_count - placed);
        for (int g = 0; g < per_step && !free.empty(); ++g) {
            const int avail = static_cast<int>(free.size());
            const int choice = pick(0, 17);
            GateSpec spec;
            if (choice <= 5) {
                static const GateKind kinds[] = {GateKind::H, GateKind::X, GateKind::Y,
                                                 GateKind::Z, GateKind::S, GateKind::T};
                spec = gate::single(kinds[choice], take(1)[0]);
            } else if (choice <= 7) {
                static const GateKind kinds[] = {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::Phase};
                spec = gate::single(kinds[pick(0, 3)], take(1)[0], angle());
            } else if (choice == 8 && avail >= 2) {
                const auto q = take(2);
                spec = gate::controlled(pick(0, 1) ? GateKind::CNOT : GateKind::CZ, {q[0]}, {q[1]});
            } else if (choice == 9 && avail >= 2) {
                const auto q = take(2);
                spec = gate::swap(q[0], q[1]);
            } else if (choice == 10 && avail >= 3) {
                const auto q = take(3);
                spec = pick(0, 1) ? gate::controlled(GateKind::Toffoli, {q[0], q[1]}, {q[2]})
                                  : gate::controlled(GateKind::Fredkin, {q[0]}, {q[1], q[2]});
            } else if (choice == 11) {
                spec = gate::custom(oracle::random_unitary(2, gen()), take(1));
            } else if (choice == 12 && avail >= 2) {
                spec = gate::custom(oracle::random_unitary(4, gen()), take(2));
            } else if (choice == 13 && avail >= 2) {
                spec = gate::qft(take(pick(2, std::min(avail, 4))), pick(0, 1) == 1);
            } else if (choice == 14 && avail >= 2) {
                const int k = pick(2, std::min(avail, 3));
                spec = gate::oracle(take(k), {static_cast<std::uint64_t>(pick(0, (1 << k) - 1))});
            } else if (choice == 15 && avail >= 2) {
                const int k = pick(2, std::min(avail, 3));
                spec = gate::grover_step(take(k), {static_cast<std::uint64_t>(pick(0, (1 << k) - 1))});
            } else if (choice == 16 && avail >= 3) {
                const int k = pick(2, std::min(avail, 3));
                spec = gate::grover(take(k), {static_cast<std::uint64_t>(pick(0, (1 << k) - 1))}, pick(1, 2));
            } else if (choice == 17 && avail >= 4) {
                const auto x = take(2);
                const auto y = take(2);
                spec = gate::modulo(static_cast<std::uint64_t>(pick(2, 4)), 3, x, y);
            } else {
                spec = gate::single(GateKind::H, take(1)[0]);
            }
            step.gates.push_back(std::move(spec));
            ++placed;
        }
        job.circuit.steps.push_back(std::move(step));
    }
    return job;
}

}  // namespace testing_support

#endif
