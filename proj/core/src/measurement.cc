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

#include "qmlsim/measurement.h"

#include <cmath>

#include "qmlsim/errors.h"

namespace qmlsim {

std::string MeasurementRecord::bits() const {
    std::string out;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        out.push_back(((outcome >> (targets.size() - 1 - t)) & 1U) ? '1' : '0');
    }
    return out;
}

std::vector<double> outcome_probabilities(const StateVector &state, std::span<const QubitIndex> targets) {
    const int n = state.num_qubits();
    check_targets(n, targets);
    std::vector<double> probs(std::size_t{1} << targets.size(), 0.0);
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        probs[detail::register_value(i, n, targets)] += std::norm(amps[i]);
    }
    return probs;
}

MeasurementRecord measure(StateVector &state, std::span<const QubitIndex> targets, Rng &rng, int step) {
    const int n = state.num_qubits();
    const std::vector<double> probs = outcome_probabilities(state, targets);
    MeasurementRecord rec;
    rec.step = step;
    rec.targets.assign(targets.begin(), targets.end());
    rec.rng_draw = rng.draws();
    const double u = rng.uniform();

    double cumulative = 0.0;
    std::size_t chosen = probs.size();
    std::size_t last_possible = probs.size();
    for (std::size_t o = 0; o < probs.size(); ++o) {
        if (probs[o] > 0.0) {
            last_possible = o;
        }
        cumulative += probs[o];
        if (u < cumulative && probs[o] > 0.0) {
            chosen = o;
            break;
        }
    }
    if (chosen == probs.size()) {
        // u fell past the rounded total; take the last reachable outcome.
        chosen = last_possible;
    }
    if (chosen == probs.size() || probs[chosen] < 1e-300) {
        throw NumericError("measurement projected onto an outcome of zero probability");
    }
    rec.outcome = chosen;
    rec.probability = probs[chosen];

    const double scale = 1.0 / std::sqrt(probs[chosen]);
    auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (detail::register_value(i, n, targets) == chosen) {
            amps[i] *= scale;
        } else {
            amps[i] = 0.0;
        }
    }
    return rec;
}

}  // namespace qmlsim
