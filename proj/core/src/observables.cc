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

#include "qmlsim/observables.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qmlsim/errors.h"

namespace qmlsim {

BlochVector bloch_vector(const StateVector &state, QubitIndex q) {
    const int n = state.num_qubits();
    if (q.value < 1 || q.value > n) {
        throw InputError("qubit " + std::to_string(q.value) + " out of range 1.." + std::to_string(n));
    }
    const int p = state.bit_of(q);
    const std::uint64_t bit = std::uint64_t{1} << p;
    const auto amps = state.amplitudes();
    const std::size_t pairs = amps.size() / 2;
    Complex coherence = 0.0;
    double z = 0.0;
    for (std::size_t b = 0; b < pairs; ++b) {
        const std::uint64_t low = b & (bit - 1);
        const std::uint64_t i0 = ((b >> p) << (p + 1)) | low;
        const Complex c0 = amps[i0];
        const Complex c1 = amps[i0 | bit];
        coherence += std::conj(c0) * c1;
        z += std::norm(c0) - std::norm(c1);
    }
    return {2.0 * coherence.real(), 2.0 * coherence.imag(), z};
}

double entropy(const StateVector &state) {
    double s = 0.0;
    for (const Complex &c : state.amplitudes()) {
        const double p = std::norm(c);
        if (p >= 1e-300) {
            s -= p * std::log(p);
        }
    }
    return s / std::numbers::ln2;
}

double phase_of(Complex c) {
    if (c.real() == 0.0 && c.imag() == 0.0) {
        return 0.0;
    }
    const double phi = std::arg(c);
    return phi <= -std::numbers::pi ? std::numbers::pi : phi;
}

std::vector<BasisEntry> amplitude_listing(const StateVector &state, double threshold) {
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw InputError("threshold must be in [0, 1)");
    }
    std::vector<BasisEntry> out;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (p >= threshold) {
            out.push_back({i, p, phase_of(amps[i])});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const BasisEntry &a, const BasisEntry &b) { return a.probability > b.probability; });
    return out;
}

StepRecord observe(const StateVector &state, int step, double threshold) {
    StepRecord r;
    r.step = step;
    r.bloch.reserve(static_cast<std::size_t>(state.num_qubits()));
    for (int q = 1; q <= state.num_qubits(); ++q) {
        r.bloch.push_back(bloch_vector(state, QubitIndex{q}));
    }
    r.listing = amplitude_listing(state, threshold);
    r.entropy = entropy(state);
    return r;
}

}  // namespace qmlsim
