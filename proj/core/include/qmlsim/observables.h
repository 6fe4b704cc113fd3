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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qmlsim/measurement.h"
#include "qmlsim/statevec.h"

namespace qmlsim {

inline constexpr double kDefaultThreshold = 1e-4;

using BlochVector = std::array<double, 3>;

struct BasisEntry {
    std::uint64_t index = 0;
    double probability = 0.0;
    double phase = 0.0;  // in (-pi, pi]

    friend bool operator==(const BasisEntry &, const BasisEntry &) = default;
};

struct StepRecord {
    int step = 0;
    std::vector<BlochVector> bloch;  // row q-1 belongs to qubit q
    std::vector<BasisEntry> listing;
    double entropy = 0.0;
    std::vector<MeasurementRecord> measurements;

    friend bool operator==(const StepRecord &, const StepRecord &) = default;
};

struct Trace {
    std::string engine;
    std::string rng{Rng::kAlgorithm};
    std::uint64_t seed = 0;
    double threshold = kDefaultThreshold;
    std::vector<std::string> warnings;
    std::vector<StepRecord> records;

    friend bool operator==(const Trace &, const Trace &) = default;
};

/// (<sigma_x>, <sigma_y>, <sigma_z>) of qubit q, by strided traversal of the
/// amplitude pairs that differ only in that qubit.
BlochVector bloch_vector(const StateVector &state, QubitIndex q);

/// -sum |c_i|^2 log2 |c_i|^2 over the computational basis; probabilities
/// below 1e-300 contribute nothing.
double entropy(const StateVector &state);

/// arg(c) mapped to (-pi, pi]; exactly zero amplitudes have phase 0.
double phase_of(Complex c);

/// Basis states with |c_i|^2 >= threshold, by descending probability then
/// ascending index.
std::vector<BasisEntry> amplitude_listing(const StateVector &state, double threshold);

/// Full per-step record of a state (measurements are attached by the caller).
StepRecord observe(const StateVector &state, int step, double threshold);

}  // namespace qmlsim
