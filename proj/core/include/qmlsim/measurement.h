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

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qmlsim/statevec.h"

namespace qmlsim {

/// Seeded generator owned by one job run. Uniform draws take the top 53 bits
/// of std::mt19937_64, which the standard fixes bit-for-bit, so traces replay
/// identically on any conforming platform.
class Rng {
   public:
    static constexpr std::string_view kAlgorithm = "mt19937_64/top53-v1";

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {
    }

    /// Uniform in [0, 1).
    double uniform() {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const noexcept {
        return seed_;
    }
    /// Draws consumed so far; together with the seed this is a checkpoint.
    std::uint64_t draws() const noexcept {
        return draws_;
    }

   private:
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
};

struct MeasurementRecord {
    int step = 0;
    std::vector<QubitIndex> targets;
    std::uint64_t outcome = 0;  // bits over targets, targets[0] most significant
    double probability = 0.0;   // pre-collapse marginal of the outcome
    std::uint64_t rng_draw = 0;  // index of the uniform draw that chose it

    /// Outcome as a '0'/'1' string in target order.
    std::string bits() const;

    friend bool operator==(const MeasurementRecord &, const MeasurementRecord &) = default;
};

/// Marginal probabilities of every outcome on `targets`, indexed like
/// MeasurementRecord::outcome.
std::vector<double> outcome_probabilities(const StateVector &state, std::span<const QubitIndex> targets);

/// Projective computational-basis measurement. One uniform draw u picks the
/// first outcome (ascending bit order) whose cumulative marginal exceeds u;
/// the state collapses onto it and is renormalized. Throws NumericError if
/// the chosen outcome has probability below 1e-300.
MeasurementRecord measure(StateVector &state, std::span<const QubitIndex> targets, Rng &rng, int step = 0);

}  // namespace qmlsim
