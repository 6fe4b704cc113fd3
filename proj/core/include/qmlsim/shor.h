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
#include <string>
#include <vector>

namespace qmlsim::shor {

/// a^e mod n by square-and-multiply with 128-bit intermediates. Throws
/// InputError for n == 0.
std::uint64_t modpow(std::uint64_t a, std::uint64_t e, std::uint64_t n);

struct Convergent {
    std::uint64_t p = 0;
    std::uint64_t q = 0;

    friend bool operator==(const Convergent &, const Convergent &) = default;
};

struct CFExpansion {
    std::vector<std::uint64_t> terms;  // [a0; a1, a2, ...]
    std::vector<Convergent> convergents;
};

/// Euclid expansion of num/den including a0 (0 for proper fractions). The
/// last term is > 1 whenever there is more than one term.
CFExpansion continued_fraction(std::uint64_t num, std::uint64_t den);

struct FactorResult {
    bool success = false;
    std::uint64_t p = 0;  // p <= q, p * q == N on success
    std::uint64_t q = 0;
    std::string method;           // "gcd-shortcut" or "period"
    std::uint64_t order = 0;      // r with a^r = 1 (mod N) used for the split
    std::uint64_t denominator = 0;  // convergent denominator that led to r
    std::uint64_t half_power = 0;   // a^{r/2} mod N
    std::vector<std::uint64_t> candidates;  // every r tried, in order
    std::string reason;                     // why it failed
};

/// Classical completion of period finding. For each convergent denominator q
/// of measured / 2^x_bits with q < N, the multiples q, 2q, ..., bound*q are
/// tried as periods. A multiple r with a^r = 1 (mod N) is first reduced to
/// the exact order of a (prime factors of r are stripped while a^{r/p} = 1);
/// if that order is even and a^{r/2} != -1 (mod N) the factors are
/// gcd(a^{r/2} - 1, N) and gcd(a^{r/2} + 1, N).
/// gcd(a, N) > 1 short-circuits before the measurement is consulted.
FactorResult extract_factors(std::uint64_t measured, int x_bits, std::uint64_t a, std::uint64_t n,
                             int multiple_bound = 64);

}  // namespace qmlsim::shor
