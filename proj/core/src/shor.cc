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

#include "qmlsim/shor.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "qmlsim/errors.h"

namespace qmlsim::shor {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % n);
}

std::vector<std::uint64_t> prime_factors(std::uint64_t r) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p * p <= r; ++p) {
        if (r % p == 0) {
            out.push_back(p);
            while (r % p == 0) {
                r /= p;
            }
        }
    }
    if (r > 1) {
        out.push_back(r);
    }
    return out;
}

// Smallest divisor r' of r with a^{r'} = 1, given a^r = 1.
std::uint64_t reduce_to_order(std::uint64_t a, std::uint64_t r, std::uint64_t n) {
    for (std::uint64_t p : prime_factors(r)) {
        while (r % p == 0 && modpow(a, r / p, n) == 1) {
            r /= p;
        }
    }
    return r;
}

}  // namespace

std::uint64_t modpow(std::uint64_t a, std::uint64_t e, std::uint64_t n) {
    if (n == 0) {
        throw InputError("modulus must be >= 1");
    }
    std::uint64_t result = 1 % n;
    std::uint64_t base = a % n;
    while (e > 0) {
        if (e & 1U) {
            result = mulmod(result, base, n);
        }
        base = mulmod(base, base, n);
        e >>= 1;
    }
    return result;
}

CFExpansion continued_fraction(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        throw InputError("continued fraction of a zero denominator");
    }
    CFExpansion cf;
    // p_{-1} = 1, p_{-2} = 0; q_{-1} = 0, q_{-2} = 1.
    unsigned __int128 p_prev = 1, p_prev2 = 0;
    unsigned __int128 q_prev = 0, q_prev2 = 1;
    std::uint64_t x = num;
    std::uint64_t y = den;
    while (y != 0) {
        const std::uint64_t a = x / y;
        cf.terms.push_back(a);
        const unsigned __int128 p = a * p_prev + p_prev2;
        const unsigned __int128 q = a * q_prev + q_prev2;
        cf.convergents.push_back({static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(q)});
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
        const std::uint64_t rem = x % y;
        x = y;
        y = rem;
    }
    return cf;
}

FactorResult extract_factors(std::uint64_t measured, int x_bits, std::uint64_t a, std::uint64_t n,
                             int multiple_bound) {
    if (x_bits < 1 || x_bits > 62) {
        throw InputError("x-register width must be in 1..62");
    }
    if (n < 2) {
        throw InputError("N must be >= 2");
    }
    if (multiple_bound < 1) {
        throw InputError("multiple bound must be >= 1");
    }
    const std::uint64_t den = std::uint64_t{1} << x_bits;
    if (measured >= den) {
        throw InputError("measured value does not fit the x-register");
    }
    FactorResult res;
    const std::uint64_t g = std::gcd(a % n, n);
    if (g > 1 && g < n) {
        res.success = true;
        res.method = "gcd-shortcut";
        res.p = std::min(g, n / g);
        res.q = std::max(g, n / g);
        return res;
    }
    if (g == n) {
        res.reason = "a is a multiple of N";
        return res;
    }

    std::set<std::uint64_t> seen_denominators;
    std::set<std::uint64_t> seen_orders;
    for (const Convergent &c : continued_fraction(measured, den).convergents) {
        if (c.q == 0 || c.q >= n || !seen_denominators.insert(c.q).second) {
            continue;
        }
        for (int m = 1; m <= multiple_bound; ++m) {
            const std::uint64_t r = c.q * static_cast<std::uint64_t>(m);
            res.candidates.push_back(r);
            if (modpow(a, r, n) != 1) {
                continue;
            }
            const std::uint64_t order = reduce_to_order(a, r, n);
            if (seen_orders.insert(order).second && order % 2 == 0) {
                const std::uint64_t h = modpow(a, order / 2, n);
                if (h != n - 1) {
                    const std::uint64_t f1 = std::gcd((h + n - 1) % n, n);
                    const std::uint64_t f2 = std::gcd((h + 1) % n, n);
                    if (f1 > 1 && f1 < n && f2 > 1 && f2 < n) {
                        res.success = true;
                        res.method = "period";
                        res.order = order;
                        res.denominator = c.q;
                        res.half_power = h;
                        res.p = std::min(f1, n / f1);
                        res.q = std::max(f1, n / f1);
                        return res;
                    }
                }
            }
            // Larger multiples reduce to the same order.
            break;
        }
    }
    res.reason = "no candidate period yields a nontrivial factor";
    return res;
}

}  // namespace qmlsim::shor
