#pragma once

#include "escape/rational.hpp"

#include <cstdint>

namespace escape::advisor {

// Rational upper bound on e (truncated series plus a remainder bound).
Rat e_upper();

// Directed bounds on log2(C) at denominator 4096; exact when C is a power
// of two. Requires C >= 1.
Rat log2_upper(uint64_t C);
Rat log2_lower(uint64_t C);

// Smallest k >= 3 with 3 * e_upper * C * k <= 2^k.
int min_k(uint64_t C);

// Rational beta ~ (3C(k-1))^(1/k) on the 2^-28 grid, validated against
// beta + 3C*beta^-(k-1) <= 2 (nudged along the grid when the raw root
// narrowly misses).
Rat optimal_beta(uint64_t C, int k);

struct EpsilonResult {
    Rat eps;              // 2^-min_k(C)
    Rat reference;        // 1/(64 * C * log2_upper(C))
    bool meets_reference; // eps >= 1/(64 * C * log2_lower(C)), conservatively
};

// Requires C >= 2 (for C = 1 use min_k directly; log2(1) = 0 has no
// meaningful reference scale).
EpsilonResult epsilon_of_C(uint64_t C);

} // namespace escape::advisor
