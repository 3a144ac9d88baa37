#include "escape/advisor.hpp"

#include "escape/errors.hpp"

#include <bit>

namespace escape::advisor {

namespace {

constexpr int kLogDenomBits = 12;  // log2 bounds on the 1/4096 grid
constexpr int kRootDenomBits = 28; // beta root search grid

// Largest p with p^k <= target, searched over [lo, hi].
Int int_root_floor(const Int& target, int k, Int lo, Int hi) {
    while (lo < hi) {
        Int mid = (lo + hi + 1) / 2;
        Int pow;
        mpz_pow_ui(pow.get_mpz_t(), mid.get_mpz_t(),
                   static_cast<unsigned long>(k));
        if (pow <= target)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

bool star_holds(const Rat& beta, uint64_t C, int k) {
    if (beta <= 1 || beta >= 2)
        return false;
    Rat coeff(Int(static_cast<unsigned long>(C)));
    coeff *= 3;
    return beta + coeff * rat_pow(beta, -(k - 1)) <= 2;
}

} // namespace

Rat e_upper() {
    static const Rat value = [] {
        // sum_{j=0}^{25} 1/j!  +  2/26!  >= e, since the dropped tail is
        // below twice its first term.
        Rat sum = 0;
        Rat term = 1;
        for (int j = 0; j <= 25; ++j) {
            sum += term;
            term /= j + 1;
        }
        return Rat(sum + 2 * term);
    }();
    return value;
}

Rat log2_upper(uint64_t C) {
    if (C == 0)
        throw ParseError("log2 bounds need C >= 1");
    if (std::has_single_bit(C))
        return Rat(std::bit_width(C) - 1);
    // C^4096 has exactly `bits` binary digits: 2^(bits-1) <= C^4096 < 2^bits,
    // and the left inequality is strict because C is not a power of two.
    Int pow;
    mpz_ui_pow_ui(pow.get_mpz_t(), static_cast<unsigned long>(C),
                  1ul << kLogDenomBits);
    const size_t bits = mpz_sizeinbase(pow.get_mpz_t(), 2);
    Rat bound(static_cast<unsigned long>(bits), 1ul << kLogDenomBits);
    bound.canonicalize();
    return bound;
}

Rat log2_lower(uint64_t C) {
    if (C == 0)
        throw ParseError("log2 bounds need C >= 1");
    if (std::has_single_bit(C))
        return Rat(std::bit_width(C) - 1);
    Int pow;
    mpz_ui_pow_ui(pow.get_mpz_t(), static_cast<unsigned long>(C),
                  1ul << kLogDenomBits);
    const size_t bits = mpz_sizeinbase(pow.get_mpz_t(), 2);
    Rat bound(static_cast<unsigned long>(bits - 1), 1ul << kLogDenomBits);
    bound.canonicalize();
    return bound;
}

int min_k(uint64_t C) {
    if (C == 0)
        throw ParseError("min_k needs C >= 1");
    const Rat lhs_base = 3 * e_upper() * Int(static_cast<unsigned long>(C));
    for (int k = 3;; ++k) {
        Int pow;
        mpz_ui_pow_ui(pow.get_mpz_t(), 2, static_cast<unsigned long>(k));
        if (lhs_base * k <= Rat(pow))
            return k;
        if (k > 100'000)
            throw InvariantBroken("min_k failed to converge"); // unreachable
    }
}

Rat optimal_beta(uint64_t C, int k) {
    if (C == 0)
        throw ParseError("optimal_beta needs C >= 1");
    if (k < 3 || k > 256)
        throw ParseError("optimal_beta needs k in [3, 256]");

    // Root of beta^k = 3C(k-1) on the grid p/2^28: largest p with
    // p^k <= 3C(k-1) * 2^(28k).
    Int target(static_cast<unsigned long>(C));
    target *= 3;
    target *= k - 1;
    if (target >= int_pow(Int(2), static_cast<unsigned>(k)))
        throw NotCertified("(3C(k-1))^(1/k) >= 2: no beta in range");
    Int scaled = target;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(kRootDenomBits) *
                     static_cast<mp_bitcnt_t>(k));
    const Int unit = Int(1) << kRootDenomBits;
    Int p = int_root_floor(scaled, k, unit, 2 * unit);

    // The grid step keeps beta^k within a 2^-20 relative window of 3C(k-1).
    Rat grid(Int(1), unit);
    grid.canonicalize();
    Rat beta(p, unit);
    beta.canonicalize();
    {
        Rat ratio = rat_pow(beta, k) / Rat(target);
        Rat slack = pow2_inv(20);
        if (ratio < 1 - slack || ratio > 1 + slack)
            throw InvariantBroken("root grid misses the beta^k window");
    }

    if (star_holds(beta, C, k))
        return beta;
    // The analytic minimum of beta + 3C*beta^-(k-1) sits at the root, so a
    // near-miss can only be a grid artifact; scan a few neighbors.
    for (int step = 1; step <= 64; ++step) {
        for (int sign : {-1, +1}) {
            Rat cand = beta + sign * step * grid;
            if (star_holds(cand, C, k))
                return cand;
        }
    }
    throw NotCertified("no beta on the grid satisfies the star condition "
                       "for C=" +
                       std::to_string(C) + ", k=" + std::to_string(k));
}

EpsilonResult epsilon_of_C(uint64_t C) {
    if (C < 2)
        throw ParseError("epsilon_of_C needs C >= 2");
    EpsilonResult result;
    result.eps = pow2_inv(static_cast<unsigned>(min_k(C)));
    result.reference =
        Rat(1) / (Rat(64) * Int(static_cast<unsigned long>(C)) *
                  log2_upper(C));
    result.meets_reference =
        result.eps >= Rat(1) / (Rat(64) * Int(static_cast<unsigned long>(C)) *
                                log2_lower(C));
    return result;
}

} // namespace escape::advisor
