#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace escape {

// Exact arithmetic everywhere: rationals are GMP rationals, integers are GMP
// integers.  No floating point is used in any decision the engine makes.
using Rat = mpq_class;
using Int = mpz_class;

// Parses "p/q" or "p" (optionally signed) into a canonical rational.
// Throws ParseError on malformed input or zero denominator.
Rat parse_rational(std::string_view text);

// Renders canonically: "p/q", or just "p" when q == 1.
std::string rat_str(const Rat& value);

// value^exponent for possibly negative exponents; value must be nonzero when
// exponent < 0.
Rat rat_pow(const Rat& value, long exponent);

// base^exponent as an exact integer.
Int int_pow(unsigned long base, unsigned long exponent);
Int int_pow(const Int& base, unsigned long exponent);

// Exact floor/ceil of a rational.
Int rat_floor(const Rat& value);
Int rat_ceil(const Rat& value);

// 2^-bits as an exact rational (bits >= 0).
Rat pow2_inv(unsigned long bits);

} // namespace escape
