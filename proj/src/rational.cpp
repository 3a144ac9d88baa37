#include "escape/rational.hpp"

#include "escape/errors.hpp"

namespace escape {

Rat parse_rational(std::string_view text) {
    if (text.empty())
        throw ParseError("empty rational");
    std::string s(text);
    mpq_t raw;
    mpq_init(raw);
    int rc = mpq_set_str(raw, s.c_str(), 10);
    if (rc != 0 || mpz_sgn(mpq_denref(raw)) == 0) {
        mpq_clear(raw);
        throw ParseError("malformed rational: '" + s + "'");
    }
    Rat out(raw);
    mpq_clear(raw);
    out.canonicalize();
    return out;
}

std::string rat_str(const Rat& value) {
    return value.get_str();
}

Rat rat_pow(const Rat& value, long exponent) {
    if (exponent == 0)
        return Rat(1);
    bool invert = exponent < 0;
    unsigned long e = invert ? static_cast<unsigned long>(-exponent)
                             : static_cast<unsigned long>(exponent);
    if (invert && value == 0)
        throw ParseError("rat_pow: zero base with negative exponent");
    Rat out;
    mpz_pow_ui(out.get_num_mpz_t(), value.get_num_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), value.get_den_mpz_t(), e);
    // num/den were coprime, so the powers are too; no canonicalization needed
    // beyond sign normalization.
    if (invert) {
        Rat flipped;
        mpq_inv(flipped.get_mpq_t(), out.get_mpq_t());
        return flipped;
    }
    return out;
}

Int int_pow(unsigned long base, unsigned long exponent) {
    Int out;
    mpz_ui_pow_ui(out.get_mpz_t(), base, exponent);
    return out;
}

Int int_pow(const Int& base, unsigned long exponent) {
    Int out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
    return out;
}

Int rat_floor(const Rat& value) {
    Int out;
    mpz_fdiv_q(out.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return out;
}

Int rat_ceil(const Rat& value) {
    Int out;
    mpz_cdiv_q(out.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return out;
}

Rat pow2_inv(unsigned long bits) {
    Rat out(1);
    mpz_mul_2exp(out.get_den_mpz_t(), out.get_den_mpz_t(), bits);
    return out;
}

} // namespace escape
