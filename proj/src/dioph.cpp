#include "escape/dioph.hpp"

#include "escape/errors.hpp"
#include "escape/wordio.hpp"

#include <algorithm>
#include <bit>

namespace escape::dioph {

namespace {

// Octave index j with t in (2^j, 2^(j+1)]; j = -1 exactly for t = 1.
int octave_of(uint64_t t) {
    return t == 1 ? -1 : std::bit_width(t - 1) - 1;
}

} // namespace

int DenominatorSet::octave_bound() const {
    int best = 0;
    size_t i = 0;
    while (i < members.size()) {
        const int j = octave_of(members[i]);
        size_t span = 1;
        while (i + span < members.size() &&
               octave_of(members[i + span]) == j)
            ++span;
        best = std::max(best, static_cast<int>(span));
        i += span;
    }
    return best;
}

DenominatorSet DenominatorSet::from_members(std::vector<uint64_t> members) {
    for (size_t i = 0; i < members.size(); ++i) {
        if (members[i] == 0)
            throw ParseError("denominators must be positive");
        if (i > 0 && members[i] <= members[i - 1])
            throw ParseError("denominators must be strictly ascending");
    }
    return DenominatorSet{std::move(members)};
}

DenominatorSet DenominatorSet::pow2(int max_exp) {
    if (max_exp < 0 || max_exp > 62)
        throw ParseError("pow2 exponent must lie in [0, 62]");
    std::vector<uint64_t> members;
    members.reserve(static_cast<size_t>(max_exp) + 1);
    for (int e = 0; e <= max_exp; ++e)
        members.push_back(1ull << e);
    return DenominatorSet{std::move(members)};
}

DenominatorSet DenominatorSet::fibonacci(uint64_t limit) {
    if (limit < 1)
        throw ParseError("fibonacci limit must be >= 1");
    std::vector<uint64_t> members;
    uint64_t a = 1, b = 2;
    while (a <= limit) {
        members.push_back(a);
        const uint64_t next = a + b;
        a = b;
        b = next;
    }
    return DenominatorSet{std::move(members)};
}

DenominatorSet DenominatorSet::from_file(const std::string& path) {
    return from_members(wordio::read_denominator_file(path));
}

DiophParams make_params(int k, const Rat& beta, int C) {
    if (k < 3)
        throw ParseError("k must be >= 3, got " + std::to_string(k));
    if (beta <= 1 || beta >= 2)
        throw ParseError("beta must lie in (1, 2), got " + rat_str(beta));
    if (C < 1)
        throw ParseError("C must be >= 1, got " + std::to_string(C));
    DiophParams params;
    params.k = k;
    params.beta = beta;
    params.C = C;
    params.epsilon = pow2_inv(static_cast<unsigned>(k));
    params.omega = Rat(3 * C) * rat_pow(beta, -(k - 2));
    params.star_certified =
        beta + Rat(3 * C) * rat_pow(beta, -(k - 1)) <= 2;
    params.proof_certified = beta * (1 + params.omega) <= 2;
    return params;
}

bool interval_invalid(long level, const Int& index, uint64_t t,
                      const Rat& epsilon) {
    if (level < 0 || t == 0 || epsilon <= 0)
        throw std::invalid_argument("interval_invalid: bad arguments");
    const Int& en = epsilon.get_num();
    const Int& ed = epsilon.get_den();
    Int t_int(static_cast<unsigned long>(t));

    // Common denominator 2^level * ed for both window ends.
    Int shifted_eps;
    mpz_mul_2exp(shifted_eps.get_mpz_t(), en.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(level));

    Int lo_num = t_int * index * ed - shifted_eps;
    Int hi_num = t_int * (index + 1) * ed + shifted_eps;
    Int denom;
    mpz_mul_2exp(denom.get_mpz_t(), ed.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(level));

    Int lo, hi;
    mpz_cdiv_q(lo.get_mpz_t(), lo_num.get_mpz_t(), denom.get_mpz_t());
    mpz_fdiv_q(hi.get_mpz_t(), hi_num.get_mpz_t(), denom.get_mpz_t());
    return hi >= lo;
}

DiophAdversary::DiophAdversary(const DenominatorSet& denoms,
                               const DiophParams& params)
    : denoms_(&denoms), params_(&params) {}

game::AliceMove DiophAdversary::next_move(std::span<const uint8_t> path) {
    if (path.size() < u_len_) { // replay from scratch (defensive)
        u_ = 0;
        u_len_ = 0;
    }
    for (size_t i = u_len_; i < path.size(); ++i) {
        u_ <<= 1;
        u_ += path[i];
    }
    u_len_ = path.size();

    game::AliceMove move;
    const long m = static_cast<long>(path.size());
    const int k = params_->k;
    const long j = m - 2; // octave served this move
    if (j < -1)
        return move;

    uint64_t lo = 1, hi = 1;
    if (j >= 0) {
        if (j > 62)
            return move; // beyond uint64 members
        lo = (1ull << j) + 1;
        hi = 1ull << (j + 1);
    }
    auto first = std::ranges::lower_bound(denoms_->members, lo);
    auto last = std::ranges::upper_bound(denoms_->members, hi);

    int emitted = 0;
    for (auto it = first; it != last; ++it) {
        const uint64_t t = *it;
        Int t_int(static_cast<unsigned long>(t));

        // At most one integer z can satisfy |u/2^m - z/t| <= eps/t + 1/2^m
        // inside this octave; find it with exact dyadic arithmetic.
        Int pow_m;
        mpz_ui_pow_ui(pow_m.get_mpz_t(), 2, static_cast<unsigned long>(m));
        Int tu_scaled;
        mpz_mul_2exp(tu_scaled.get_mpz_t(), Int(t_int * u_).get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k));
        Int tu1_scaled;
        mpz_mul_2exp(tu1_scaled.get_mpz_t(),
                     Int(t_int * (u_ + 1)).get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k));

        Int z_lo, z_hi;
        Int lo_num = tu_scaled - pow_m;
        Int hi_num = tu1_scaled + pow_m;
        mpz_cdiv_q_2exp(z_lo.get_mpz_t(), lo_num.get_mpz_t(),
                        static_cast<mp_bitcnt_t>(m + k));
        mpz_fdiv_q_2exp(z_hi.get_mpz_t(), hi_num.get_mpz_t(),
                        static_cast<mp_bitcnt_t>(m + k));
        if (z_hi > z_lo)
            throw InvariantBroken("gap lemma violated: two multiples of 1/" +
                                  std::to_string(t) + " in one window");
        if (z_lo > z_hi)
            continue;

        // Stripe [(z-eps)/t, (z+eps)/t] resolved at level L = m + k - 2.
        const Int& z = z_lo;
        Int z_scaled;
        mpz_mul_2exp(z_scaled.get_mpz_t(), z.get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k));
        Int div;
        mpz_mul_2exp(div.get_mpz_t(), t_int.get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k));
        const mp_bitcnt_t L = static_cast<mp_bitcnt_t>(m + k - 2);
        Int s1_num, s2_num;
        mpz_mul_2exp(s1_num.get_mpz_t(), Int(z_scaled - 1).get_mpz_t(), L);
        mpz_mul_2exp(s2_num.get_mpz_t(), Int(z_scaled + 1).get_mpz_t(), L);
        Int a_min, a_max;
        mpz_cdiv_q(a_min.get_mpz_t(), s1_num.get_mpz_t(), div.get_mpz_t());
        a_min -= 1;
        mpz_fdiv_q(a_max.get_mpz_t(), s2_num.get_mpz_t(), div.get_mpz_t());

        Int clip_lo, clip_hi;
        mpz_mul_2exp(clip_lo.get_mpz_t(), u_.get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k - 2));
        mpz_mul_2exp(clip_hi.get_mpz_t(), Int(u_ + 1).get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k - 2));
        clip_hi -= 1;
        if (a_min < clip_lo)
            a_min = clip_lo;
        if (a_max > clip_hi)
            a_max = clip_hi;

        int per_t = 0;
        for (Int a = a_min; a <= a_max; a += 1) {
            if (++per_t > 3)
                throw LemmaViolated("stripe for t=" + std::to_string(t) +
                                    " covers more than 3 subintervals");
            Int rel = a - clip_lo;
            if (!rel.fits_ulong_p())
                throw InvariantBroken("relative subinterval out of range");
            const unsigned long bits = rel.get_ui();
            game::Path obstruction(static_cast<size_t>(k - 2));
            for (int b = 0; b < k - 2; ++b)
                obstruction[static_cast<size_t>(b)] =
                    static_cast<uint8_t>((bits >> (k - 3 - b)) & 1);
            move.additions.push_back(
                game::Obstruction::explicit_path(std::move(obstruction)));
            ++emitted;
        }
        if (emitted > 3 * params_->C)
            throw LemmaViolated("move emits more than 3C obstructions");
    }
    max_per_move_ = std::max(max_per_move_, emitted);
    return move;
}

std::vector<uint8_t> generate_theta(const DenominatorSet& denoms,
                                    const DiophParams& params, size_t nbits,
                                    game::EngineOptions opts) {
    if (!params.star_certified)
        throw NotCertified(
            "beta + 3C*beta^-(k-1) <= 2 fails (proof-form certified: " +
            std::string(params.proof_certified ? "yes" : "no") + ")");
    if (denoms.octave_bound() > params.C)
        throw NotCertified("denominator set packs " +
                           std::to_string(denoms.octave_bound()) +
                           " members in one octave, above C=" +
                           std::to_string(params.C));
    game::Engine engine({2, params.beta, std::nullopt}, opts);
    DiophAdversary adversary(denoms, params);
    return engine.run(adversary, nbits);
}

RegularityReport verify_regularity(std::span<const uint8_t> bits,
                                   const DenominatorSet& denoms, int k) {
    if (k < 3)
        throw ParseError("k must be >= 3");
    RegularityReport report;
    const long n = static_cast<long>(bits.size());
    Int a = 0;
    for (uint8_t bit : bits) {
        if (bit > 1)
            throw ParseError("bits must be 0/1");
        a <<= 1;
        a += bit;
    }
    const Rat eps = pow2_inv(static_cast<unsigned>(k));
    for (uint64_t t : denoms.members) {
        if (octave_of(t) + k > n)
            continue; // octave not yet resolved at this precision
        if (!interval_invalid(n, a, t, eps))
            continue;
        Int t_int(static_cast<unsigned long>(t));
        Int z_num;
        mpz_mul_2exp(z_num.get_mpz_t(), Int(t_int * a).get_mpz_t(),
                     static_cast<mp_bitcnt_t>(k));
        Int pow_n;
        mpz_ui_pow_ui(pow_n.get_mpz_t(), 2, static_cast<unsigned long>(n));
        z_num -= pow_n;
        Int z;
        mpz_cdiv_q_2exp(z.get_mpz_t(), z_num.get_mpz_t(),
                        static_cast<mp_bitcnt_t>(n + k));
        report.hits.push_back({t, z, t});
    }
    return report;
}

nlohmann::json RegularityReport::to_json() const {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& hit : hits) {
        nlohmann::json entry;
        entry["t"] = hit.t;
        if (hit.center_num.fits_slong_p())
            entry["center_num"] = hit.center_num.get_si();
        else
            entry["center_num"] = hit.center_num.get_str();
        entry["center_den"] = hit.center_den;
        violations.push_back(std::move(entry));
    }
    return report_envelope(std::move(violations));
}

} // namespace escape::dioph
