#include "escape/beck.hpp"

#include "escape/errors.hpp"

#include <algorithm>
#include <tuple>

namespace escape::beck {

namespace {

bool c_in_range(const Rat& c) { return c > 1 && c < 2; }

void validate_bases(const Rat& c, const Rat& beta) {
    if (!c_in_range(c))
        throw NotCertified("separation base c must lie in (1, 2), got " +
                           rat_str(c));
    if (beta <= c || beta >= 2)
        throw NotCertified("beta must lie in (c, 2), got beta=" + rat_str(beta) +
                           " with c=" + rat_str(c));
}

Rat tail_bound(const Rat& c, const Rat& beta, int N) {
    Rat ratio = c / beta; // < 1 once validated
    return rat_pow(ratio, N) / (1 - ratio);
}

} // namespace

BeckParams certify(const Rat& c, const Rat& beta, int N) {
    validate_bases(c, beta);
    if (N < 1)
        throw NotCertified("N must be >= 1, got " + std::to_string(N));
    Rat omega = tail_bound(c, beta, N);
    if (beta * (1 + omega) > 2)
        throw NotCertified("beta*(1+omega) = " + rat_str(beta * (1 + omega)) +
                           " exceeds 2 for N=" + std::to_string(N));
    return BeckParams{c, beta, N, omega};
}

int min_N(const Rat& c, const Rat& beta) {
    validate_bases(c, beta);
    Rat ratio = c / beta;
    Rat budget = Rat(2) / beta - 1; // need tail(N) <= budget, budget > 0
    Rat tail = ratio / (1 - ratio); // tail(1)
    for (int n = 1;; ++n) {
        if (tail <= budget)
            return n;
        tail *= ratio;
        if (n > 1'000'000)
            throw InvariantBroken("min_N failed to converge"); // unreachable
    }
}

std::vector<uint8_t> reconstruct_overlap(std::span<const uint8_t> w, size_t i,
                                         size_t n) {
    std::vector<uint8_t> e(n);
    for (size_t t = 0; t < n; ++t)
        e[t] = (i + t < w.size()) ? w[i + t] : e[i + t - w.size()];
    return e;
}

game::AliceMove make_move(std::span<const uint8_t> w, const BeckParams& params) {
    game::AliceMove move;
    move.additions.reserve(w.size());

    // Walk i downward so the distance d = |w|-i grows and the minimal depth
    // n_i (smallest n >= N with c^n > d) only ever increases; the running
    // power of c is maintained as an exact numerator/denominator pair.
    const Int& cn = params.c.get_num();
    const Int& cd = params.c.get_den();
    int cur_n = params.N;
    Int cn_pow = int_pow(cn, static_cast<unsigned>(cur_n));
    Int cd_pow = int_pow(cd, static_cast<unsigned>(cur_n));
    for (size_t i = w.size(); i-- > 0;) {
        Int d(static_cast<unsigned long>(w.size() - i));
        while (cn_pow <= d * cd_pow) {
            ++cur_n;
            cn_pow *= cn;
            cd_pow *= cd;
        }
        move.additions.push_back(game::Obstruction::explicit_path(
            reconstruct_overlap(w, i, static_cast<size_t>(cur_n))));
    }
    std::ranges::reverse(move.additions); // present in i order
    return move;
}

std::vector<uint8_t> generate(const BeckParams& params, size_t length,
                              game::EngineOptions opts) {
    game::Engine engine({2, params.beta, params.omega}, opts);
    BeckAdversary adversary(params);
    return engine.run(adversary, length);
}

SeparationReport verify_separation(std::span<const uint8_t> bits, const Rat& c,
                                   int N) {
    if (!c_in_range(c))
        throw ParseError("separation base c must lie in (1, 2), got " +
                         rat_str(c));
    if (N < 1)
        throw ParseError("N must be >= 1");
    SeparationReport report;
    if (bits.size() < 2)
        return report;

    // thr[d] = max(N, smallest n with c^n > d), nondecreasing in d.
    const size_t max_d = bits.size() - 1;
    std::vector<size_t> thr(max_d + 1, 0);
    const Int& cn = c.get_num();
    const Int& cd = c.get_den();
    size_t cur_n = static_cast<size_t>(N);
    Int cn_pow = int_pow(cn, static_cast<unsigned>(cur_n));
    Int cd_pow = int_pow(cd, static_cast<unsigned>(cur_n));
    for (size_t d = 1; d <= max_d; ++d) {
        while (cn_pow <= Int(static_cast<unsigned long>(d)) * cd_pow) {
            ++cur_n;
            cn_pow *= cn;
            cd_pow *= cd;
        }
        thr[d] = cur_n;
    }

    for (size_t d = 1; d <= max_d; ++d) {
        // run = lce(i, i+d); a pair violates exactly when run >= thr[d].
        size_t run = 0;
        for (size_t i = bits.size() - d; i-- > 0;) {
            run = (bits[i] == bits[i + d]) ? run + 1 : 0;
            if (run >= thr[d])
                report.hits.push_back({i, i + d, thr[d]});
        }
    }
    std::ranges::sort(report.hits, [](const SeparationHit& a,
                                      const SeparationHit& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    return report;
}

nlohmann::json SeparationReport::to_json() const {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& hit : hits)
        violations.push_back({{"i", hit.i}, {"j", hit.j}, {"n", hit.n}});
    return report_envelope(std::move(violations));
}

} // namespace escape::beck
