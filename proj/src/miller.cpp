#include "escape/miller.hpp"

#include <algorithm>

namespace escape::miller {

Rat certify(const MillerSpec& spec) {
    if (spec.alphabet < 2)
        throw ParseError("miller: alphabet size must be at least 2");
    Rat omega(0);
    for (const auto& f : spec.forbidden) {
        if (f.empty())
            throw ParseError("miller: forbidden words must be nonempty");
        for (uint8_t s : f)
            if (s >= spec.alphabet)
                throw ParseError("miller: forbidden word uses symbol " +
                                 std::to_string(int(s)) +
                                 " outside alphabet of size " +
                                 std::to_string(spec.alphabet));
        omega += rat_pow(spec.beta, -static_cast<long>(f.size()));
    }
    if (!game::check_condition(spec.alphabet, spec.beta, omega))
        throw NotCertified("miller: beta*(1+omega) <= alphabet fails: beta=" +
                           rat_str(spec.beta) + ", omega=" + rat_str(omega) +
                           ", alphabet=" + std::to_string(spec.alphabet));
    return omega;
}

game::AliceMove make_move(const MillerSpec& spec) {
    game::AliceMove move;
    move.additions.reserve(spec.forbidden.size());
    for (const auto& f : spec.forbidden)
        move.additions.push_back(game::Obstruction::explicit_path(f));
    return move;
}

std::vector<uint8_t> generate(const MillerSpec& spec, size_t length,
                              game::EngineOptions opts) {
    Rat omega = certify(spec);
    game::Engine engine({spec.alphabet, spec.beta, omega}, opts);
    MillerAdversary alice(spec);
    return engine.run(alice, length);
}

FactorReport verify_factors(
    std::span<const uint8_t> word,
    const std::vector<std::vector<uint8_t>>& forbidden) {
    FactorReport report;
    for (size_t fi = 0; fi < forbidden.size(); ++fi) {
        const auto& f = forbidden[fi];
        if (f.empty() || f.size() > word.size())
            continue;
        for (size_t p = 0; p + f.size() <= word.size(); ++p)
            if (std::equal(f.begin(), f.end(), word.begin() + p))
                report.hits.push_back({p, fi});
    }
    std::sort(report.hits.begin(), report.hits.end(),
              [](const FactorHit& a, const FactorHit& b) {
                  return a.position != b.position ? a.position < b.position
                                                  : a.factor_index < b.factor_index;
              });
    return report;
}

nlohmann::json FactorReport::to_json() const {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& h : hits)
        violations.push_back(
            {{"position", h.position}, {"factor_index", h.factor_index}});
    return report_envelope(std::move(violations));
}

} // namespace escape::miller
