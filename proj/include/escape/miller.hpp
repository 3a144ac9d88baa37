#pragma once

#include "escape/game.hpp"
#include "escape/report.hpp"

#include <span>
#include <vector>

namespace escape::miller {

// Avoid a finite set of forbidden factors: the restricter re-forbids every
// f in F below the walker's position each turn, which costs exactly
// omega = sum beta^-|f| per move.
struct MillerSpec {
    int alphabet = 2;
    std::vector<std::vector<uint8_t>> forbidden; // nonempty words over [0, alphabet)
    Rat beta;
};

// Returns omega = sum beta^-|f| and checks beta*(1+omega) <= alphabet
// exactly.  Throws NotCertified when the inequality fails (it is sufficient,
// not necessary — the caller may retry with another beta) and ParseError when
// a forbidden word is empty or uses symbols outside the alphabet.
Rat certify(const MillerSpec& spec);

// One explicit obstruction per f in F; independent of the word built so far.
game::AliceMove make_move(const MillerSpec& spec);

class MillerAdversary final : public game::Adversary {
public:
    explicit MillerAdversary(const MillerSpec& spec) : spec_(&spec) {}
    game::AliceMove next_move(std::span<const uint8_t>) override {
        return make_move(*spec_);
    }

private:
    const MillerSpec* spec_;
};

// Word of `length` symbols over [0, alphabet) avoiding every f in F.
std::vector<uint8_t> generate(const MillerSpec& spec, size_t length,
                              game::EngineOptions opts = {});

struct FactorHit {
    size_t position;     // where the forbidden factor starts
    size_t factor_index; // index into the forbidden list
};

struct FactorReport {
    std::vector<FactorHit> hits;
    bool ok() const { return hits.empty(); }
    nlohmann::json to_json() const;
};

FactorReport verify_factors(std::span<const uint8_t> word,
                            const std::vector<std::vector<uint8_t>>& forbidden);

} // namespace escape::miller
