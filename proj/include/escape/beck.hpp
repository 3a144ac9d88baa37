#pragma once

#include "escape/game.hpp"
#include "escape/report.hpp"

#include <span>
#include <vector>

namespace escape::beck {

// Keep equal length-n factors (n >= N) at distance >= c^n.
struct BeckParams {
    Rat c;     // separation base, rational in (1, 2)
    Rat beta;  // game base, in (c, 2)
    int N = 1; // shortest protected factor length
    Rat omega; // per-move budget: tail (c/beta)^N / (1 - c/beta)
};

// Validates 1 < c < beta < 2 and beta*(1+tail(N)) <= 2, exactly.
BeckParams certify(const Rat& c, const Rat& beta, int N);

// Smallest N >= 1 whose tail certifies (exists since tail -> 0).
int min_N(const Rat& c, const Rat& beta);

// The length-n word that, placed at the current position |w|, would replicate
// the factor starting at i: e[t] = w[i+t] while that lands inside w, after
// that it wraps onto e itself (i+t-|w| < t, so the value is already known).
std::vector<uint8_t> reconstruct_overlap(std::span<const uint8_t> w, size_t i,
                                         size_t n);

// One obstruction per start position i: depth n_i = smallest n >= N with
// c^n > |w|-i; deeper repeats live inside this subtree and need no entry.
game::AliceMove make_move(std::span<const uint8_t> w, const BeckParams& params);

class BeckAdversary final : public game::Adversary {
public:
    explicit BeckAdversary(const BeckParams& params) : params_(&params) {}
    game::AliceMove next_move(std::span<const uint8_t> path) override {
        return make_move(path, *params_);
    }

private:
    const BeckParams* params_;
};

std::vector<uint8_t> generate(const BeckParams& params, size_t length,
                              game::EngineOptions opts = {});

struct SeparationHit {
    size_t i;
    size_t j;
    size_t n; // minimal protected length violated by this pair
};

struct SeparationReport {
    std::vector<SeparationHit> hits;
    bool ok() const { return hits.empty(); }
    nlohmann::json to_json() const;
};

// A pair i < j violates iff lce(i, j) >= max(N, smallest n with c^n > j-i);
// scanned per distance d = j-i along common-extension runs.
SeparationReport verify_separation(std::span<const uint8_t> bits, const Rat& c,
                                   int N);

} // namespace escape::beck
