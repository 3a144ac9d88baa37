#pragma once

#include "escape/game.hpp"
#include "escape/report.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace escape::dioph {

// Finite set of candidate denominators, strictly ascending and positive.
struct DenominatorSet {
    std::vector<uint64_t> members;

    // Largest number of members in one octave (2^j, 2^(j+1)], j >= -1
    // (the j = -1 octave is {1}).
    int octave_bound() const;

    static DenominatorSet from_members(std::vector<uint64_t> members);
    static DenominatorSet pow2(int max_exp);          // {1, 2, 4, ..., 2^max_exp}
    static DenominatorSet fibonacci(uint64_t limit);  // Fibonacci numbers <= limit
    static DenominatorSet from_file(const std::string& path);
};

struct DiophParams {
    int k = 3;           // window exponent, >= 3
    Rat beta;            // in (1, 2)
    int C = 1;           // octave bound the certificate covers
    Rat epsilon;         // 2^-k
    Rat omega;           // 3*C*beta^-(k-2), the lemma's per-move weight bound
    bool star_certified = false;  // beta + 3*C*beta^-(k-1) <= 2
    bool proof_certified = false; // beta*(1+omega) <= 2
};

// Fills in the derived fields; throws ParseError on out-of-range k/beta/C.
// Certification flags are reported, not enforced, here.
DiophParams make_params(int k, const Rat& beta, int C);

// True iff the closed dyadic interval [a/2^level, (a+1)/2^level] comes
// within epsilon/t of a multiple of 1/t: floor(t*(a+1)/2^level + eps) >=
// ceil(t*a/2^level - eps).
bool interval_invalid(long level, const Int& index, uint64_t t,
                      const Rat& epsilon);

class DiophAdversary final : public game::Adversary {
public:
    DiophAdversary(const DenominatorSet& denoms, const DiophParams& params);
    game::AliceMove next_move(std::span<const uint8_t> path) override;
    int max_obstructions_in_move() const { return max_per_move_; }

private:
    const DenominatorSet* denoms_;
    const DiophParams* params_;
    Int u_ = 0;          // integer holding the bits seen so far
    size_t u_len_ = 0;
    int max_per_move_ = 0;
};

// Binary expansion of a theta in [0, 1) with d(t*theta, Z) > 2^-k for every
// t in the set, provided every octave holds at most params.C members.
// Requires params.star_certified.
std::vector<uint8_t> generate_theta(const DenominatorSet& denoms,
                                    const DiophParams& params, size_t nbits,
                                    game::EngineOptions opts = {});

struct RegularityHit {
    uint64_t t;
    Int center_num;      // the multiple z with |theta - z/t| <= eps/t
    uint64_t center_den; // = t
};

struct RegularityReport {
    std::vector<RegularityHit> hits;
    bool ok() const { return hits.empty(); }
    nlohmann::json to_json() const;
};

// Checks the prefix interval of `bits` against every t whose octave fits
// entirely inside the resolved precision (octave j needs j + k <= |bits|).
RegularityReport verify_regularity(std::span<const uint8_t> bits,
                                   const DenominatorSet& denoms, int k);

} // namespace escape::dioph
