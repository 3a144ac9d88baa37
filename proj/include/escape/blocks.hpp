#pragma once

#include "escape/game.hpp"
#include "escape/report.hpp"

#include <memory>
#include <span>
#include <vector>

namespace escape::blocks {

// Largest mismatch count still considered "too close": the obstruction
// protecting a length-n anchor covers Hamming distance d < (1/2-eps)*n,
// i.e. d <= mismatch_threshold(n, eps) = ceil((1/2-eps)*n) - 1 (may be -1).
long mismatch_threshold(long n, const Rat& eps);

// Cumulative binomial: |Hamming ball| = sum_{d=0}^{min(r,n)} C(n, d);
// zero when r < 0.
Int ball_count(long n, long r);

// Shared Pascal-style table of ball counts, grown row by row:
// S(n, r) = S(n-1, r) + S(n-1, r-1), rows clamped at min(n, max_r).
class BallTable {
public:
    explicit BallTable(long max_r);

    void ensure(long n); // rows 0..n become available
    long max_r() const { return max_r_; }

    // Exact S(n, r); requires ensure(n) and min(r, n) <= max_r.
    const Int& get(long n, long r) const;

private:
    long max_r_;
    Int zero_;
    std::vector<std::vector<Int>> rows_;
};

// Rational upper bound on exp(-x) for x in [0, 1]: alternating series
// truncated after an even-index (positive) term.
Rat exp_neg_upper(const Rat& x);

struct BlocksParams {
    Rat epsilon; // in (0, 1/2)
    Rat beta;    // in (1, 2)
    int N = 1;   // shortest protected block length
    Rat c_upper; // rational >= 2*exp(-2*eps^2) with c_upper < beta
    Rat omega;   // exact sum of ball weights for n in [N, M] plus a
                 // geometric tail sum_{n>M} (c_upper/beta)^n
    int M = 0;   // cutoff between the exact sum and the tail
};

// Certifies beta*(1+omega) <= 2 with omega as above. The Hoeffding bound
// S(n, T(n)) <= c_upper^n that justifies the tail is additionally checked
// exactly at n = M and n = M+1. M defaults to N+160.
BlocksParams certify(const Rat& epsilon, const Rat& beta, int N, int M = -1);

// Smallest N >= 1 that certifies; NotCertified if none up to `limit`.
BlocksParams certify_min_N(const Rat& epsilon, const Rat& beta,
                           int limit = 2048);

// Bundle tracking the Hamming ball around a suffix anchor: after `n - depth`
// engine descends, `consumed` mismatches are spent and the residual covers
// ball_count(depth, threshold - consumed) leaves.
class HammingBallState final : public game::BundleState {
public:
    HammingBallState(const BallTable* table,
                     std::shared_ptr<const std::vector<uint8_t>> anchor,
                     long threshold, long consumed, long depth);

    int depth() const override { return static_cast<int>(depth_); }
    Int multiplicity() const override;
    Int child_multiplicity(int child) const override;
    std::shared_ptr<const game::BundleState> split(int child) const override;
    std::string describe() const override;

    long threshold() const { return threshold_; }
    long consumed() const { return consumed_; }
    uint8_t anchor_bit_at(long offset) const; // offset from the ball's start

private:
    const BallTable* table_;
    std::shared_ptr<const std::vector<uint8_t>> anchor_;
    long threshold_;
    long consumed_;
    long depth_;
};

// One Hamming-ball bundle per anchor length n in [N, |w|].
game::AliceMove make_move(std::span<const uint8_t> w,
                          const BlocksParams& params, BallTable& table);

class BlocksAdversary final : public game::Adversary {
public:
    BlocksAdversary(const BlocksParams& params, BallTable& table)
        : params_(&params), table_(&table) {}
    game::AliceMove next_move(std::span<const uint8_t> path) override {
        return make_move(path, *params_, *table_);
    }

private:
    const BlocksParams* params_;
    BallTable* table_;
};

// Generic-engine run; the oracle the fast path is checked against.
std::vector<uint8_t> generate_reference(const BlocksParams& params,
                                        size_t length,
                                        game::EngineOptions opts = {});

// Aggregated run: balls with equal (remaining, budget, next-anchor-bit)
// are interchangeable, so per-child shares reduce to counting cells.
std::vector<uint8_t> generate(const BlocksParams& params, size_t length);

struct BlocksHit {
    size_t i; // start of the left block
    size_t n; // block length; blocks w[i..i+n) and w[i+n..i+2n)
};

struct BlocksReport {
    std::vector<BlocksHit> hits;
    bool ok() const { return hits.empty(); }
    nlohmann::json to_json() const;
};

// Reports every adjacent pair of length-n blocks (n >= N) whose Hamming
// distance falls below (1/2-eps)*n.
BlocksReport verify_blocks(std::span<const uint8_t> bits, const Rat& eps,
                           int N);

} // namespace escape::blocks
