#pragma once

#include "escape/game.hpp"
#include "escape/report.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace escape::sqfree {

using Symbol = uint32_t;

// Per-position allowed-symbol oracle.  The prefix parameter makes
// prefix-dependent (dynamic) assignments possible; it always has length
// exactly `pos` and may be hypothetical (the caller probing a future
// position).  Implementations must be deterministic in (pos, prefix).
// An empty return means the position lies outside the assignment's domain
// (e.g. past the end of a list file); generation cannot proceed there and
// obstruction probes treat such positions as impossible to complete.
class ListAssignment {
public:
    virtual ~ListAssignment() = default;
    virtual int arity() const = 0;
    virtual std::vector<Symbol> list_at(size_t pos,
                                        std::span<const Symbol> prefix) const = 0;
    // True when list_at ignores the prefix; lets the generator cache rows
    // by position instead of re-asking per probe.
    virtual bool prefix_independent() const { return false; }
};

// Fixed table of rows; ignores the prefix.
class StaticAssignment final : public ListAssignment {
public:
    explicit StaticAssignment(std::vector<std::vector<Symbol>> rows);
    int arity() const override { return arity_; }
    std::vector<Symbol> list_at(size_t pos,
                                std::span<const Symbol>) const override {
        if (pos >= rows_.size())
            return {};
        return rows_[pos];
    }
    bool prefix_independent() const override { return true; }
    size_t domain_size() const { return rows_.size(); }

private:
    std::vector<std::vector<Symbol>> rows_;
    int arity_;
};

// Reproducible pseudo-random static assignment over symbols [0, sigma).
// Row p is drawn from the splitmix64 stream with state seed ^ (p+1):
// repeatedly take the next output mod sigma, keeping first-seen symbols
// until `arity` distinct ones accumulate.  Seeding per position makes the
// oracle order-independent and unbounded.
class RandomAssignment final : public ListAssignment {
public:
    RandomAssignment(uint64_t seed, uint32_t sigma, int arity = 4);
    int arity() const override { return arity_; }
    std::vector<Symbol> list_at(size_t pos,
                                std::span<const Symbol>) const override;
    bool prefix_independent() const override { return true; }

private:
    uint64_t seed_;
    uint32_t sigma_;
    int arity_;
};

// Child indices for the suffix w[start..|w|) re-read at target positions
// |w|..|w|+len-1, or nothing when some symbol is missing from its target
// list (the square is impossible there).  `scratch` must hold w and have
// room to grow; it is restored to length |w| before returning.
std::optional<game::Path> translate_suffix(const ListAssignment& lists,
                                           std::vector<Symbol>& scratch,
                                           size_t word_len, size_t start);

// One explicit obstruction per translatable nonempty suffix of w.
game::AliceMove make_move(const ListAssignment& lists,
                          std::span<const Symbol> w);

// Adversary for the generic engine; reconstructs its word from Bob's path.
class SquarefreeAdversary final : public game::Adversary {
public:
    explicit SquarefreeAdversary(const ListAssignment& lists)
        : lists_(&lists) {}
    game::AliceMove next_move(std::span<const uint8_t> path) override;
    std::span<const Symbol> word() const { return word_; }

private:
    const ListAssignment* lists_;
    std::vector<Symbol> word_;
};

// Reference generator on the generic engine (exact but slower; used for
// cross-checking and paranoid runs).
std::vector<Symbol> generate_reference(const ListAssignment& lists,
                                       size_t length,
                                       game::EngineOptions opts = {});

// Production generator with dyadic per-child accumulators; produces exactly
// the same word as generate_reference.
std::vector<Symbol> generate(const ListAssignment& lists, size_t length);

struct SquareHit {
    size_t start;
    size_t half_len; // |u| for the square uu
};

struct SquarefreeReport {
    std::vector<SquareHit> hits;
    bool ok() const { return hits.empty(); }
    nlohmann::json to_json() const;
};

// Reports every (start, half_len) with w[start..start+n) = w[start+n..start+2n).
SquarefreeReport verify_squarefree(std::span<const Symbol> word);

// First position whose symbol is not in its list, if any.
std::optional<size_t> first_list_violation(std::span<const Symbol> word,
                                           const ListAssignment& lists);

} // namespace escape::sqfree
