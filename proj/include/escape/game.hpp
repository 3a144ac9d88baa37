#pragma once

#include "escape/errors.hpp"
#include "escape/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace escape::game {

// The restriction game on the infinite k-ary tree.  A vertex l levels below
// the walker's current position carries weight beta^-l.  Each turn the
// restricter (Alice) forbids a set of vertices of bounded total weight; the
// walker (Bob) then steps into a child whose subtree holds forbidden weight
// s with beta*s < 1, which keeps the total forbidden weight in his subtree
// below 1 forever and in particular keeps him off every forbidden vertex.

struct GameParams {
    int arity = 2;            // k
    Rat beta;                 // 1 < beta < arity
    std::optional<Rat> omega; // per-move weight budget, enforced when present
};

// True iff 1 < beta < k and beta*(1+omega) <= k, all compared exactly.
bool check_condition(int arity, const Rat& beta, const Rat& omega);

// Child indices from the current root; a forbidden vertex is named by the
// path to it.  Depth 0 (the root itself) is never allowed.
using Path = std::vector<uint8_t>;

// A symbolic family of forbidden vertices at a common depth, carried with an
// exact multiplicity instead of being enumerated.  Splitting into a child
// yields the sub-family one level down, or nullptr when no member of the
// family passes through that child.
class BundleState {
public:
    virtual ~BundleState() = default;
    virtual int depth() const = 0;        // levels below current root, >= 1
    virtual Int multiplicity() const = 0; // number of vertices represented, >= 1
    // Number of members inside `child`'s subtree, the child vertex itself
    // included.  For depth >= 2 this must equal split(child)->multiplicity()
    // without allocating the residual; at depth 1 it counts the members
    // sitting exactly at `child` (whose weight blocks that child, so split
    // is never reached there in legal play).
    virtual Int child_multiplicity(int child) const = 0;
    virtual std::shared_ptr<const BundleState> split(int child) const = 0;
    virtual std::string describe() const = 0; // for transcripts
};

struct Obstruction {
    Path path;                                 // explicit vertex (when bundle is null)
    std::shared_ptr<const BundleState> bundle; // symbolic family otherwise

    static Obstruction explicit_path(Path p) {
        Obstruction o;
        o.path = std::move(p);
        return o;
    }
    static Obstruction symbolic(std::shared_ptr<const BundleState> b) {
        Obstruction o;
        o.bundle = std::move(b);
        return o;
    }

    bool is_explicit() const { return bundle == nullptr; }
    int depth() const {
        return bundle ? bundle->depth() : static_cast<int>(path.size());
    }
    // multiplicity * beta^-depth; convenience for tests and reports.
    Rat weight(const Rat& beta) const;
};

struct AliceMove {
    std::vector<Obstruction> additions;
};

class Adversary {
public:
    virtual ~Adversary() = default;
    // path = the children Bob has chosen so far, from the original root.
    virtual AliceMove next_move(std::span<const uint8_t> path) = 0;
};

struct EngineOptions {
    // Recompute the total weight from scratch after every operation and
    // require exact equality with the incrementally tracked value.
    bool paranoid = false;
    // Drop explicit obstructions lying strictly below an explicit ancestor
    // (and incoming duplicates of such).  Off by default; the soundness
    // property is covered by tests.
    bool prune_subsumed = false;
    // When set, receives one line per completed step:
    //   "step <m>: forbid <path|bundle>, move <c>"
    std::vector<std::string>* transcript = nullptr;
};

class Engine {
public:
    explicit Engine(GameParams params, EngineOptions opts = {});

    // Alice's turn.  Explicit additions are deduplicated against the live
    // ledger (set semantics); bundles accumulate as a multiset.  The budget,
    // when declared, is checked against the weight of the move as submitted
    // (before deduplication).
    void apply_alice_move(const AliceMove& move);

    // Forbidden weight inside child c's subtree, at the current scale.
    Rat child_share(int c) const;
    std::vector<Rat> child_shares() const;

    // Least c with beta*child_share(c) < 1.  Throws NoSafeChild otherwise.
    int choose_child() const;

    // Bob steps into child c; the ledger is replaced by the residuals and
    // all surviving weights rescale by beta (a depth decrement).
    void descend(int c);

    // Convenience loop: alice move / choose / descend, `steps` times.
    std::vector<uint8_t> run(Adversary& alice, size_t steps);

    const GameParams& params() const { return params_; }
    size_t absolute_depth() const { return chosen_.size(); }
    std::span<const uint8_t> chosen_path() const { return chosen_; }
    const Rat& total_weight() const { return total_; }
    // Weight of the last applied move as submitted (before dedup).
    const Rat& last_move_weight() const { return last_move_weight_; }
    size_t ledger_size() const { return entries_.size(); }

    // From-scratch sum over the ledger; paranoid mode compares this with the
    // incremental total after every operation.
    Rat recompute_weight() const;

private:
    struct Entry {
        Path path;       // full path as submitted (explicit entries)
        uint32_t offset = 0; // consumed prefix length; rest() is the residual
        uint64_t hash = 0;   // end-anchored hash of rest(), explicit only
        std::shared_ptr<const BundleState> bundle;

        bool is_explicit() const { return bundle == nullptr; }
        std::span<const uint8_t> rest() const {
            return {path.data() + offset, path.size() - offset};
        }
        int depth() const {
            return bundle ? bundle->depth()
                          : static_cast<int>(path.size() - offset);
        }
    };

    // Accumulate per-(child, depth) multiplicities for one pass over the
    // ledger, then evaluate sum(count[d] * beta^-d) exactly.
    struct DepthCounts {
        std::vector<Int> by_depth; // index = depth, [1..D]
        void add(int depth, const Int& mult);
        void add_one(int depth);
    };
    Rat eval_depth_counts(const DepthCounts& counts) const;
    void ensure_pows(size_t d) const;

    bool is_duplicate(std::span<const uint8_t> rest, uint64_t hash) const;
    bool has_explicit_ancestor(std::span<const uint8_t> rest) const;
    void index_entry(uint32_t idx);
    void rebuild_index();
    void check_paranoid() const;
    void compute_shares() const;

    GameParams params_;
    EngineOptions opts_;
    std::vector<Entry> entries_;
    std::vector<uint8_t> chosen_;
    Rat total_;
    Rat last_move_weight_;

    // rest()-hash -> entry indices with that hash (explicit entries only).
    std::unordered_map<uint64_t, std::vector<uint32_t>> index_;

    // beta^j numerator/denominator power tables, grown on demand.
    mutable std::vector<Int> num_pows_, den_pows_;

    // Shares cached between choose_child and descend.
    mutable std::vector<Rat> shares_;
    mutable bool shares_valid_ = false;

    // Pending transcript text for the step in progress.
    std::string pending_forbid_;
};

// End-anchored hash of a residual path: position j counted from the far end,
// so consuming the front symbol just removes one term.  Used for ledger
// deduplication; equality is always confirmed on the raw symbols.
uint64_t rest_hash(std::span<const uint8_t> rest);
uint64_t rest_hash_drop_front(uint64_t h, uint8_t front, size_t rest_len);

std::string render_path(std::span<const uint8_t> path);

} // namespace escape::game
