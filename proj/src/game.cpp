#include "escape/game.hpp"

#include <algorithm>

namespace escape::game {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Contribution of symbol `sym` at distance `pos_from_end` (1-based) from the
// residual's far end.  XORing the contributions of all residual symbols gives
// a hash that is stable when the front symbol is consumed on descent.
uint64_t term(size_t pos_from_end, uint8_t sym) {
    return splitmix64(pos_from_end * 131 + sym + 0x51ed2701);
}

} // namespace

uint64_t rest_hash(std::span<const uint8_t> rest) {
    uint64_t h = 0x2545f4914f6cdd1dULL;
    size_t n = rest.size();
    for (size_t j = 0; j < n; ++j)
        h ^= term(n - j, rest[j]);
    return h;
}

uint64_t rest_hash_drop_front(uint64_t h, uint8_t front, size_t rest_len) {
    return h ^ term(rest_len, front);
}

std::string render_path(std::span<const uint8_t> path) {
    std::string out;
    for (size_t i = 0; i < path.size(); ++i) {
        if (i)
            out += '.';
        out += std::to_string(int(path[i]));
    }
    return out;
}

bool check_condition(int arity, const Rat& beta, const Rat& omega) {
    if (arity < 2)
        return false;
    if (!(beta > 1 && beta < arity))
        return false;
    return beta * (1 + omega) <= arity;
}

Rat Obstruction::weight(const Rat& beta) const {
    Rat w = rat_pow(beta, -static_cast<long>(depth()));
    if (bundle)
        w *= Rat(bundle->multiplicity());
    return w;
}

Engine::Engine(GameParams params, EngineOptions opts)
    : params_(std::move(params)), opts_(opts), total_(0), last_move_weight_(0) {
    if (params_.arity < 2)
        throw NotCertified("engine: arity must be at least 2");
    if (!(params_.beta > 1 && params_.beta < params_.arity))
        throw NotCertified("engine: beta must satisfy 1 < beta < arity, got " +
                           rat_str(params_.beta));
    if (params_.omega &&
        !check_condition(params_.arity, params_.beta, *params_.omega))
        throw NotCertified("engine: beta*(1+omega) <= arity fails for beta=" +
                           rat_str(params_.beta) + ", omega=" +
                           rat_str(*params_.omega));
    num_pows_ = {Int(1)};
    den_pows_ = {Int(1)};
}

void Engine::DepthCounts::add(int depth, const Int& mult) {
    if (mult == 0)
        return;
    if (by_depth.size() <= static_cast<size_t>(depth))
        by_depth.resize(depth + 1);
    by_depth[depth] += mult;
}

void Engine::DepthCounts::add_one(int depth) {
    if (by_depth.size() <= static_cast<size_t>(depth))
        by_depth.resize(depth + 1);
    by_depth[depth] += 1;
}

void Engine::ensure_pows(size_t d) const {
    const Int& num = params_.beta.get_num();
    const Int& den = params_.beta.get_den();
    while (num_pows_.size() <= d) {
        num_pows_.push_back(num_pows_.back() * num);
        den_pows_.push_back(den_pows_.back() * den);
    }
}

// Exactly sum(count[d] * beta^-d) via an integer Horner pass: with
// beta = p/q, the sum equals (sum_d count[d] * q^d * p^(D-d)) / p^D.
Rat Engine::eval_depth_counts(const DepthCounts& counts) const {
    if (counts.by_depth.size() <= 1)
        return Rat(0);
    size_t D = counts.by_depth.size() - 1;
    ensure_pows(D);
    const Int& num = params_.beta.get_num();
    const Int& den = params_.beta.get_den();
    Int x(0), pw(1);
    for (size_t d = D; d >= 1; --d) {
        x *= den;
        if (counts.by_depth[d] != 0)
            x += counts.by_depth[d] * pw;
        pw *= num;
    }
    // x = sum count[d] * q^(d-1) * p^(D-d); multiply by q, divide by p^D.
    Rat out(x * den, num_pows_[D]);
    out.canonicalize();
    return out;
}

bool Engine::is_duplicate(std::span<const uint8_t> rest, uint64_t hash) const {
    auto it = index_.find(hash);
    if (it == index_.end())
        return false;
    for (uint32_t idx : it->second) {
        const Entry& e = entries_[idx];
        auto r = e.rest();
        if (r.size() == rest.size() &&
            std::equal(r.begin(), r.end(), rest.begin()))
            return true;
    }
    return false;
}

bool Engine::has_explicit_ancestor(std::span<const uint8_t> rest) const {
    // Strict ancestors are proper prefixes of `rest`.
    for (size_t len = 1; len < rest.size(); ++len) {
        auto prefix = rest.subspan(0, len);
        if (is_duplicate(prefix, rest_hash(prefix)))
            return true;
    }
    return false;
}

void Engine::index_entry(uint32_t idx) {
    index_[entries_[idx].hash].push_back(idx);
}

void Engine::rebuild_index() {
    index_.clear();
    for (uint32_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].is_explicit())
            index_entry(i);
}

void Engine::check_paranoid() const {
    if (!opts_.paranoid)
        return;
    Rat scratch = recompute_weight();
    if (scratch != total_)
        throw InvariantBroken("incremental weight " + rat_str(total_) +
                              " != from-scratch weight " + rat_str(scratch));
}

void Engine::apply_alice_move(const AliceMove& move) {
    shares_valid_ = false;
    // Validate and price the move as submitted.
    DepthCounts submitted;
    for (const Obstruction& o : move.additions) {
        int d = o.depth();
        if (d < 1)
            throw IllegalDepth("obstruction at depth 0 (the current root)");
        if (o.is_explicit()) {
            for (uint8_t s : o.path)
                if (s >= params_.arity)
                    throw std::invalid_argument(
                        "obstruction path symbol out of range");
            submitted.add_one(d);
        } else {
            Int m = o.bundle->multiplicity();
            if (m < 1)
                throw std::invalid_argument("bundle multiplicity < 1");
            submitted.add(d, m);
        }
    }
    last_move_weight_ = eval_depth_counts(submitted);
    if (params_.omega && last_move_weight_ > *params_.omega)
        throw BudgetExceeded("move weight " + rat_str(last_move_weight_) +
                             " exceeds budget " + rat_str(*params_.omega));

    if (opts_.transcript) {
        pending_forbid_.clear();
        for (const Obstruction& o : move.additions) {
            if (!pending_forbid_.empty())
                pending_forbid_ += " + ";
            pending_forbid_ +=
                o.is_explicit() ? render_path(o.path) : o.bundle->describe();
        }
        if (pending_forbid_.empty())
            pending_forbid_ = "-";
    }

    // Insert, deduplicating explicit entries against the live ledger.
    DepthCounts delta;
    for (const Obstruction& o : move.additions) {
        if (o.is_explicit()) {
            uint64_t h = rest_hash(o.path);
            if (is_duplicate(o.path, h))
                continue; // re-forbidding adds zero weight
            if (opts_.prune_subsumed && has_explicit_ancestor(o.path))
                continue; // already inside a forbidden subtree
            if (opts_.prune_subsumed) {
                // Remove live entries strictly below the new vertex.
                bool removed = false;
                for (size_t i = 0; i < entries_.size();) {
                    Entry& e = entries_[i];
                    auto r = e.rest();
                    if (e.is_explicit() && r.size() > o.path.size() &&
                        std::equal(o.path.begin(), o.path.end(), r.begin())) {
                        DepthCounts gone;
                        gone.add_one(e.depth());
                        total_ -= eval_depth_counts(gone);
                        if (i + 1 != entries_.size())
                            entries_[i] = std::move(entries_.back());
                        entries_.pop_back();
                        removed = true;
                    } else {
                        ++i;
                    }
                }
                if (removed)
                    rebuild_index();
            }
            Entry e;
            e.path = o.path;
            e.offset = 0;
            e.hash = h;
            entries_.push_back(std::move(e));
            index_entry(static_cast<uint32_t>(entries_.size() - 1));
            delta.add_one(o.depth());
        } else {
            Entry e;
            e.bundle = o.bundle;
            entries_.push_back(std::move(e));
            delta.add(o.depth(), o.bundle->multiplicity());
        }
    }
    total_ += eval_depth_counts(delta);
    check_paranoid();
}

void Engine::compute_shares() const {
    std::vector<DepthCounts> counts(params_.arity);
    for (const Entry& e : entries_) {
        if (e.is_explicit()) {
            counts[e.rest().front()].add_one(e.depth());
        } else {
            int d = e.bundle->depth();
            for (int c = 0; c < params_.arity; ++c) {
                Int m = e.bundle->child_multiplicity(c);
                if (m != 0)
                    counts[c].add(d, m);
            }
        }
    }
    shares_.assign(params_.arity, Rat(0));
    for (int c = 0; c < params_.arity; ++c)
        shares_[c] = eval_depth_counts(counts[c]);
    shares_valid_ = true;
}

Rat Engine::child_share(int c) const {
    if (c < 0 || c >= params_.arity)
        throw std::invalid_argument("child index out of range");
    if (!shares_valid_)
        compute_shares();
    return shares_[c];
}

std::vector<Rat> Engine::child_shares() const {
    if (!shares_valid_)
        compute_shares();
    return shares_;
}

int Engine::choose_child() const {
    if (!shares_valid_)
        compute_shares();
    for (int c = 0; c < params_.arity; ++c)
        if (params_.beta * shares_[c] < 1)
            return c;
    throw NoSafeChild("no child with beta*share < 1 at depth " +
                      std::to_string(chosen_.size()));
}

void Engine::descend(int c) {
    if (c < 0 || c >= params_.arity)
        throw std::invalid_argument("child index out of range");
    if (!shares_valid_)
        compute_shares();
    Rat new_total = params_.beta * shares_[c];
    if (new_total >= 1)
        throw InvariantBroken("descending into child " + std::to_string(c) +
                              " would give weight " + rat_str(new_total));

    std::vector<Entry> survivors;
    survivors.reserve(entries_.size());
    for (Entry& e : entries_) {
        if (e.is_explicit()) {
            auto r = e.rest();
            if (r.front() != c)
                continue;
            if (r.size() == 1)
                throw InvariantBroken("walked onto a forbidden vertex");
            e.hash = rest_hash_drop_front(e.hash, r.front(), r.size());
            e.offset += 1;
            survivors.push_back(std::move(e));
        } else {
            auto residual = e.bundle->split(c);
            if (!residual)
                continue;
            Entry s;
            s.bundle = std::move(residual);
            survivors.push_back(std::move(s));
        }
    }
    entries_ = std::move(survivors);
    rebuild_index();
    chosen_.push_back(static_cast<uint8_t>(c));
    total_ = new_total;
    shares_valid_ = false;
    if (opts_.transcript) {
        opts_.transcript->push_back(
            "step " + std::to_string(chosen_.size() - 1) + ": forbid " +
            (pending_forbid_.empty() ? "-" : pending_forbid_) + ", move " +
            std::to_string(c));
        pending_forbid_.clear();
    }
    check_paranoid();
    if (total_ >= 1)
        throw InvariantBroken("total weight " + rat_str(total_) +
                              " reached 1 after descend");
}

std::vector<uint8_t> Engine::run(Adversary& alice, size_t steps) {
    std::vector<uint8_t> out;
    out.reserve(steps);
    for (size_t i = 0; i < steps; ++i) {
        apply_alice_move(alice.next_move(chosen_));
        int c = choose_child();
        descend(c);
        out.push_back(static_cast<uint8_t>(c));
    }
    return out;
}

Rat Engine::recompute_weight() const {
    DepthCounts counts;
    for (const Entry& e : entries_) {
        if (e.is_explicit())
            counts.add_one(e.depth());
        else
            counts.add(e.depth(), e.bundle->multiplicity());
    }
    return eval_depth_counts(counts);
}

} // namespace escape::game
