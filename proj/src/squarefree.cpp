#include "escape/squarefree.hpp"

#include "escape/dyadic_acc.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

namespace escape::sqfree {

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

StaticAssignment::StaticAssignment(std::vector<std::vector<Symbol>> rows)
    : rows_(std::move(rows)) {
    if (rows_.empty())
        throw ParseError("list assignment: no rows");
    arity_ = static_cast<int>(rows_[0].size());
    if (arity_ < 1)
        throw ParseError("list assignment: empty row");
    for (size_t i = 0; i < rows_.size(); ++i) {
        if (static_cast<int>(rows_[i].size()) != arity_)
            throw ParseError("list assignment: row " + std::to_string(i) +
                             " has " + std::to_string(rows_[i].size()) +
                             " symbols, expected " + std::to_string(arity_));
        auto sorted = rows_[i];
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ParseError("list assignment: row " + std::to_string(i) +
                             " has repeated symbols");
    }
}

RandomAssignment::RandomAssignment(uint64_t seed, uint32_t sigma, int arity)
    : seed_(seed), sigma_(sigma), arity_(arity) {
    if (arity < 1)
        throw ParseError("list assignment: arity must be positive");
    if (sigma < static_cast<uint32_t>(arity))
        throw ParseError("random list assignment: sigma must be >= arity");
}

std::vector<Symbol> RandomAssignment::list_at(size_t pos,
                                              std::span<const Symbol>) const {
    uint64_t state = seed_ ^ (pos + 1);
    std::vector<Symbol> row;
    row.reserve(arity_);
    while (row.size() < static_cast<size_t>(arity_)) {
        Symbol s = static_cast<Symbol>(mix64(state) % sigma_);
        state += 0x9e3779b97f4a7c15ULL; // advance the splitmix64 stream
        if (std::find(row.begin(), row.end(), s) == row.end())
            row.push_back(s);
    }
    return row;
}

std::optional<game::Path> translate_suffix(const ListAssignment& lists,
                                           std::vector<Symbol>& scratch,
                                           size_t word_len, size_t start) {
    size_t l = word_len - start;
    game::Path idx;
    idx.reserve(l);
    bool ok = true;
    for (size_t j = 0; j < l; ++j) {
        Symbol sym = scratch[start + j];
        auto row = lists.list_at(
            word_len + j, std::span<const Symbol>(scratch.data(), word_len + j));
        size_t c = row.size();
        for (size_t r = 0; r < row.size(); ++r) {
            if (row[r] == sym) {
                c = r;
                break;
            }
        }
        if (c == row.size()) { // symbol not allowed there; square impossible
            ok = false;
            break;
        }
        idx.push_back(static_cast<uint8_t>(c));
        scratch.push_back(sym);
    }
    scratch.resize(word_len);
    if (!ok)
        return std::nullopt;
    return idx;
}

game::AliceMove make_move(const ListAssignment& lists,
                          std::span<const Symbol> w) {
    game::AliceMove move;
    std::vector<Symbol> scratch(w.begin(), w.end());
    scratch.reserve(w.size() * 2 + 4);
    // Suffixes in increasing length order (start descending).
    for (size_t start = w.size(); start-- > 0;) {
        if (auto p = translate_suffix(lists, scratch, w.size(), start))
            move.additions.push_back(
                game::Obstruction::explicit_path(std::move(*p)));
    }
    return move;
}

namespace {

std::vector<Symbol> word_from_path(const ListAssignment& lists,
                                   std::span<const uint8_t> path) {
    std::vector<Symbol> w;
    w.reserve(path.size());
    for (size_t i = 0; i < path.size(); ++i) {
        auto row = lists.list_at(i, w);
        if (path[i] >= row.size())
            throw ParseError(
                "list assignment domain exhausted at position " +
                std::to_string(i));
        w.push_back(row[path[i]]);
    }
    return w;
}

} // namespace

game::AliceMove SquarefreeAdversary::next_move(std::span<const uint8_t> path) {
    for (size_t i = word_.size(); i < path.size(); ++i) {
        auto row = lists_->list_at(i, word_);
        if (path[i] >= row.size())
            throw ParseError("list assignment domain exhausted at position " +
                             std::to_string(i));
        word_.push_back(row[path[i]]);
    }
    return make_move(*lists_, word_);
}

std::vector<Symbol> generate_reference(const ListAssignment& lists,
                                       size_t length,
                                       game::EngineOptions opts) {
    if (lists.arity() < 4)
        throw NotCertified(
            "squarefree: need at least 4 symbols per list (3 is open)");
    game::Engine engine({lists.arity(), Rat(2), Rat(1)}, opts);
    SquarefreeAdversary alice(lists);
    auto path = engine.run(alice, length);
    return word_from_path(lists, path);
}

std::vector<Symbol> generate(const ListAssignment& lists, size_t length) {
    if (lists.arity() < 4)
        throw NotCertified(
            "squarefree: need at least 4 symbols per list (3 is open)");
    const int K = lists.arity();

    // Ledger entry: translated path idx emitted at time `born`; the residual
    // at time t is idx[t-born..len) and its absolute target level born+len
    // never changes, so per-child dyadic accumulators track child shares
    // exactly: share_c * 2 < 1  <=>  min level of acc[c] > t+1.
    struct Ent {
        uint32_t born;
        uint32_t len;
        uint64_t hash; // end-anchored hash of the residual
        game::Path idx;
    };

    std::vector<std::vector<Ent>> buckets(K); // keyed by residual front index
    std::vector<DyadicAcc> acc(K, DyadicAcc(2 * length + 4));
    std::unordered_map<uint64_t, std::vector<std::pair<uint32_t, uint32_t>>>
        dedup; // residual hash -> (bucket, slot)

    std::vector<Symbol> w;
    w.reserve(2 * length + 4);

    // Rows are immutable for prefix-independent assignments, so probe them
    // through a lazily filled cache; probes fail fast without allocating.
    const bool cacheable = lists.prefix_independent();
    std::vector<std::vector<Symbol>> row_cache;
    std::vector<uint8_t> row_known;
    if (cacheable) {
        row_cache.resize(2 * length + 4);
        row_known.assign(2 * length + 4, 0);
    }
    auto row_at = [&](size_t pos) -> const std::vector<Symbol>& {
        if (!row_known[pos]) {
            row_cache[pos] = lists.list_at(pos, {});
            row_known[pos] = 1;
        }
        return row_cache[pos];
    };
    game::Path probe;

    for (size_t t = 0; t < length; ++t) {
        auto row_t = lists.list_at(t, w);
        if (static_cast<int>(row_t.size()) != K)
            throw ParseError("list assignment domain exhausted at position " +
                             std::to_string(t));

        // Alice: one obstruction per translatable suffix, shortest first.
        for (size_t start = t; start-- > 0;) {
            std::optional<game::Path> p;
            if (cacheable) {
                probe.clear();
                bool ok = true;
                for (size_t j = 0, l = t - start; j < l; ++j) {
                    const auto& row = row_at(t + j);
                    const Symbol sym = w[start + j];
                    size_t c = row.size();
                    for (size_t r = 0; r < row.size(); ++r) {
                        if (row[r] == sym) {
                            c = r;
                            break;
                        }
                    }
                    if (c == row.size()) { // square impossible here
                        ok = false;
                        break;
                    }
                    probe.push_back(static_cast<uint8_t>(c));
                }
                if (!ok)
                    continue;
                p = probe;
            } else {
                p = translate_suffix(lists, w, t, start);
                if (!p)
                    continue;
            }
            uint64_t h = game::rest_hash(*p);
            bool dup = false;
            if (auto it = dedup.find(h); it != dedup.end()) {
                for (auto [b, s] : it->second) {
                    const Ent& e = buckets[b][s];
                    size_t off = t - e.born;
                    if (e.len - off == p->size() &&
                        std::equal(p->begin(), p->end(),
                                   e.idx.begin() + off)) {
                        dup = true;
                        break;
                    }
                }
            }
            if (dup)
                continue;
            uint8_t b0 = (*p)[0];
            acc[b0].add(t + p->size());
            dedup[h].push_back(
                {b0, static_cast<uint32_t>(buckets[b0].size())});
            buckets[b0].push_back({static_cast<uint32_t>(t),
                                   static_cast<uint32_t>(p->size()), h,
                                   std::move(*p)});
        }

        // Bob: least child whose share stays under 1/beta = 1/2.
        int chosen = -1;
        for (int c = 0; c < K; ++c) {
            if (acc[c].min_level() > t + 1) {
                chosen = c;
                break;
            }
        }
        if (chosen < 0)
            throw NoSafeChild("no safe child at position " + std::to_string(t));

        // Descend: entries outside the chosen bucket die; survivors advance
        // one symbol and re-bucket under their next index.
        std::vector<std::vector<Ent>> next_buckets(K);
        dedup.clear();
        for (int b = 0; b < K; ++b) {
            for (Ent& e : buckets[b]) {
                size_t level = static_cast<size_t>(e.born) + e.len;
                if (b != chosen) {
                    acc[b].sub(level);
                    continue;
                }
                size_t off = t - e.born;
                if (off + 1 == e.len)
                    throw InvariantBroken("fast path walked onto a forbidden "
                                          "vertex");
                e.hash = game::rest_hash_drop_front(e.hash, e.idx[off],
                                                    e.len - off);
                uint8_t b2 = e.idx[off + 1];
                if (b2 != b) {
                    acc[b].sub(level);
                    acc[b2].add(level);
                }
                dedup[e.hash].push_back(
                    {b2, static_cast<uint32_t>(next_buckets[b2].size())});
                next_buckets[b2].push_back(std::move(e));
            }
        }
        buckets = std::move(next_buckets);
        w.push_back(row_t[chosen]);
    }
    return w;
}

SquarefreeReport verify_squarefree(std::span<const Symbol> word) {
    SquarefreeReport report;
    size_t n = word.size();
    // Scan each half-length d along its diagonal: the common-extension run at
    // (i, i+d) extends the run at (i+1, i+d+1), so one reverse pass per d.
    for (size_t d = 1; 2 * d <= n; ++d) {
        size_t run = 0;
        for (size_t i = n - d; i-- > 0;) {
            run = (word[i] == word[i + d]) ? run + 1 : 0;
            if (run >= d)
                report.hits.push_back({i, d});
        }
    }
    std::sort(report.hits.begin(), report.hits.end(),
              [](const SquareHit& a, const SquareHit& b) {
                  return a.start != b.start ? a.start < b.start
                                            : a.half_len < b.half_len;
              });
    return report;
}

std::optional<size_t> first_list_violation(std::span<const Symbol> word,
                                           const ListAssignment& lists) {
    for (size_t i = 0; i < word.size(); ++i) {
        auto row = lists.list_at(i, word.subspan(0, i));
        if (std::find(row.begin(), row.end(), word[i]) == row.end())
            return i;
    }
    return std::nullopt;
}

nlohmann::json SquarefreeReport::to_json() const {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& h : hits)
        violations.push_back({{"start", h.start}, {"half_len", h.half_len}});
    return report_envelope(std::move(violations));
}

} // namespace escape::sqfree
