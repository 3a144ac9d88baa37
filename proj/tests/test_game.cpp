#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "escape/errors.hpp"
#include "escape/game.hpp"
#include "escape/rational.hpp"

#include <memory>
#include <random>
#include <vector>

using namespace escape;
using namespace escape::game;

namespace {

AliceMove explicit_move(std::vector<Path> paths) {
    AliceMove m;
    for (auto& p : paths)
        m.additions.push_back(Obstruction::explicit_path(std::move(p)));
    return m;
}

// Replays a fixed list of moves, then passes forever.
struct ScriptAdversary final : Adversary {
    std::vector<AliceMove> moves;
    size_t next = 0;
    AliceMove next_move(std::span<const uint8_t>) override {
        return next < moves.size() ? moves[next++] : AliceMove{};
    }
};

// The two children of the vertex at `prefix`, as one bundle of
// multiplicity 2.  Equivalent to the explicit pair {prefix+0, prefix+1}.
class SiblingPair final : public BundleState {
public:
    explicit SiblingPair(Path prefix) : prefix_(std::move(prefix)) {}
    int depth() const override { return static_cast<int>(prefix_.size()) + 1; }
    Int multiplicity() const override { return 2; }
    Int child_multiplicity(int child) const override {
        if (prefix_.empty())
            return 1; // one member sits exactly at each child
        return prefix_[0] == child ? Int(2) : Int(0);
    }
    std::shared_ptr<const BundleState> split(int child) const override {
        if (prefix_.empty() || prefix_[0] != child)
            return nullptr;
        return std::make_shared<SiblingPair>(
            Path(prefix_.begin() + 1, prefix_.end()));
    }
    std::string describe() const override {
        return "pair(" + render_path(prefix_) + ".*)";
    }

private:
    Path prefix_;
};

} // namespace

TEST_CASE("check_condition is exact at its boundary") {
    CHECK(check_condition(2, Rat(3, 2), Rat(1, 3)));       // 3/2 * 4/3 == 2
    CHECK_FALSE(check_condition(2, Rat(3, 2), Rat(167, 500)));
    CHECK(check_condition(2, Rat(3, 2), Rat(8, 27)));       // 35/18 < 2
    CHECK(check_condition(3, Rat(2), Rat(1, 2)));           // 2 * 3/2 == 3
    CHECK_FALSE(check_condition(2, Rat(1), Rat(0)));        // beta must be > 1
    CHECK_FALSE(check_condition(2, Rat(2), Rat(0)));        // and < arity
    CHECK_FALSE(check_condition(1, Rat(1, 2), Rat(0)));
}

TEST_CASE("engine rejects uncertified parameters at construction") {
    CHECK_THROWS_AS(Engine({1, Rat(1, 2), {}}), NotCertified);
    CHECK_THROWS_AS(Engine({2, Rat(1), {}}), NotCertified);
    CHECK_THROWS_AS(Engine({2, Rat(2), {}}), NotCertified);
    CHECK_THROWS_AS(Engine({2, Rat(3, 2), Rat(1, 2)}), NotCertified);
    CHECK_NOTHROW(Engine({2, Rat(3, 2), Rat(1, 3)}));
    CHECK_NOTHROW(Engine({2, Rat(3, 2), {}}));
}

TEST_CASE("explicit obstruction weights, shares, and rescaling") {
    Engine e({2, Rat(3, 2), {}}, {.paranoid = true});
    CHECK(e.total_weight() == 0);

    e.apply_alice_move(explicit_move({{0, 1}}));
    CHECK(e.total_weight() == Rat(4, 9));
    CHECK(e.last_move_weight() == Rat(4, 9));
    CHECK(e.child_share(0) == Rat(4, 9));
    CHECK(e.child_share(1) == 0);
    CHECK(e.choose_child() == 0); // 3/2 * 4/9 = 2/3 < 1, least child wins

    e.descend(0);
    CHECK(e.total_weight() == Rat(2, 3)); // rescaled by beta
    CHECK(e.absolute_depth() == 1);
    CHECK(e.ledger_size() == 1);

    // The surviving residual {1} now blocks child 1 exactly: 3/2 * 2/3 == 1.
    CHECK(e.child_share(1) == Rat(2, 3));
    CHECK(e.choose_child() == 0);
    e.descend(0);
    CHECK(e.total_weight() == 0);
    CHECK(e.ledger_size() == 0);
}

TEST_CASE("depth-0 obstructions and bad symbols are rejected") {
    Engine e({2, Rat(3, 2), {}});
    CHECK_THROWS_AS(e.apply_alice_move(explicit_move({{}})), IllegalDepth);
    CHECK_THROWS_AS(e.apply_alice_move(explicit_move({{0, 2}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(e.descend(2), std::invalid_argument);
    CHECK_THROWS_AS(e.child_share(-1), std::invalid_argument);
}

TEST_CASE("budget is enforced on the submitted weight, before dedup") {
    Engine e({2, Rat(3, 2), Rat(1, 3)});
    // (2/3)^5 * 2 = 64/243 <= 1/3: fine.
    e.apply_alice_move(explicit_move({{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}}));
    CHECK(e.last_move_weight() == Rat(64, 243));
    // A single depth-1 vertex weighs 2/3 > 1/3.
    CHECK_THROWS_AS(e.apply_alice_move(explicit_move({{0}})), BudgetExceeded);
    // Submitting the same path twice prices it twice even though the ledger
    // would only keep one copy: 2*(2/3)^4 = 32/81 > 27/81.
    CHECK_THROWS_AS(e.apply_alice_move(
                        explicit_move({{0, 1, 0, 1}, {0, 1, 0, 1}})),
                    BudgetExceeded);
}

TEST_CASE("re-forbidding is free: set semantics across moves and descents") {
    Engine e({2, Rat(3, 2), {}}, {.paranoid = true});
    e.apply_alice_move(explicit_move({{0, 1}, {0, 1}}));
    CHECK(e.last_move_weight() == Rat(8, 9)); // priced twice as submitted
    CHECK(e.total_weight() == Rat(4, 9));     // stored once
    CHECK(e.ledger_size() == 1);

    e.apply_alice_move(explicit_move({{0, 1}}));
    CHECK(e.total_weight() == Rat(4, 9));

    e.descend(0); // residual is now {1}
    e.apply_alice_move(explicit_move({{1}}));
    CHECK(e.total_weight() == Rat(2, 3)); // the residual already covers it
    CHECK(e.ledger_size() == 1);

    e.apply_alice_move(explicit_move({{1, 0}}));
    CHECK(e.total_weight() == Rat(2, 3) + Rat(4, 9)); // distinct vertex counts
}

TEST_CASE("NoSafeChild fires when every child is blocked") {
    Engine e({2, Rat(3, 2), {}});
    e.apply_alice_move(explicit_move({{0}, {1}}));
    CHECK(e.total_weight() == Rat(4, 3)); // apply does not gate the total...
    CHECK_THROWS_AS(e.choose_child(), NoSafeChild); // ...but no child is safe
}

TEST_CASE("descend refuses a child whose subtree is too heavy") {
    Engine e({2, Rat(3, 2), {}});
    e.apply_alice_move(explicit_move({{0}}));
    CHECK_THROWS_AS(e.descend(0), InvariantBroken); // 3/2 * 2/3 = 1
    CHECK(e.choose_child() == 1);
    e.descend(1);
    CHECK(e.total_weight() == 0);
}

TEST_CASE("deep obstructions are priced exactly") {
    Engine e({2, Rat(3, 2), {}}, {.paranoid = true});
    Path deep(40, 0);
    e.apply_alice_move(explicit_move({deep}));
    CHECK(e.total_weight() == rat_pow(Rat(2, 3), 40));
    CHECK(e.recompute_weight() == e.total_weight());
}

TEST_CASE("run() is the apply/choose/descend loop") {
    auto script = [] {
        ScriptAdversary a;
        a.moves.push_back(explicit_move({{0, 0}, {1, 1, 1}}));
        a.moves.push_back(explicit_move({{1, 0, 1}}));
        a.moves.push_back(explicit_move({{0, 0, 1, 1}}));
        return a;
    };

    ScriptAdversary a = script();
    Engine e1({2, Rat(3, 2), {}});
    auto out = e1.run(a, 3);

    ScriptAdversary b = script();
    Engine e2({2, Rat(3, 2), {}});
    std::vector<uint8_t> manual;
    for (int i = 0; i < 3; ++i) {
        e2.apply_alice_move(b.next_move(e2.chosen_path()));
        int c = e2.choose_child();
        e2.descend(c);
        manual.push_back(static_cast<uint8_t>(c));
    }
    CHECK(out == manual);
    CHECK(e1.total_weight() == e2.total_weight());
    CHECK(std::vector<uint8_t>(e1.chosen_path().begin(),
                               e1.chosen_path().end()) == out);
}

TEST_CASE("end-anchored hash drops the front symbol algebraically") {
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        size_t len = 1 + rng() % 12;
        Path p(len);
        for (auto& s : p)
            s = static_cast<uint8_t>(rng() % 4);
        uint64_t h = rest_hash(p);
        Path tail(p.begin() + 1, p.end());
        CHECK(rest_hash_drop_front(h, p[0], p.size()) == rest_hash(tail));
    }
}

TEST_CASE("sibling-pair bundles behave exactly like their explicit twins") {
    // Scripted random moves, replayed into two engines: one receives each
    // pair {prefix+0, prefix+1} explicitly, the other as a SiblingPair
    // bundle.  Totals, shares, and chosen children must agree step by step.
    std::mt19937_64 rng(987654321);
    std::vector<Path> prefixes;
    for (int step = 0; step < 160; ++step) {
        Path prefix(5 + rng() % 4);
        for (auto& s : prefix)
            s = static_cast<uint8_t>(rng() % 2);
        prefixes.push_back(std::move(prefix));
    }

    // Submitted weight per move: 2 * (2/3)^(|prefix|+1) <= 2*(2/3)^6 < 1/3,
    // so beta=3/2, omega=1/3 certifies the run.
    Engine ee({2, Rat(3, 2), Rat(1, 3)}, {.paranoid = true});
    Engine eb({2, Rat(3, 2), Rat(1, 3)}, {.paranoid = true});
    for (const Path& prefix : prefixes) {
        Path a = prefix, b = prefix;
        a.push_back(0);
        b.push_back(1);
        ee.apply_alice_move(explicit_move({a, b}));

        AliceMove m;
        m.additions.push_back(
            Obstruction::symbolic(std::make_shared<SiblingPair>(prefix)));
        eb.apply_alice_move(m);

        REQUIRE(ee.total_weight() == eb.total_weight());
        REQUIRE(ee.last_move_weight() == eb.last_move_weight());
        REQUIRE(ee.child_shares() == eb.child_shares());
        int c = ee.choose_child();
        REQUIRE(c == eb.choose_child());
        ee.descend(c);
        eb.descend(c);
        REQUIRE(ee.total_weight() < 1);
    }
    CHECK(ee.total_weight() == eb.total_weight());
}

TEST_CASE("prune_subsumed drops descendants and skips covered arrivals") {
    Engine plain({2, Rat(3, 2), {}}, {.paranoid = true});
    Engine pruned({2, Rat(3, 2), {}},
                  {.paranoid = true, .prune_subsumed = true});

    auto feed = [](Engine& e) {
        e.apply_alice_move(explicit_move({{0, 1, 0}, {0, 1, 1, 0}}));
        e.apply_alice_move(explicit_move({{0, 1}})); // ancestor of both
        e.apply_alice_move(explicit_move({{0, 1, 1}})); // now covered
    };
    feed(plain);
    feed(pruned);

    CHECK(plain.ledger_size() == 4);
    CHECK(pruned.ledger_size() == 1);
    CHECK(pruned.total_weight() == Rat(4, 9));
    CHECK(plain.total_weight() ==
          Rat(4, 9) + Rat(8, 27) + Rat(8, 27) + Rat(16, 81));

    // Pruning sheds redundant weight, which can change the chosen walk:
    // the duplicated subtree 0.1 weighs too much unpruned (share 100/81)
    // but is fine once collapsed to its root.  Both walks stay legal.
    CHECK(plain.choose_child() == 1);
    CHECK(pruned.choose_child() == 0);
    plain.descend(1);
    pruned.descend(0);
    CHECK(plain.total_weight() < 1);
    CHECK(pruned.total_weight() < 1);
}

TEST_CASE("transcript records each step's additions and move") {
    std::vector<std::string> lines;
    EngineOptions opts;
    opts.transcript = &lines;
    Engine e({2, Rat(3, 2), {}}, opts);

    e.apply_alice_move(explicit_move({{1, 0}}));
    e.descend(e.choose_child());
    e.apply_alice_move(explicit_move({{0, 0}, {1}}));
    e.descend(e.choose_child());
    e.apply_alice_move({});
    e.descend(e.choose_child());

    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "step 0: forbid 1.0, move 0");
    CHECK(lines[1] == "step 1: forbid 0.0 + 1, move 0");
    CHECK(lines[2] == "step 2: forbid -, move 1");
}

TEST_CASE("bundle transcripts use describe()") {
    std::vector<std::string> lines;
    EngineOptions opts;
    opts.transcript = &lines;
    Engine e({2, Rat(3, 2), {}}, opts);

    AliceMove m;
    m.additions.push_back(
        Obstruction::symbolic(std::make_shared<SiblingPair>(Path{0, 1})));
    e.apply_alice_move(m);
    e.descend(e.choose_child());
    REQUIRE(lines.size() == 1);
    CHECK(lines[0] == "step 0: forbid pair(0.1.*), move 0");
}

TEST_CASE("obstruction weight helper") {
    CHECK(Obstruction::explicit_path({0, 1, 1}).weight(Rat(3, 2)) ==
          Rat(8, 27));
    auto pair = Obstruction::symbolic(std::make_shared<SiblingPair>(Path{1}));
    CHECK(pair.weight(Rat(3, 2)) == Rat(8, 9)); // 2 * (2/3)^2
}

TEST_CASE("a certified adversary can be run for many steps") {
    // Budgeted random adversary: two random depth->=6 vertices per move.
    struct RandomAdversary final : Adversary {
        std::mt19937_64 rng{42};
        AliceMove next_move(std::span<const uint8_t>) override {
            std::vector<Path> paths;
            for (int j = 0; j < 2; ++j) {
                Path p(6 + rng() % 5);
                for (auto& s : p)
                    s = static_cast<uint8_t>(rng() % 2);
                paths.push_back(std::move(p));
            }
            return explicit_move(std::move(paths));
        }
    };
    RandomAdversary alice;
    Engine e({2, Rat(3, 2), Rat(1, 3)}, {.paranoid = true});
    auto out = e.run(alice, 500);
    CHECK(out.size() == 500);
    CHECK(e.total_weight() < 1);
    CHECK(e.recompute_weight() == e.total_weight());
}
