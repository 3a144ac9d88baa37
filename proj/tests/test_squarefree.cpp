#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "escape/errors.hpp"
#include "escape/squarefree.hpp"

#include <numeric>
#include <vector>

using namespace escape;
using namespace escape::sqfree;

namespace {

using Rows = std::vector<std::vector<Symbol>>;

StaticAssignment constant_lists(size_t positions) {
    return StaticAssignment(Rows(positions, {0, 1, 2, 3}));
}

// Allowed block {4b, 4b+1, 4b+2, 4b+3} where b is the last prefix symbol
// mod 3: a prefix-dependent assignment exercising hypothetical probes.
class ShiftingAssignment final : public ListAssignment {
public:
    int arity() const override { return 4; }
    std::vector<Symbol> list_at(size_t,
                                std::span<const Symbol> prefix) const override {
        Symbol base = prefix.empty() ? 0 : (prefix.back() % 3) * 4;
        return {base, base + 1, base + 2, base + 3};
    }
};

} // namespace

TEST_CASE("constant 4-lists give the golden prefix 0 1 0 2") {
    auto lists = constant_lists(64);
    auto word = generate(lists, 32);
    REQUIRE(word.size() == 32);
    CHECK(word[0] == 0);
    CHECK(word[1] == 1);
    CHECK(word[2] == 0);
    CHECK(word[3] == 2);
    CHECK(verify_squarefree(word).ok());
    CHECK_FALSE(first_list_violation(word, lists).has_value());
    CHECK(generate_reference(lists, 32) == word);
}

TEST_CASE("make_move prices a two-symbol word at 3/4 under beta=2") {
    auto lists = constant_lists(8);
    std::vector<Symbol> w{0, 1};
    auto move = make_move(lists, w);
    REQUIRE(move.additions.size() == 2);
    // Shortest suffix first: "1" re-read at position 2 is child 1; "01"
    // re-read at positions 2,3 is children 0,1.
    CHECK(move.additions[0].path == game::Path{1});
    CHECK(move.additions[1].path == game::Path{0, 1});
    Rat total = std::accumulate(
        move.additions.begin(), move.additions.end(), Rat(0),
        [](Rat acc, const game::Obstruction& o) {
            return Rat(acc + o.weight(Rat(2)));
        });
    CHECK(total == Rat(3, 4));
}

TEST_CASE("untranslatable suffixes are skipped (the square is impossible)") {
    StaticAssignment lists(
        Rows{{0, 1, 2, 3}, {0, 1, 2, 3}, {4, 5, 6, 7}, {4, 5, 6, 7}});
    std::vector<Symbol> w{0, 1};
    auto move = make_move(lists, w);
    CHECK(move.additions.empty()); // neither 1 nor 01 fits at positions 2+

    std::vector<Symbol> scratch = w;
    CHECK_FALSE(translate_suffix(lists, scratch, 2, 1).has_value());
    CHECK(scratch == w); // restored
}

TEST_CASE("three-symbol lists are not certified") {
    StaticAssignment lists(Rows(8, {0, 1, 2}));
    CHECK_THROWS_AS(generate(lists, 4), NotCertified);
    CHECK_THROWS_AS(generate_reference(lists, 4), NotCertified);
}

TEST_CASE("static assignments validate their rows") {
    CHECK_THROWS_AS(StaticAssignment(Rows{}), ParseError);
    CHECK_THROWS_AS(StaticAssignment(Rows{{}}), ParseError);
    CHECK_THROWS_AS(StaticAssignment(Rows{{0, 1, 2, 3}, {0, 1, 2}}),
                    ParseError);
    CHECK_THROWS_AS(StaticAssignment(Rows{{0, 1, 1, 3}}), ParseError);
    CHECK_NOTHROW(StaticAssignment(Rows{{3, 1, 0, 2}}));
}

TEST_CASE("generation stops when the list file runs out") {
    auto lists = constant_lists(6);
    CHECK(generate(lists, 6).size() == 6);
    CHECK_THROWS_AS(generate(lists, 7), ParseError);
    CHECK_THROWS_AS(generate_reference(lists, 7), ParseError);
}

TEST_CASE("random assignments are deterministic rows of distinct symbols") {
    CHECK_THROWS_AS(RandomAssignment(1, 3), ParseError); // sigma < arity
    RandomAssignment a(99, 10);
    RandomAssignment b(99, 10);
    RandomAssignment c(100, 10);
    bool any_difference = false;
    for (size_t pos = 0; pos < 50; ++pos) {
        auto row = a.list_at(pos, {});
        CHECK(row == b.list_at(pos, {}));
        CHECK(row == a.list_at(pos, {})); // stateless, repeatable
        REQUIRE(row.size() == 4);
        for (size_t i = 0; i < row.size(); ++i) {
            CHECK(row[i] < 10);
            for (size_t j = i + 1; j < row.size(); ++j)
                CHECK(row[i] != row[j]);
        }
        any_difference |= row != c.list_at(pos, {});
    }
    CHECK(any_difference); // different seeds give different assignments
}

TEST_CASE("fast and reference generators agree word for word") {
    for (uint64_t seed : {1ull, 2ull, 777ull}) {
        for (uint32_t sigma : {4u, 9u, 21u}) {
            RandomAssignment lists(seed, sigma);
            auto fast = generate(lists, 400);
            auto ref = generate_reference(lists, 400);
            REQUIRE(fast == ref);
            CHECK(verify_squarefree(fast).ok());
            CHECK_FALSE(first_list_violation(fast, lists).has_value());
        }
    }
}

TEST_CASE("prefix-dependent lists work and stay square-free") {
    ShiftingAssignment lists;
    auto fast = generate(lists, 300);
    auto ref = generate_reference(lists, 300);
    REQUIRE(fast == ref);
    CHECK(verify_squarefree(fast).ok());
    CHECK_FALSE(first_list_violation(fast, lists).has_value());
    // The assignment really shifts: some symbol must land outside {0..3}.
    CHECK(std::ranges::any_of(fast, [](Symbol s) { return s > 3; }));
}

TEST_CASE("verify_squarefree finds every square, shortest first") {
    auto hits = [](std::vector<Symbol> w) {
        return verify_squarefree(w).hits;
    };

    CHECK(hits({}).empty());
    CHECK(hits({5}).empty());
    CHECK(hits({0, 1, 0, 2}).empty());

    auto rep = hits({2, 2});
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].start == 0);
    CHECK(rep[0].half_len == 1);

    auto twice = hits({0, 0, 0});
    REQUIRE(twice.size() == 2);
    CHECK(twice[0].start == 0);
    CHECK(twice[1].start == 1);

    auto ab = hits({0, 1, 0, 1});
    REQUIRE(ab.size() == 1);
    CHECK(ab[0].start == 0);
    CHECK(ab[0].half_len == 2);

    // "hotshots" as raw character codes: hots|hots.
    std::vector<Symbol> hot{'h', 'o', 't', 's', 'h', 'o', 't', 's'};
    auto hs = verify_squarefree(hot);
    REQUIRE(hs.hits.size() == 1);
    CHECK(hs.hits[0].start == 0);
    CHECK(hs.hits[0].half_len == 4);
    auto js = hs.to_json();
    CHECK(js["schema"] == 1);
    CHECK(js["ok"] == false);
    CHECK(js["violations"][0]["start"] == 0);
    CHECK(js["violations"][0]["half_len"] == 4);
}

TEST_CASE("first_list_violation pinpoints the offending position") {
    auto lists = constant_lists(8);
    CHECK_FALSE(
        first_list_violation(std::vector<Symbol>{0, 1, 2}, lists).has_value());
    auto bad = first_list_violation(std::vector<Symbol>{0, 9, 2}, lists);
    REQUIRE(bad.has_value());
    CHECK(*bad == 1);
    // Out-of-domain positions violate as well.
    auto past = first_list_violation(std::vector<Symbol>(9, 0), lists);
    REQUIRE(past.has_value());
    CHECK(*past == 8);
}

TEST_CASE("long constant-list words stay square-free") {
    auto lists = constant_lists(1501);
    auto word = generate(lists, 1500);
    CHECK(verify_squarefree(word).ok());
    CHECK_FALSE(first_list_violation(word, lists).has_value());
}
