#include "mofsmith/core.hpp"
#include "mofsmith/tokens.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mofsmith;

TEST_CASE("genes round-trip through text") {
    auto g = parse_gene("tbo+N17+N10");
    CHECK(g.topology == "tbo");
    CHECK(g.block1 == "N17");
    CHECK(g.block2 == "N10");
    CHECK(format_gene(g) == "tbo+N17+N10");
}

TEST_CASE("malformed genes are rejected") {
    for (const char* bad : {"", "tbo", "tbo+N17", "tbo+N17+", "+N17+N10", "tbo+N17+N10+x", "tbo+N 17+N10", "a+b+c!"})
        CHECK_THROWS_AS(parse_gene(bad), MalformedGene);
}

TEST_CASE("genes order by topology then blocks") {
    CHECK(parse_gene("acs+N1+E1") < parse_gene("pcu+N1+E1"));
    CHECK(parse_gene("pcu+N1+E2") < parse_gene("pcu+N2+E1"));
}

TEST_CASE("objectives parse and format") {
    CHECK(parse_objective("max") == Objective::maximize());
    CHECK(parse_objective("MIN") == Objective::minimize());
    CHECK(parse_objective("near 500") == Objective::near(500));
    auto r = parse_objective("range 1 2.5");
    CHECK(r.kind == ObjectiveKind::range);
    CHECK(r.low == 1);
    CHECK(r.high == 2.5);
    auto open = parse_objective("range 3 inf");
    CHECK(std::isinf(open.high));
    CHECK(format_objective(open) == "range 3 inf");
    CHECK(format_objective(Objective::near(0.25)) == "near 0.25");
    CHECK_THROWS_AS(parse_objective("best"), Error);
    CHECK_THROWS_AS(parse_objective("near"), Error);
    CHECK_THROWS_AS(parse_objective("range 2 1"), Error);
}

TEST_CASE("outcome labels and scales round-trip") {
    for (auto l : {OutcomeLabel::answered, OutcomeLabel::token_limit, OutcomeLabel::logic_error})
        CHECK(parse_outcome_label(to_string(l)) == l);
    CHECK(parse_scale("log") == Scale::log);
    CHECK(to_string(Scale::linear) == "linear");
}

TEST_CASE("text helpers") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::lower("CO2 Henry") == "co2 henry");
    CHECK(text::iequals("YUSGID", "yusgid"));
    CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::join({"x", "y"}, ", ") == "x, y");
    CHECK(text::format_number(0.026577507595890823) == "0.026577507595890823");
    CHECK(text::format_number(12020) == "12020");
    CHECK(text::format_general(0.026577507595890823, 4) == "0.02658");
    CHECK(text::parse_number(" -3.62769 ") == doctest::Approx(-3.62769));
    CHECK_FALSE(text::parse_number("3.6x"));
    CHECK(text::hex_digest("abc") == text::hex_digest("abc"));
    CHECK(text::hex_digest("abc") != text::hex_digest("abd"));
}

TEST_CASE("token estimate is ceil(bytes/4), monotone and subadditive") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::string a(rng() % 50, 'x'), b(rng() % 50, 'y');
        CHECK(estimate_tokens(a + b) >= estimate_tokens(a));
        CHECK(estimate_tokens(a + b) <= estimate_tokens(a) + estimate_tokens(b));
    }
}

TEST_CASE("session budget accumulates and refuses before mutating") {
    TokenBudget b(10);
    b.charge_tokens(6);
    CHECK(b.used() == 6);
    CHECK(b.remaining() == 4);
    CHECK_THROWS_AS(b.charge_tokens(5), TokenBudgetExceeded);
    CHECK(b.used() == 6);
    b.charge_tokens(4);
    CHECK(b.remaining() == 0);
    b.begin_call();
    CHECK_THROWS_AS(b.charge_tokens(1), TokenBudgetExceeded);
}

TEST_CASE("per-call budget resets its window at each call") {
    TokenBudget b(10, BudgetMode::per_call);
    b.charge_tokens(8);
    b.begin_call();
    b.charge_tokens(8);
    CHECK(b.used() == 16);
    CHECK(b.window_used() == 8);
    CHECK_THROWS_AS(b.charge_tokens(3), TokenBudgetExceeded);
}

TEST_CASE("charge uses the estimator") {
    TokenBudget b(100);
    CHECK(charge(b, std::string(40, 'a')) == 10);
    CHECK(charge(b, "anything", [](std::string_view) { return std::size_t{7}; }) == 7);
    CHECK(b.used() == 17);
}
