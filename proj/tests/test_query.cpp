#include "mofsmith/query.hpp"

#include "query_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

using namespace mofsmith;
using namespace mofsmith::query;
using dataset::Value;

TEST_CASE("select parses into a plan") {
    auto p = parse_query("SELECT name, `Pore limiting diameter (Å)` FROM coremof WHERE `Density (g/cm^3)` < 0.5 "
                         "AND name != 'X' OR flag == TRUE ORDER BY name DESC LIMIT 3");
    CHECK(p.kind == QueryPlan::Kind::select);
    CHECK(p.table == "coremof");
    CHECK(p.columns == std::vector<std::string>{"name", "Pore limiting diameter (Å)"});
    REQUIRE(p.filters.size() == 3);
    CHECK(p.filters[0].op == CmpOp::lt);
    CHECK(std::get<double>(p.filters[0].literal) == 0.5);
    CHECK(std::get<std::string>(p.filters[1].literal) == "X");
    CHECK(std::get<bool>(p.filters[2].literal) == true);
    CHECK(p.joins == std::vector<Conjunction>{Conjunction::and_, Conjunction::or_});
    REQUIRE(p.order_by);
    CHECK(p.order_by->descending);
    CHECK(p.limit == 3u);
    CHECK(parse_query(format_query(p)) == p);
}

TEST_CASE("describe and scripts") {
    auto p = parse_query("describe `Pore limiting diameter (Å)` from coremof");
    CHECK(p.kind == QueryPlan::Kind::describe);
    CHECK(p.describe_column == "Pore limiting diameter (Å)");
    auto s = parse_script("SELECT * FROM t WHERE name == 'a;b'; DESCRIBE x FROM t;");
    REQUIRE(s.size() == 2);
    CHECK(std::get<std::string>(s[0].filters[0].literal) == "a;b");
}

TEST_CASE("syntax errors name what was expected") {
    for (const char* bad : {"", "SELEC * FROM t", "SELECT FROM t", "SELECT * t", "SELECT * FROM t WHERE x",
                            "SELECT * FROM t WHERE x ==", "SELECT * FROM t LIMIT 0", "SELECT * FROM t LIMIT 1.5",
                            "SELECT * FROM t ORDER name", "SELECT * FROM t extra", "SELECT * FROM t WHERE x == 'open"})
        CHECK_THROWS_AS(parse_query(bad), SyntaxError);
    try {
        parse_query("SELECT * FROM t LIMIT -1");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 22);
        CHECK(e.expected() == "a positive integer");
    }
}

TEST_CASE("identifier and string quoting round-trip") {
    CHECK(quote_identifier("name") == "`name`");
    CHECK(parse_query("SELECT " + quote_identifier("a`b c") + " FROM t").columns[0] == "a`b c");
    auto lit = std::get<std::string>(parse_query("SELECT * FROM t WHERE x == " + quote_string("it's")).filters[0].literal);
    CHECK(lit == "it's");
}

namespace {

const char* small_csv = ",name,x,flag,metal\n"
                        "10,A,3,True,Zn\n"
                        "11,B,1,False,Cu\n"
                        "12,C,,True,Zn\n"
                        "13,D,2,False,Co\n";

} // namespace

TEST_CASE("type and schema errors") {
    auto t = dataset::parse_table(small_csv, "t");
    CHECK_THROWS_AS(execute(parse_query("SELECT * FROM t WHERE x == 'a'"), t), TypeMismatch);
    CHECK_THROWS_AS(execute(parse_query("SELECT * FROM t WHERE metal > 'a'"), t), TypeMismatch);
    CHECK_THROWS_AS(execute(parse_query("SELECT * FROM t WHERE flag < TRUE"), t), TypeMismatch);
    CHECK_THROWS_AS(execute(parse_query("SELECT * FROM t WHERE x CONTAINS 1"), t), TypeMismatch);
    CHECK_THROWS_AS(execute(parse_query("DESCRIBE metal FROM t"), t), TypeMismatch);
    CHECK_THROWS_AS(execute(parse_query("SELECT nope FROM t"), t), dataset::UnknownColumn);
    CHECK_THROWS_AS(execute(parse_query("SELECT * FROM other"), t), dataset::UnknownTable);
}

TEST_CASE("nulls never match and sort last") {
    auto t = dataset::parse_table(small_csv, "t");
    auto r = execute(parse_query("SELECT name FROM t WHERE x != 99"), t);
    CHECK(r.row_count_total == 3);
    r = execute(parse_query("SELECT name FROM t ORDER BY x DESC"), t);
    CHECK(r.index == std::vector<std::string>{"10", "13", "11", "12"});
    r = execute(parse_query("SELECT name FROM t ORDER BY x"), t);
    CHECK(r.index == std::vector<std::string>{"11", "13", "10", "12"});
    r = execute(parse_query("SELECT name FROM t WHERE metal CONTAINS 'Z' LIMIT 1"), t);
    CHECK(r.rows.size() == 1);
    CHECK(r.row_count_total == 2);
}

TEST_CASE("describe matches pandas on the shipped fixture") {
    const auto& t = testing::fixture_registry().primary_table();
    auto r = execute(parse_query("DESCRIBE `Pore limiting diameter (Å)` FROM coremof_mini"), t);
    CHECK(r.index == std::vector<std::string>{"count", "mean", "std", "min", "25%", "50%", "75%", "max"});
    // pandas Series.describe() on the same column.
    const double want[] = {50, 8.2794596000000009, 4.2373106133075504, 2.4833500000000002, 4.9734274999999997,
                           7.4965349999999997, 10.698449999999999, 20.791899999999998};
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::get<double>(r.rows[i][0]) == doctest::Approx(want[i]).epsilon(1e-9));
}

TEST_CASE("describe matches a brute-force computation") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d(4, 2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + rng() % 200);
        for (auto& x : v) x = d(rng);
        auto s = describe(v);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        double n = static_cast<double>(v.size());
        double mean = 0;
        for (double x : v) mean += x / n;
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        auto q = [&](double p) {
            double h = (n - 1) * p;
            double lo = std::floor(h);
            std::size_t i = static_cast<std::size_t>(lo);
            return i + 1 < sorted.size() ? sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i]) : sorted[i];
        };
        CHECK(s.count == n);
        CHECK(s.mean == doctest::Approx(mean).epsilon(1e-9));
        if (v.size() > 1) CHECK(s.std == doctest::Approx(std::sqrt(var / (n - 1))).epsilon(1e-9));
        CHECK(s.min == sorted.front());
        CHECK(s.max == sorted.back());
        CHECK(s.q25 == doctest::Approx(q(0.25)).epsilon(1e-9));
        CHECK(s.q50 == doctest::Approx(q(0.5)).epsilon(1e-9));
        CHECK(s.q75 == doctest::Approx(q(0.75)).epsilon(1e-9));
    }
}

TEST_CASE("markdown rendering respects the token budget and parses back") {
    auto t = dataset::parse_table(small_csv, "t");
    auto r = execute(parse_query("SELECT name, x FROM t"), t);
    auto md = render_markdown(r, 4000);
    auto back = parse_markdown_table(md);
    REQUIRE(back);
    CHECK(back->header == std::vector<std::string>{"name", "x"});
    REQUIRE(back->rows.size() == 4);
    CHECK(back->rows[0] == std::vector<std::string>{"10", "A", "3"});
    CHECK(back->rows[2][2] == "");
    CHECK_THROWS_AS(render_markdown(r, 5), TokenBudgetExceeded);
}

TEST_CASE("retries feed errors back to the planner") {
    auto t = dataset::parse_table(small_csv, "t");
    std::vector<std::optional<std::string>> seen;
    Planner planner = [&](std::string_view, const std::optional<std::string>& err) {
        seen.push_back(err);
        return seen.size() == 1 ? std::string("SELECT nmae FROM t") : std::string("SELECT name FROM t LIMIT 1");
    };
    auto got = run_with_retries("q", t, planner);
    CHECK(got.attempts == 2);
    REQUIRE(seen.size() == 2);
    CHECK_FALSE(seen[0]);
    REQUIRE(seen[1]);
    CHECK(seen[1]->find("nmae") != std::string::npos);

    Planner hopeless = [](std::string_view, const std::optional<std::string>&) { return std::string("SELEC"); };
    CHECK_THROWS_AS(run_with_retries("q", t, hopeless, 3), RetriesExhausted);

    Planner huge = [](std::string_view, const std::optional<std::string>&) { return std::string("SELECT * FROM t"); };
    int calls = 0;
    Planner counting = [&](std::string_view q, const std::optional<std::string>& e) {
        ++calls;
        return huge(q, e);
    };
    CHECK_THROWS_AS(run_with_retries("q", t, counting, 3, 5), TokenBudgetExceeded);
    CHECK(calls == 1);
}

// ---------------------------------------------------------------------------
// Oracle equivalence: random tables and random valid plans against a naive
// evaluator written independently of the engine.

using namespace testing::query_ref;


TEST_CASE("1,000 random queries match the reference evaluator") {
    auto start = std::chrono::steady_clock::now();
    auto res = run_query_oracle(1000, 1000);
    for (const auto& q : res.mismatches) FAIL_CHECK("mismatch on " << q);
    CHECK(res.cases == 1000);
    CHECK(res.mismatches.empty());
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("1000 cases in " << secs << " s");
    CHECK(secs < 30);
}

TEST_CASE("format_query is a fixed point of parse") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 300; ++i) {
        auto rt = random_table(rng);
        auto plan = parse_query(to_query(rt, random_plan(rt, rng)));
        CHECK(parse_query(format_query(plan)) == plan);
    }
}
