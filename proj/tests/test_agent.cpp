#include "mofsmith/agent.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <numeric>

using namespace mofsmith;
using namespace mofsmith::agent;

TEST_CASE("parse_react reads an action step") {
    auto s = parse_react(" I need the ASA\nAction: search_csv\nAction Input: \"Search name JUKPAI\"\n");
    CHECK(s.thought == "I need the ASA");
    CHECK(s.action == "search_csv");
    CHECK(s.action_input == "Search name JUKPAI");
    CHECK_FALSE(s.is_final);
}

TEST_CASE("parse_react reads a final step") {
    auto s = parse_react(" I now know the final answer\nFinal Answer: It is 1474.22 m²/cm³.\nMore detail.");
    CHECK(s.is_final);
    CHECK(s.thought == "I now know the final answer");
    CHECK(s.final_answer == "It is 1474.22 m²/cm³.\nMore detail.");
}

TEST_CASE("parse_react takes fenced multi-line input") {
    auto s = parse_react("convert\nAction: Python_REPL\nAction Input:\n```python\nimport math\n\nprint(math.exp(-3.62769))\n```\n");
    CHECK(s.action == "Python_REPL");
    REQUIRE(s.action_input);
    CHECK(s.action_input->find("print(math.exp(-3.62769))") != std::string::npos);
    CHECK(calculator_expression(*s.action_input) == "exp(-3.62769)");
}

TEST_CASE("parse_react accepts an explicit Thought line and stops input at a blank line") {
    auto s = parse_react("Thought: look it up\nAction: search_csv\nAction Input: first line\n\ntrailing text");
    CHECK(s.thought == "look it up");
    CHECK(s.action_input == "first line");
}

TEST_CASE("parse_react rejects malformed turns") {
    CHECK_THROWS_AS(parse_react("just rambling"), MissingKeyword);
    CHECK_THROWS_AS(parse_react("x\nAction Input: y"), MissingKeyword);
    try {
        parse_react("x\nAction: search_csv\n");
        FAIL("expected a missing keyword");
    } catch (const MissingKeyword& e) {
        CHECK(e.which() == "Action Input");
    }
    CHECK_THROWS_AS(parse_react("x\nAction: a\nAction Input: b\nFinal Answer: c"), AmbiguousStep);
}

TEST_CASE("calculator input normalization") {
    CHECK(calculator_expression("print(math.exp(-3.62769))") == "exp(-3.62769)");
    CHECK(calculator_expression("```\nimport numpy as np\nnp.sqrt(16)\n```") == "sqrt(16)");
    CHECK(calculator_expression("\"2 + 2\"") == "2 + 2");
}

TEST_CASE("final hint is appended and stripped") {
    auto obs = "The value is 3. " + final_hint();
    CHECK(strip_final_hint(obs) == "The value is 3.");
    CHECK(strip_final_hint("plain") == "plain");
}

TEST_CASE("tool registry rejects duplicates and resolves aliases") {
    auto tools = default_tools();
    CHECK(tools.find("calculator"));
    CHECK(tools.find("Python_REPL") == tools.find("calculator"));
    CHECK_FALSE(tools.find("nope"));
    CHECK_THROWS_AS(tools.add({"search_csv", "dup", {}}), Error);
    CHECK_THROWS_AS(tools.add({"fresh", "dup alias", {}, {"Python_REPL"}}), Error);
    auto names = tools.names();
    for (const char* n : {"search_csv", "predictor", "generator", "calculator", "structure_info", "internet_search"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("events and traces round-trip through JSON") {
    TraceEvent e{"s-1", 3, EventKind::observation, "table_searcher", "| a |\n\"q\"", 17};
    CHECK(event_from_json(event_json(e)) == e);
    for (auto k : {EventKind::thought, EventKind::action, EventKind::observation, EventKind::final, EventKind::error})
        CHECK(parse_event_kind(to_string(k)) == k);

    AgentTrace t;
    t.session_id = "s-1";
    t.question = "q";
    t.steps.push_back(parse_react("a\nAction: calculator\nAction Input: 1+1"));
    t.steps.back().observation = "2";
    t.steps.push_back(parse_react("I now know the final answer\nFinal Answer: 2"));
    t.events = {e};
    t.token_used = 10;
    t.token_limit = 4000;
    t.wall_time = std::chrono::milliseconds(5);
    CHECK(trace_from_json(trace_json(t)) == t);
    auto untimed = trace_from_json(trace_json(t, false));
    CHECK(untimed.wall_time.count() == 0);
}

TEST_CASE("scratchpad layout") {
    std::vector<AgentStep> steps{parse_react("a\nAction: calculator\nAction Input: 1+1")};
    steps[0].observation = "2";
    steps.push_back(parse_react("I now know the final answer\nFinal Answer: 2"));
    CHECK(render_scratchpad(steps) ==
          "Thought: a\nAction: calculator\nAction Input: 1+1\nObservation: 2\n"
          "Thought: I now know the final answer\nFinal Answer: 2\n");
}

TEST_CASE("pretty printer prefixes sub-agent events") {
    CHECK(pretty_event({"s", 0, EventKind::thought, "table_searcher", "x", 0}) == "[Table Searcher] Thought: x");
    CHECK(pretty_event({"s", 0, EventKind::final, "agent", "y", 0}) == "Final Answer: y");
    CHECK(pretty_event({"s", 0, EventKind::error, "agent", "z", 0}) == "Error: z");
}

namespace {

struct Run {
    Outcome outcome;
    std::size_t budget_used = 0;
};

Run run_script(const std::string& script, const std::string& question, const dataset::Registry& registry,
               std::size_t budget = 4000) {
    auto backend = llm::ScriptedBackend::from_file(testing::data_dir() / "scripted" / script);
    TokenBudget b(budget);
    Run r;
    r.outcome = run_session(question, default_tools(), registry, *backend, b);
    r.budget_used = b.used();
    return r;
}

std::size_t event_tokens(const AgentTrace& t) {
    return std::accumulate(t.events.begin(), t.events.end(), std::size_t{0},
                           [](std::size_t s, const TraceEvent& e) { return s + e.tokens; });
}

const char* jukpai_q = "How high is the accessible surface area of JUKPAI?";
const char* xegkur_q = "At room temperature (298K), what's the CO₂ Henry coefficient for XEGKUR?";
const char* acogef_q = "What is the surface area and bandgap of ACOGEF?";
const char* yusgid_q = "How does the pore limiting diameter of YUSGID_clean compare with other materials?";

} // namespace

TEST_CASE("JUKPAI table search session") {
    auto r = run_script("jukpai.json", jukpai_q, testing::fixture_registry());
    CHECK(r.outcome.label == OutcomeLabel::answered);
    REQUIRE(r.outcome.answer);
    CHECK(r.outcome.answer->find("1474.22 m²/cm³") != std::string::npos);
    CHECK(r.outcome.trace.token_used == r.budget_used);
    CHECK(event_tokens(r.outcome.trace) == r.budget_used);
    CHECK(r.budget_used < 4000);
    // The searcher observation shows the index label of the row.
    bool saw = false;
    for (const auto& e : r.outcome.trace.events)
        saw = saw || (e.source == "table_searcher" && e.kind == EventKind::observation &&
                      e.payload.find("| 4837 | 1474.22 |") != std::string::npos);
    CHECK(saw);
}

TEST_CASE("XEGKUR prediction session goes search -> predictor -> calculator") {
    auto r = run_script("xegkur.json", xegkur_q, testing::fixture_registry());
    CHECK(r.outcome.label == OutcomeLabel::answered);
    const auto& steps = r.outcome.trace.steps;
    REQUIRE(steps.size() == 4);
    CHECK(steps[0].action == "search_csv");
    CHECK(steps[0].observation->find("did not provide any information") != std::string::npos);
    CHECK(steps[1].action == "predictor");
    CHECK(steps[1].observation->find("-3.62769") != std::string::npos);
    CHECK(steps[1].observation->find("logarithmic value") != std::string::npos);
    CHECK(steps[2].action == "Python_REPL");
    CHECK(steps[2].observation == "0.026577507595890823");
    CHECK(r.outcome.answer->find("0.027") != std::string::npos);
    CHECK(event_tokens(r.outcome.trace) == r.budget_used);
}

TEST_CASE("ACOGEF two-property session") {
    auto r = run_script("acogef.json", acogef_q, testing::fixture_registry());
    CHECK(r.outcome.label == OutcomeLabel::answered);
    CHECK(r.outcome.answer->find("3.41139 eV") != std::string::npos);
    CHECK(r.outcome.answer->find("1138.35 m²/g") != std::string::npos);
    CHECK(r.outcome.trace.steps[1].observation->rfind(
              "The search_csv tool did not provide any information on the bandgap of ACOGEF.", 0) == 0);
}

TEST_CASE("whole-table select on a large table hits the token limit; describe does not") {
    auto root = testing::make_big_dataset("agent-big");
    auto registry = dataset::load_registry(root);
    auto full = run_script("yusgid_select_all.json", yusgid_q, registry);
    CHECK(full.outcome.label == OutcomeLabel::token_limit);
    CHECK_FALSE(full.outcome.answer);
    CHECK(full.outcome.trace.events.back().kind == EventKind::error);
    CHECK(full.outcome.trace.events.back().payload.rfind("token_limit: ", 0) == 0);
    CHECK(event_tokens(full.outcome.trace) == full.budget_used);
    CHECK(full.budget_used <= 4000);

    auto described = run_script("yusgid_describe.json", yusgid_q, registry);
    CHECK(described.outcome.label == OutcomeLabel::answered);
    CHECK(described.outcome.trace.steps[0].observation->find("3.71515") != std::string::npos);
    bool stats = false;
    for (const auto& e : described.outcome.trace.events)
        stats = stats || (e.kind == EventKind::observation && e.payload.find("| count | 12020 |") != std::string::npos);
    CHECK(stats);
}

TEST_CASE("per-call budget mode lets the same select through the window") {
    auto root = testing::make_big_dataset("agent-big-percall", 400);
    auto registry = dataset::load_registry(root);
    auto backend = llm::ScriptedBackend::from_file(testing::data_dir() / "scripted" / "yusgid_select_all.json");
    TokenBudget session_budget(4000);
    auto a = run_session(yusgid_q, default_tools(), registry, *backend, session_budget);
    CHECK(a.label == OutcomeLabel::token_limit);
}

TEST_CASE("replays are deterministic and match the golden scratchpad") {
    auto once = [] {
        auto b = llm::ReplayBackend::from_file(testing::data_dir() / "replay" / "jukpai.jsonl");
        TokenBudget budget(4000);
        return run_session(jukpai_q, default_tools(), testing::fixture_registry(), *b, budget);
    };
    auto a = once();
    auto b = once();
    CHECK(a.label == OutcomeLabel::answered);
    CHECK(trace_json(a.trace, false) == trace_json(b.trace, false));

    auto golden = testing::data_dir() / "replay" / "jukpai.scratchpad.txt";
    auto pad = render_scratchpad(a.trace);
    if (std::getenv("MOFSMITH_UPDATE_GOLDEN")) testing::write_file(golden, pad);
    CHECK(pad == testing::read_file(golden));
}

TEST_CASE("unknown tools and backend misses are logic errors") {
    auto backend = llm::ScriptedBackend::from_json(R"({"q": [" hmm\nAction: teleport\nAction Input: x"]})");
    TokenBudget b(4000);
    auto out = run_session("q", default_tools(), testing::fixture_registry(), *backend, b);
    CHECK(out.label == OutcomeLabel::logic_error);
    CHECK(out.error.find("teleport") != std::string::npos);

    auto empty = llm::ScriptedBackend::from_json("{}");
    TokenBudget b2(4000);
    CHECK(run_session("q", default_tools(), testing::fixture_registry(), *empty, b2).label ==
          OutcomeLabel::logic_error);
}

TEST_CASE("format errors are fed back as observations") {
    auto backend = llm::ScriptedBackend::from_json(
        R"({"q": ["I am not following the format", " I now know the final answer\nFinal Answer: 4"]})");
    TokenBudget b(4000);
    auto out = run_session("q", default_tools(), testing::fixture_registry(), *backend, b);
    CHECK(out.label == OutcomeLabel::answered);
    REQUIRE(out.trace.steps.size() == 2);
    CHECK(out.trace.steps[0].action == "_Exception");
    CHECK(out.trace.steps[0].observation->find("Invalid Format") != std::string::npos);
}

TEST_CASE("step limit and repeated tool errors end in logic_error") {
    auto loop = llm::ScriptedBackend::from_json(
        R"({"q": [" a\nAction: calculator\nAction Input: 1+1", " a\nAction: calculator\nAction Input: 1+1",
                  " a\nAction: calculator\nAction Input: 1+1"]})");
    TokenBudget b(4000);
    AgentConfig config;
    config.max_steps = 3;
    auto out = run_session("q", default_tools(), testing::fixture_registry(), *loop, b, config);
    CHECK(out.label == OutcomeLabel::logic_error);
    CHECK(out.trace.steps.size() == 3);

    auto broken = llm::ScriptedBackend::from_json(
        R"js({"q": [" a\nAction: calculator\nAction Input: 1/0", " a\nAction: calculator\nAction Input: sqrt(-1)"]})js");
    TokenBudget b2(4000);
    auto out2 = run_session("q", default_tools(), testing::fixture_registry(), *broken, b2);
    CHECK(out2.label == OutcomeLabel::logic_error);
    REQUIRE(out2.trace.steps.size() == 1);
    CHECK(out2.trace.steps[0].observation->rfind("Error: ", 0) == 0);
}

TEST_CASE("tiny budgets end in token_limit with every charge accounted") {
    auto backend = llm::ScriptedBackend::from_file(testing::data_dir() / "scripted" / "jukpai.json");
    TokenBudget b(10);
    auto out = run_session(jukpai_q, default_tools(), testing::fixture_registry(), *backend, b);
    CHECK(out.label == OutcomeLabel::token_limit);
    CHECK(event_tokens(out.trace) == b.used());
}

TEST_CASE("events stream to the sink in order") {
    auto backend = llm::ScriptedBackend::from_file(testing::data_dir() / "scripted" / "jukpai.json");
    TokenBudget b(4000);
    std::vector<TraceEvent> seen;
    auto out = run_session(jukpai_q, default_tools(), testing::fixture_registry(), *backend, b, {},
                           [&](const TraceEvent& e) { seen.push_back(e); }, "fixed-id");
    CHECK(seen == out.trace.events);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        CHECK(seen[i].seq == i);
        CHECK(seen[i].session_id == "fixed-id");
    }
    CHECK(seen.back().kind == EventKind::final);
}

TEST_CASE("structure_info and calculator tools") {
    auto tools = default_tools();
    auto backend = llm::ScriptedBackend::from_json("{}");
    TokenBudget b(4000);
    Session s("s", *backend, b);
    AgentConfig config;
    config.data_root = testing::data_dir();
    ToolContext ctx{testing::fixture_registry(), s, config, "q"};
    auto info = tools.find("structure_info")->handler("cif/cube.cif", ctx);
    CHECK(info.find("1000") != std::string::npos);
    CHECK(tools.find("calculator")->handler("exp(-3.62769)", ctx) == "0.026577507595890823");
    CHECK_THROWS_AS(tools.find("calculator")->handler("1/0", ctx), Error);
}
