#include "mofsmith/cli.hpp"

#include "support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <sstream>
#include <thread>

using namespace mofsmith;
using namespace mofsmith::cli;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "mofsmith");
    std::istringstream in(input);
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string data_arg() { return testing::data_dir().string(); }

} // namespace

TEST_CASE("settings precedence: flags > env > config > defaults") {
    auto s = resolve_settings({}, {}, "");
    CHECK(s.backend == "rules");
    CHECK(s.budget == 4000);
    CHECK(s.budget_mode == BudgetMode::session);

    std::string config = "# defaults for the lab\nbudget = 1000\nseed = 3\nbackend = \"scripted\"  # quoted\nport = 9000\n";
    s = resolve_settings({}, {}, config);
    CHECK(s.budget == 1000);
    CHECK(s.seed == 3);
    CHECK(s.backend == "scripted");

    s = resolve_settings({}, {{"budget", "2000"}, {"budget_mode", "per_call"}}, config);
    CHECK(s.budget == 2000);
    CHECK(s.budget_mode == BudgetMode::per_call);
    CHECK(s.port == 9000);

    s = resolve_settings({{"budget", "3000"}}, {{"budget", "2000"}}, config);
    CHECK(s.budget == 3000);
    CHECK(s.seed == 3);
}

TEST_CASE("bad settings are config errors") {
    CHECK_THROWS_AS(parse_config("colour = blue"), ConfigError);
    try {
        parse_config("budget = 5\nnot a pair\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(parse_config("script = \"a # b\"")["script"] == "a # b");
    CHECK_THROWS_AS(resolve_settings({{"backend", "oracle"}}, {}, ""), ConfigError);
    CHECK_THROWS_AS(resolve_settings({{"budget", "0"}}, {}, ""), ConfigError);
    CHECK_THROWS_AS(resolve_settings({{"budget", "-4"}}, {}, ""), ConfigError);
    CHECK_THROWS_AS(resolve_settings({{"budget_mode", "weekly"}}, {}, ""), ConfigError);
}

TEST_CASE("backend construction") {
    const auto& reg = testing::fixture_registry();
    auto s = resolve_settings({}, {}, "");
    CHECK(make_backend(s, reg)->name() == "rules");
    s.backend = "scripted";
    CHECK_THROWS_AS(make_backend(s, reg), ConfigError);
    s.script = (testing::data_dir() / "scripted" / "jukpai.json").string();
    CHECK(make_backend(s, reg)->name() == "scripted");
    CHECK_THROWS_AS(make_backend(s, reg, "replay"), ConfigError);
    CHECK(exit_code(OutcomeLabel::answered) == 0);
    CHECK(exit_code(OutcomeLabel::token_limit) == 2);
    CHECK(exit_code(OutcomeLabel::logic_error) == 3);
}

TEST_CASE("ask exit codes") {
    auto ok = run({"--data", data_arg(), "ask", "How high is the accessible surface area of JUKPAI?"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("Final Answer: ") != std::string::npos);
    CHECK(ok.out.find("1474.22") != std::string::npos);

    auto starved = run({"--data", data_arg(), "--budget", "10", "ask", "How high is the accessible surface area of JUKPAI?"});
    CHECK(starved.code == 2);

    auto miss = run({"--data", data_arg(), "--backend", "scripted", "--script",
                     (testing::data_dir() / "scripted" / "jukpai.json").string(), "ask", "Something unscripted"});
    CHECK(miss.code == 3);

    auto missing = run({"--data", "/nonexistent/data", "ask", "anything"});
    CHECK(missing.code == 1);
    CHECK(missing.err.rfind("error: ", 0) == 0);

    auto bad = run({"--backend", "oracle", "ask", "anything"});
    CHECK(bad.code == 1);
}

TEST_CASE("ask --json streams one event per line") {
    auto r = run({"--data", data_arg(), "ask", "--json", "How high is the accessible surface area of JUKPAI?"});
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::string line, last;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        auto e = json::parse(line);
        CHECK(e["seq"] == n);
        ++n;
        last = e["kind"];
    }
    CHECK(n > 3);
    CHECK(last == "final");
}

TEST_CASE("replay fixtures through the command line") {
    struct Case {
        const char* file;
        const char* question;
        const char* needle;
    };
    for (auto c : {Case{"jukpai.jsonl", "How high is the accessible surface area of JUKPAI?", "1474.22"},
                   Case{"xegkur.jsonl", "At room temperature (298K), what's the CO₂ Henry coefficient for XEGKUR?",
                        "0.026577507595890823"},
                   Case{"acogef.jsonl", "What is the surface area and bandgap of ACOGEF?", "3.41139 eV"}}) {
        auto r = run({"--data", data_arg(), "--backend", "replay", "--transcript",
                      (testing::data_dir() / "replay" / c.file).string(), "ask", c.question});
        CHECK(r.code == 0);
        CHECK(r.out.find(c.needle) != std::string::npos);
    }
}

TEST_CASE("record then replay") {
    auto dir = testing::scratch_dir("cli-record");
    auto log = (dir / "run.jsonl").string();
    auto a = run({"--data", data_arg(), "ask", "--record", log, "What is the density of JUKPAI?"});
    CHECK(a.code == 0);
    auto b = run({"--data", data_arg(), "--backend", "replay", "--transcript", log, "ask", "What is the density of JUKPAI?"});
    CHECK(b.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("chat reads questions until exit") {
    auto r = run({"--data", data_arg(), "chat"}, "What is the density of JUKPAI?\n\nexit\nnever asked\n");
    CHECK(r.code == 0);
    CHECK(r.out.find("Final Answer:") != std::string::npos);
    CHECK(r.out.find("never asked") == std::string::npos);
}

TEST_CASE("generate is reproducible for a seed") {
    auto dir = testing::scratch_dir("cli-generate");
    std::vector<std::string> args{"--data", data_arg(), "--seed", "7", "generate", "--property", "accessible_surface_area",
                                  "--objective", "max", "--parents", "20", "--children", "20", "--pool-size", "400"};
    auto first = args, second = args;
    first.insert(first.end(), {"--out", (dir / "a.json").string()});
    second.insert(second.end(), {"--out", (dir / "b.json").string()});
    auto a = run(first);
    auto b = run(second);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("generation 3: mean") != std::string::npos);
    CHECK(testing::read_file(dir / "a.json") == testing::read_file(dir / "b.json"));

    auto bad = run({"--data", data_arg(), "generate", "--property", "bandgap", "--objective", "max"});
    CHECK(bad.code == 1);
    auto mismatch = run({"--data", data_arg(), "generate", "--property", "accessible_surface_area"});
    CHECK(mismatch.code != 0);
}

TEST_CASE("predict prints a table and exports csv") {
    auto dir = testing::scratch_dir("cli-predict");
    auto r = run({"--data", data_arg(), "predict", "--property", "bandgap", "--material", "ACOGEF, XEGKUR", "--csv",
                  dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("| ACOGEF | 3.41139 |") != std::string::npos);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".csv";
    CHECK(files == 1);
    CHECK(run({"--data", data_arg(), "predict", "--property", "colour"}).code == 1);
}

TEST_CASE("tables lists the registry") {
    auto r = run({"--data", data_arg(), "tables"});
    CHECK(r.code == 0);
    CHECK(r.out.find("coremof_mini (50 rows, key name, searchable, primary)") != std::string::npos);
    CHECK(r.out.find("  Accessible Surface Area (m^2/cm^3) [number]") != std::string::npos);
    CHECK(r.out.find("properties") != std::string::npos);
}

TEST_CASE("eval prints a report") {
    auto dir = testing::scratch_dir("cli-eval");
    auto suite = dir / "two.jsonl";
    testing::write_file(suite,
                        "{\"id\": \"a\", \"task\": \"search\", \"question\": \"What is the pore limiting diameter of YUSGID?\", "
                        "\"expect\": {\"type\": \"numeric\", \"value\": 3.71515}}\n"
                        "{\"id\": \"b\", \"task\": \"search\", \"question\": \"What is the pore limiting diameter of YUSGID?\", "
                        "\"expect\": {\"type\": \"none\"}, \"budget\": 10}\n");
    auto r = run({"--data", data_arg(), "eval", "--suite", suite.string(), "--out", (dir / "report.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("true 1, token_limit 1, logic_error 0, unverified 0, accuracy 1") != std::string::npos);
    CHECK(json::parse(testing::read_file(dir / "report.json"))["accuracy"] == 1.0);

    testing::write_file(suite, "{broken\n");
    CHECK(run({"--data", data_arg(), "eval", "--suite", suite.string()}).code == 1);
}

TEST_CASE("unknown subcommands and flags") {
    CHECK(run({"fly"}).code != 0);
    CHECK(run({}).code != 0);
    CHECK(run({"--help"}).code == 0);
}

namespace {

struct LiveServer {
    ApiServer server;
    int port = 0;
    std::thread thread;

    explicit LiveServer(Settings s) : server(testing::fixture_registry(), std::move(s)) {
        port = server.bind_any_port();
        thread = std::thread([this] { server.listen(); });
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
};

} // namespace

TEST_CASE("api: sessions stream their events over SSE") {
    Settings s;
    s.data = data_arg();
    LiveServer live(s);
    auto c = live.client();
    // the listener may need a moment before the first request
    httplib::Result res;
    for (int i = 0; i < 50 && !(res = c.Get("/api/tables")); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    REQUIRE(res);
    CHECK(res->status == 200);
    auto tables = json::parse(res->body);
    CHECK(tables["tables"][0]["name"] == "coremof_mini");
    CHECK(tables["tables"][0]["rows"] == 50);

    auto created = c.Post("/api/sessions", R"({"question": "How high is the accessible surface area of JUKPAI?"})",
                          "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    std::string id = json::parse(created->body)["session_id"];
    CHECK(id.rfind("s-", 0) == 0);

    auto stream = c.Get("/api/sessions/" + id + "/events");
    REQUIRE(stream);
    CHECK(stream->get_header_value("Content-Type").rfind("text/event-stream", 0) == 0);
    const auto& body = stream->body;
    CHECK(body.rfind("event: ", 0) == 0);
    auto last = body.rfind("event: ");
    CHECK(body.substr(last, 12) == "event: final");
    CHECK(body.find("1474.22") != std::string::npos);

    CHECK(c.Get("/api/sessions/s-999/events")->status == 404);
    CHECK(c.Post("/api/sessions", "not json", "application/json")->status == 400);
    CHECK(c.Post("/api/sessions", R"({"question": 5})", "application/json")->status == 400);
    CHECK(c.Post("/api/sessions", R"({"question": "q", "backend": "oracle"})", "application/json")->status == 400);
}

TEST_CASE("api: GA runs and summaries") {
    Settings s;
    s.data = data_arg();
    LiveServer live(s);
    auto c = live.client();
    httplib::Result res;
    json req = {{"plan", "Property: accessible_surface_area\nObjective: max"},
                {"config", {{"cycles", 2}, {"parents", 10}, {"children", 10}, {"pool_size", 400}, {"seed", 1}}}};
    for (int i = 0; i < 50 && !(res = c.Post("/api/ga", req.dump(), "application/json")); ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    REQUIRE(res);
    CHECK(res->status == 201);
    std::string id = json::parse(res->body)["run_id"];
    auto summary = c.Get("/api/ga/" + id + "/summary");
    REQUIRE(summary);
    CHECK(summary->status == 200);
    CHECK(json::parse(summary->body)["generations"].size() == 3);

    json structured = {{"plan", {{"properties", {"accessible_surface_area"}}, {"objectives", {"near 3000"}}}},
                       {"config", {{"cycles", 1}, {"parents", 5}, {"children", 5}}}};
    CHECK(c.Post("/api/ga", structured.dump(), "application/json")->status == 201);
    CHECK(c.Get("/api/ga/ga-999/summary")->status == 404);
    CHECK(c.Post("/api/ga", R"({"plan": "Property: bandgap\nObjective: max"})", "application/json")->status == 400);
    CHECK(c.Get("/api/nowhere")->status == 404);
}
