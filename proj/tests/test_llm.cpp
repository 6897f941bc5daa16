#include "mofsmith/llm.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <sstream>
#include <thread>

using namespace mofsmith;
using namespace mofsmith::llm;
using nlohmann::json;

namespace {

CompletionRequest ask(std::string question, std::string user = "Question: q\nThought:") {
    CompletionRequest r;
    r.system_prompt = "system";
    r.user_prompt = std::move(user);
    r.question = std::move(question);
    return r;
}

} // namespace

TEST_CASE("requests are validated") {
    auto r = ask("q");
    CHECK_NOTHROW(r.validate());
    r.temperature = 2.5;
    CHECK_THROWS_AS(r.validate(), Error);
    r.temperature = 0;
    r.stop = {"a", "b", "c", "d", "e"};
    CHECK_THROWS_AS(r.validate(), Error);
    r.stop.clear();
    r.max_tokens = 0;
    CHECK_THROWS_AS(r.validate(), Error);
    CHECK(ask("q").prompt_text() == "system\n\nQuestion: q\nThought:");
}

TEST_CASE("completions stop at the earliest stop sequence") {
    CHECK(truncate_at_stop("a\nObservation: b\nThought:", {"\nThought:", "\nObservation:"}) == "a");
    CHECK(truncate_at_stop("nothing to cut", {"\nObservation:"}) == "nothing to cut");
    CHECK(truncate_at_stop("x", {""}) == "x");
}

TEST_CASE("scripted backend keys responses by question with one cursor per key") {
    auto b = ScriptedBackend::from_json(R"({"q1": ["a", "b"], "q2": "c"})");
    CHECK(b->generate(ask("q1")) == "a");
    CHECK(b->generate(ask("q2")) == "c");
    CHECK(b->generate(ask(" q1 ")) == "b");
    CHECK_THROWS_AS(b->generate(ask("q1")), NoScriptedResponse);
    CHECK_THROWS_AS(b->generate(ask("q2")), NoScriptedResponse);
    try {
        b->generate(ask("unknown"));
        FAIL("expected a miss");
    } catch (const NoScriptedResponse& e) {
        CHECK(e.digest() == text::hex_digest("unknown"));
    }
}

TEST_CASE("scripted keys may be digests, and the prompt's question line is the fallback key") {
    json script = {{text::hex_digest("What is X?"), {"hashed"}}, {"From prompt", {"found"}}};
    auto b = ScriptedBackend::from_json(script.dump());
    CHECK(b->generate(ask("What is X?")) == "hashed");
    CHECK(b->generate(ask("", "Tools...\nQuestion: From prompt\nThought:")) == "found");
}

TEST_CASE("malformed scripts are backend errors") {
    CHECK_THROWS_AS(ScriptedBackend::from_json("[1, 2]"), BackendUnavailable);
    CHECK_THROWS_AS(ScriptedBackend::from_json(R"({"q": [1]})"), BackendUnavailable);
    CHECK_THROWS_AS(ScriptedBackend::from_json("{"), BackendUnavailable);
    CHECK_THROWS_AS(ScriptedBackend::from_file("/nonexistent/script.json"), BackendUnavailable);
}

TEST_CASE("replay backend serves completions in order") {
    auto b = ReplayBackend::from_jsonl(
        "{\"role\":\"prompt\",\"content\":\"p1\"}\n{\"role\":\"completion\",\"content\":\"c1\"}\n\n"
        "{\"role\":\"completion\",\"content\":\"c2\"}\n");
    CHECK(b->remaining() == 2);
    CHECK(b->generate(ask("x")) == "c1");
    CHECK(b->generate(ask("y")) == "c2");
    CHECK_THROWS_AS(b->generate(ask("z")), NoScriptedResponse);
    CHECK_THROWS_AS(ReplayBackend::from_jsonl("{\"role\":\"assistant\"}"), BackendUnavailable);
    CHECK_THROWS_AS(ReplayBackend::from_jsonl("not json"), BackendUnavailable);
}

TEST_CASE("recording then replaying reproduces the completions") {
    auto scripted = ScriptedBackend::from_json(R"({"q": ["one", "two"]})");
    std::ostringstream log;
    RecordingBackend rec(*scripted, log);
    CHECK(rec.generate(ask("q")) == "one");
    CHECK(rec.generate(ask("q")) == "two");
    auto replay = ReplayBackend::from_jsonl(log.str());
    CHECK(replay->generate(ask("other")) == "one");
    CHECK(replay->generate(ask("other")) == "two");
    auto first = json::parse(log.str().substr(0, log.str().find('\n')));
    CHECK(first["role"] == "prompt");
    CHECK(first["content"] == "system\n\nQuestion: q\nThought:");
}

TEST_CASE("chat request body and response parsing") {
    HttpConfig c;
    c.model = "m";
    auto r = ask("q");
    r.stop = {"\nObservation:"};
    auto body = json::parse(chat_request_body(c, r));
    CHECK(body["model"] == "m");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "Question: q\nThought:");
    CHECK(body["stop"][0] == "\nObservation:");
    CHECK(body["temperature"] == doctest::Approx(0.1));
    CHECK(parse_chat_response(R"({"choices":[{"message":{"content":"hi"}}]})") == "hi");
    CHECK_THROWS_AS(parse_chat_response(R"({"error":{"message":"quota"}})"), BackendUnavailable);
    CHECK_THROWS_AS(parse_chat_response("{}"), BackendUnavailable);
}

TEST_CASE("http backend against a local mock server") {
    httplib::Server server;
    std::string seen_auth, seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(R"({"choices":[{"message":{"content":" canned\nAction: search_csv"}}]})", "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.api_key = "k";
    c.model = "m";
    HttpBackend b(c);
    auto r = ask("q");
    r.stop = {"\nAction:"};
    CHECK(complete(b, r) == " canned");
    CHECK(seen_auth == "Bearer k");
    CHECK(json::parse(seen_body)["model"] == "m");

    c.url = "http://127.0.0.1:" + std::to_string(port) + "/broken";
    HttpBackend broken(c);
    CHECK_THROWS_AS(broken.generate(r), BackendUnavailable);

    server.stop();
    t.join();

    c.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.timeout_seconds = 2;
    HttpBackend down(c);
    CHECK_THROWS_AS(down.generate(r), BackendUnavailable);
    CHECK_THROWS_AS(HttpBackend{HttpConfig{}}, BackendUnavailable);
    HttpConfig bad;
    bad.url = "no-scheme";
    CHECK_THROWS_AS(HttpBackend{bad}, BackendUnavailable);
}

TEST_CASE("default estimate is the byte heuristic") {
    auto b = ScriptedBackend::from_json("{}");
    CHECK(b->estimate("abcdefgh") == 2);
}
