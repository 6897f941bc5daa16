#include "mofsmith/agent.hpp"

#include "mofsmith/prompts.hpp"

#include <json.hpp>

#include <algorithm>

namespace mofsmith::agent {

using nlohmann::json;

namespace {

enum class Key { thought, action, action_input, final_answer };

struct Mark {
    Key key;
    std::size_t line;
    std::string rest;
};

std::optional<std::pair<Key, std::string>> keyword(std::string_view line) {
    static constexpr std::pair<std::string_view, Key> keys[] = {{"Final Answer:", Key::final_answer},
                                                                {"Action Input:", Key::action_input},
                                                                {"Action:", Key::action},
                                                                {"Thought:", Key::thought}};
    auto l = line;
    while (!l.empty() && (l.front() == ' ' || l.front() == '\t')) l.remove_prefix(1);
    for (auto [k, key] : keys)
        if (text::starts_with(l, k)) return std::pair{key, std::string(l.substr(k.size()))};
    return std::nullopt;
}

std::string strip_quotes(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        s = text::trim(s.substr(1, s.size() - 2));
    return std::string(s);
}

} // namespace

AgentStep parse_react(std::string_view src) {
    auto lines = text::split(src, '\n');
    std::vector<Mark> marks;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (auto k = keyword(lines[i])) marks.push_back({k->first, i, k->second});
    if (marks.empty()) throw MissingKeyword("Thought");

    auto section = [&](std::size_t m) {
        std::string out = marks[m].rest;
        std::size_t end = m + 1 < marks.size() ? marks[m + 1].line : lines.size();
        for (std::size_t i = marks[m].line + 1; i < end; ++i) out += "\n" + lines[i];
        return std::string(text::trim(out));
    };
    auto find = [&](Key k) -> std::optional<std::size_t> {
        for (std::size_t m = 0; m < marks.size(); ++m)
            if (marks[m].key == k) return m;
        return std::nullopt;
    };

    AgentStep step;
    std::string leading;
    for (std::size_t i = 0; i < marks.front().line; ++i) leading += (i ? "\n" : "") + lines[i];
    step.thought = std::string(text::trim(leading));
    if (auto t = find(Key::thought); t && step.thought.empty()) step.thought = section(*t);

    auto action = find(Key::action);
    auto final = find(Key::final_answer);
    if (action && final) throw AmbiguousStep();
    if (final) {
        std::string out = marks[*final].rest;
        for (std::size_t i = marks[*final].line + 1; i < lines.size(); ++i) out += "\n" + lines[i];
        step.is_final = true;
        step.final_answer = std::string(text::trim(out));
        return step;
    }
    if (!action) throw MissingKeyword("Action");
    auto input = find(Key::action_input);
    if (!input) throw MissingKeyword("Action Input");
    step.action = std::string(text::trim(marks[*action].rest));
    if (step.action->empty()) throw MissingKeyword("Action");

    // Input runs to a blank line; a fenced block runs to its closing fence.
    std::string body = marks[*input].rest;
    bool fenced = text::starts_with(text::trim(body), "```");
    std::size_t fences = fenced ? 1 : 0;
    if (fenced && text::trim(body).size() > 3 && text::trim(body).substr(3).find("```") != std::string_view::npos) fences = 2;
    std::size_t i = marks[*input].line + 1;
    if (text::trim(body).empty() && i < lines.size() && text::starts_with(text::trim(lines[i]), "```")) {
        fenced = true;
    }
    for (; i < lines.size(); ++i) {
        auto l = text::trim(lines[i]);
        if (!fenced && l.empty()) break;
        if (keyword(lines[i]) && !(fenced && fences % 2 == 1)) break;
        if (fenced && fences >= 2 && l.empty()) break;
        if (text::starts_with(l, "```")) ++fences;
        body += "\n" + lines[i];
    }
    step.action_input = strip_quotes(body);
    return step;
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::thought: return "thought";
    case EventKind::action: return "action";
    case EventKind::observation: return "observation";
    case EventKind::final: return "final";
    case EventKind::error: return "error";
    }
    return "thought";
}

EventKind parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::thought, EventKind::action, EventKind::observation, EventKind::final, EventKind::error})
        if (to_string(k) == s) return k;
    throw Error("unknown event kind '" + std::string(s) + "'");
}

std::string render_scratchpad(const std::vector<AgentStep>& steps) {
    std::string out;
    for (const auto& s : steps) {
        out += "Thought: " + s.thought + "\n";
        if (s.is_final) {
            out += "Final Answer: " + s.final_answer.value_or("") + "\n";
            continue;
        }
        if (s.action) out += "Action: " + *s.action + "\n";
        if (s.action_input) out += "Action Input: " + *s.action_input + "\n";
        if (s.observation) out += "Observation: " + *s.observation + "\n";
    }
    return out;
}

std::string render_scratchpad(const AgentTrace& trace) { return render_scratchpad(trace.steps); }

namespace {

json event_to_json(const TraceEvent& e) {
    return {{"session_id", e.session_id}, {"seq", e.seq},         {"kind", to_string(e.kind)},
            {"source", e.source},         {"payload", e.payload}, {"tokens", e.tokens}};
}

TraceEvent event_of(const json& j) {
    TraceEvent e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::size_t>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.source = j.value("source", std::string("agent"));
    e.payload = j.at("payload").get<std::string>();
    e.tokens = j.at("tokens").get<std::size_t>();
    return e;
}

json optional_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_of(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

json trace_to_json(const AgentTrace& t, bool with_timing) {
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back({{"thought", s.thought},
                         {"action", optional_json(s.action)},
                         {"action_input", optional_json(s.action_input)},
                         {"observation", optional_json(s.observation)},
                         {"is_final", s.is_final},
                         {"final_answer", optional_json(s.final_answer)}});
    json events = json::array();
    for (const auto& e : t.events) events.push_back(event_to_json(e));
    json j{{"session_id", t.session_id}, {"question", t.question},      {"steps", steps},
           {"events", events},           {"token_used", t.token_used}, {"token_limit", t.token_limit}};
    if (with_timing) j["wall_time_ms"] = t.wall_time.count();
    return j;
}

} // namespace

std::string event_json(const TraceEvent& e) { return event_to_json(e).dump(); }

TraceEvent event_from_json(std::string_view line) {
    try {
        return event_of(json::parse(line));
    } catch (const json::exception& ex) {
        throw Error(std::string("malformed trace event: ") + ex.what());
    }
}

std::string trace_json(const AgentTrace& trace, bool with_timing) { return trace_to_json(trace, with_timing).dump(); }

AgentTrace trace_from_json(std::string_view src) {
    try {
        auto j = json::parse(src);
        AgentTrace t;
        t.session_id = j.at("session_id").get<std::string>();
        t.question = j.at("question").get<std::string>();
        for (const auto& s : j.at("steps")) {
            AgentStep step;
            step.thought = s.at("thought").get<std::string>();
            step.action = optional_of(s, "action");
            step.action_input = optional_of(s, "action_input");
            step.observation = optional_of(s, "observation");
            step.is_final = s.at("is_final").get<bool>();
            step.final_answer = optional_of(s, "final_answer");
            t.steps.push_back(std::move(step));
        }
        for (const auto& e : j.at("events")) t.events.push_back(event_of(e));
        t.token_used = j.at("token_used").get<std::size_t>();
        t.token_limit = j.at("token_limit").get<std::size_t>();
        t.wall_time = std::chrono::milliseconds(j.value("wall_time_ms", 0));
        return t;
    } catch (const json::exception& ex) {
        throw Error(std::string("malformed trace: ") + ex.what());
    }
}

std::string outcome_json(const Outcome& o, bool with_timing) {
    json j{{"label", to_string(o.label)},
           {"answer", optional_json(o.answer)},
           {"error", o.error},
           {"trace", trace_to_json(o.trace, with_timing)}};
    return j.dump();
}

std::string pretty_event(const TraceEvent& e) {
    std::string prefix;
    if (e.source == "table_searcher") prefix = "[Table Searcher] ";
    else if (e.source == "predictor") prefix = "[predictor] ";
    else if (e.source == "generator") prefix = "[generator] ";
    switch (e.kind) {
    case EventKind::thought:
        if (text::starts_with(e.payload, "Final Thought:") || text::starts_with(e.payload, "Thought:"))
            return prefix + e.payload;
        return prefix + "Thought: " + e.payload;
    case EventKind::action: return prefix + e.payload;
    case EventKind::observation: return prefix + "Observation: " + e.payload;
    case EventKind::final: return "Final Answer: " + e.payload;
    case EventKind::error: return "Error: " + e.payload;
    }
    return e.payload;
}

Session::Session(std::string id, llm::Backend& backend, TokenBudget& budget, EventSink sink)
    : id_(std::move(id)), backend_(backend), budget_(budget), sink_(std::move(sink)) {}

std::string Session::call(llm::CompletionRequest request) {
    budget_.begin_call();
    auto estimate = [this](std::string_view s) { return backend_.estimate(s); };
    pending_ += charge(budget_, request.prompt_text(), estimate);
    auto out = llm::complete(backend_, request);
    pending_ += charge(budget_, out, estimate);
    return out;
}

void Session::charge_text(std::string_view text) {
    pending_ += charge(budget_, text, [this](std::string_view s) { return backend_.estimate(s); });
}

const TraceEvent& Session::emit(EventKind kind, std::string source, std::string payload) {
    TraceEvent e;
    e.session_id = id_;
    e.seq = events_.size();
    e.kind = kind;
    e.source = std::move(source);
    e.payload = std::move(payload);
    e.tokens = pending_;
    pending_ = 0;
    events_.push_back(std::move(e));
    if (sink_) sink_(events_.back());
    return events_.back();
}

void ToolRegistry::add(ToolDescriptor tool) {
    if (find(tool.name)) throw Error("tool '" + tool.name + "' registered twice");
    for (const auto& a : tool.aliases)
        if (find(a)) throw Error("tool alias '" + a + "' registered twice");
    tools_.push_back(std::move(tool));
}

const ToolDescriptor* ToolRegistry::find(std::string_view name) const noexcept {
    for (const auto& t : tools_) {
        if (t.name == name) return &t;
        for (const auto& a : t.aliases)
            if (a == name) return &t;
    }
    return nullptr;
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& t : tools_) out.push_back(t.name);
    return out;
}

const std::string& final_hint() {
    static const std::string s =
        "Check to see if this answer can be your final answer, and if so, you should submit your final answer.";
    return s;
}

std::string strip_final_hint(std::string_view obs) {
    auto p = obs.find(final_hint());
    if (p != std::string_view::npos) obs = obs.substr(0, p);
    return std::string(text::trim(obs));
}

namespace {

// The evaluator: a model that says it knows the answer but omits "Final Answer:" gets
// an answer from its own "Answer:" line or, failing that, the last observation.
std::optional<std::string> evaluate(std::string_view completion, const std::vector<AgentStep>& steps) {
    if (text::lower(completion).find("i now know the final answer") == std::string::npos) return std::nullopt;
    for (const auto& line : text::split(completion, '\n')) {
        auto l = text::trim(line);
        if (!text::starts_with(l, "Answer")) continue;
        auto rest = text::trim(l.substr(6));
        if (!rest.empty() && rest.front() == ':') return std::string(text::trim(rest.substr(1)));
    }
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
        if (it->observation && !text::starts_with(*it->observation, "Error:") &&
            !text::starts_with(*it->observation, "Invalid Format"))
            return strip_final_hint(*it->observation);
    return std::nullopt;
}

} // namespace

Outcome run_session(std::string_view question, const ToolRegistry& tools, const dataset::Registry& registry,
                    llm::Backend& backend, TokenBudget& budget, const AgentConfig& config, const EventSink& sink,
                    std::string session_id) {
    auto start = std::chrono::steady_clock::now();
    if (session_id.empty()) session_id = "s-" + text::hex_digest(question);
    Session session(session_id, backend, budget, sink);
    Outcome out;
    out.trace.session_id = session_id;
    out.trace.question = std::string(question);
    out.trace.token_limit = budget.limit();
    std::vector<AgentStep>& steps = out.trace.steps;
    std::size_t used_before = budget.used();

    auto finish = [&](OutcomeLabel label, std::string payload) {
        out.label = label;
        if (label == OutcomeLabel::answered) {
            out.answer = payload;
            session.emit(EventKind::final, "agent", std::move(payload));
        } else {
            out.error = payload;
            session.emit(EventKind::error, "agent", std::string(to_string(label)) + ": " + payload);
        }
    };

    try {
        std::size_t tool_errors = 0;
        bool done = false;
        for (std::size_t n = 0; n < config.max_steps && !done; ++n) {
            auto completion = session.call(prompts::agent_request(question, tools, steps));
            AgentStep step;
            try {
                step = parse_react(completion);
            } catch (const MissingKeyword& e) {
                if (auto answer = evaluate(completion, steps)) {
                    AgentStep fin;
                    fin.thought = std::string(text::trim(completion.substr(0, completion.find('\n'))));
                    fin.is_final = true;
                    fin.final_answer = *answer;
                    session.emit(EventKind::thought, "agent", fin.thought);
                    steps.push_back(fin);
                    finish(OutcomeLabel::answered, *answer);
                    done = true;
                    break;
                }
                step.thought = std::string(text::trim(completion));
                step.action = "_Exception";
                step.action_input = "";
                step.observation = std::string(e.what());
                session.emit(EventKind::thought, "agent", step.thought);
                session.charge_text(*step.observation);
                session.emit(EventKind::observation, "agent", *step.observation);
                steps.push_back(std::move(step));
                continue;
            }
            session.emit(EventKind::thought, "agent", step.thought);
            if (step.is_final) {
                steps.push_back(step);
                finish(OutcomeLabel::answered, *step.final_answer);
                done = true;
                break;
            }
            const auto* tool = tools.find(*step.action);
            session.emit(EventKind::action, "agent", "Action: " + *step.action + "\nAction Input: " + *step.action_input);
            if (!tool) throw UnknownTool(*step.action);

            std::string observation;
            try {
                ToolContext ctx{registry, session, config, std::string(question)};
                observation = tool->handler(*step.action_input, ctx);
            } catch (const TokenBudgetExceeded&) {
                throw;
            } catch (const llm::BackendUnavailable&) {
                throw;
            } catch (const llm::NoScriptedResponse&) {
                throw;
            } catch (const Error& e) {
                if (++tool_errors >= 2) throw;
                observation = std::string("Error: ") + e.what();
            }
            session.charge_text(observation);
            session.emit(EventKind::observation, "agent", observation);
            step.observation = std::move(observation);
            steps.push_back(std::move(step));
        }
        if (!done)
            finish(OutcomeLabel::logic_error,
                   "no final answer after " + std::to_string(config.max_steps) + " steps");
    } catch (const TokenBudgetExceeded& e) {
        finish(OutcomeLabel::token_limit, e.what());
    } catch (const std::exception& e) {
        finish(OutcomeLabel::logic_error, e.what());
    }

    out.trace.events = session.events();
    out.trace.token_used = budget.used() - used_before;
    out.trace.wall_time =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return out;
}

} // namespace mofsmith::agent
