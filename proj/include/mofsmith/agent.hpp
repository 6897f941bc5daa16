#pragma once

#include "mofsmith/dataset.hpp"
#include "mofsmith/generator.hpp"
#include "mofsmith/llm.hpp"
#include "mofsmith/tokens.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::agent {

class MissingKeyword : public Error {
public:
    explicit MissingKeyword(std::string which)
        : Error("Invalid Format: missing '" + which + ":'"), which_(std::move(which)) {}
    const std::string& which() const noexcept { return which_; }

private:
    std::string which_;
};

class AmbiguousStep : public Error {
public:
    AmbiguousStep() : Error("output contains both an Action and a Final Answer") {}
};

class UnknownTool : public Error {
public:
    explicit UnknownTool(const std::string& name) : Error("unknown tool '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct AgentStep {
    std::string thought;
    std::optional<std::string> action;
    std::optional<std::string> action_input;
    std::optional<std::string> observation;
    bool is_final = false;
    std::optional<std::string> final_answer;

    bool operator==(const AgentStep&) const = default;
};

/// Reads one model turn. The text before the first keyword, or after `Thought:`, is the
/// thought; `Action:` + `Action Input:` (input runs to a blank line) or `Final Answer:`
/// (rest of text) follows. Keywords are case-sensitive at line start.
AgentStep parse_react(std::string_view text);

enum class EventKind { thought, action, observation, final, error };

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view text);

struct TraceEvent {
    std::string session_id;
    std::size_t seq = 0;
    EventKind kind = EventKind::thought;
    /// "agent", "table_searcher", "predictor", or "generator".
    std::string source = "agent";
    std::string payload;
    std::size_t tokens = 0;

    bool operator==(const TraceEvent&) const = default;
};

struct AgentTrace {
    std::string session_id;
    std::string question;
    std::vector<AgentStep> steps;
    std::vector<TraceEvent> events;
    std::size_t token_used = 0;
    std::size_t token_limit = 0;
    std::chrono::milliseconds wall_time{0};

    bool operator==(const AgentTrace&) const = default;
};

struct Outcome {
    OutcomeLabel label = OutcomeLabel::logic_error;
    std::optional<std::string> answer;
    std::string error;
    AgentTrace trace;
};

/// Thought / Action / Action Input / Observation lines per step; final steps end with
/// `Final Answer:`. Byte-stable for identical traces.
std::string render_scratchpad(const std::vector<AgentStep>& steps);
std::string render_scratchpad(const AgentTrace& trace);

std::string event_json(const TraceEvent& event);
TraceEvent event_from_json(std::string_view line);

/// Lossless JSON form of a trace; `with_timing = false` omits wall time so that
/// traces of identical runs compare byte for byte.
std::string trace_json(const AgentTrace& trace, bool with_timing = true);
AgentTrace trace_from_json(std::string_view text);

std::string outcome_json(const Outcome& outcome, bool with_timing = true);

/// Human-readable transcript in the console style ("[Table Searcher] Thought: ...").
std::string pretty_event(const TraceEvent& event);

using EventSink = std::function<void(const TraceEvent&)>;

/// Per-session plumbing shared by the agent loop and its sub-agents: every model call
/// and every observation is charged here, and charges ride on the next emitted event.
class Session {
public:
    Session(std::string id, llm::Backend& backend, TokenBudget& budget, EventSink sink = {});

    /// Charges the prompt, completes, charges the completion.
    std::string call(llm::CompletionRequest request);
    void charge_text(std::string_view text);
    const TraceEvent& emit(EventKind kind, std::string source, std::string payload);

    const std::string& id() const noexcept { return id_; }
    llm::Backend& backend() noexcept { return backend_; }
    TokenBudget& budget() noexcept { return budget_; }
    const std::vector<TraceEvent>& events() const noexcept { return events_; }
    std::size_t pending_tokens() const noexcept { return pending_; }

private:
    std::string id_;
    llm::Backend& backend_;
    TokenBudget& budget_;
    EventSink sink_;
    std::vector<TraceEvent> events_;
    std::size_t pending_ = 0;
};

struct AgentConfig {
    std::size_t max_steps = 8;
    std::size_t search_attempts = 3;
    std::size_t searcher_turns = 4;
    generator::GAConfig ga;
    generator::BuilderConfig builder;
    bool model_proposer = false;
    /// Where predictor CSV exports go.
    std::filesystem::path export_dir = "predictions";
    /// Base directory for relative structure paths.
    std::filesystem::path data_root;
};

struct ToolContext {
    const dataset::Registry& registry;
    Session& session;
    const AgentConfig& config;
    std::string question;
};

using ToolHandler = std::function<std::string(std::string_view input, ToolContext& context)>;

struct ToolDescriptor {
    std::string name;
    std::string description;
    ToolHandler handler;
    std::vector<std::string> aliases;
};

class ToolRegistry {
public:
    /// Throws Error on a duplicate name or alias.
    void add(ToolDescriptor tool);
    const ToolDescriptor* find(std::string_view name) const noexcept;
    std::vector<std::string> names() const;
    const std::vector<ToolDescriptor>& tools() const noexcept { return tools_; }

private:
    std::vector<ToolDescriptor> tools_;
};

/// search_csv, predictor, generator, calculator (alias Python_REPL), structure_info,
/// internet_search.
ToolRegistry default_tools();

/// Strips code fences, `import` lines, `print(...)`, and `math.` prefixes so REPL-style
/// input reaches the calculator as a bare expression.
std::string calculator_expression(std::string_view input);

/// "... Check to see if this answer can be your final answer ..." suffix handling.
const std::string& final_hint();
std::string strip_final_hint(std::string_view observation);

/// Runs the ReAct loop. Every failure is encoded in the outcome label.
Outcome run_session(std::string_view question, const ToolRegistry& tools, const dataset::Registry& registry,
                    llm::Backend& backend, TokenBudget& budget, const AgentConfig& config = {},
                    const EventSink& sink = {}, std::string session_id = {});

} // namespace mofsmith::agent
