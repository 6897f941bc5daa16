#pragma once

#include "mofsmith/agent.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::bench {

class SuiteParseError : public Error {
public:
    SuiteParseError(std::size_t line, const std::string& what)
        : Error("suite line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Task { search, prediction, generation };

std::string_view to_string(Task task) noexcept;
Task parse_task(std::string_view text);

struct Matcher {
    enum class Kind { numeric, regex, contains, none };
    Kind kind = Kind::none;
    double value = 0;
    double rel_tol = 1e-6;
    std::string text;  ///< pattern or substring
};

struct SuiteItem {
    std::string id;
    Task task = Task::search;
    std::string question;
    Matcher expect;
    std::optional<std::size_t> budget;  ///< overrides the run's token budget
};

/// One JSON object per line: {id, task, question, expect: {type, ...}, budget?}.
/// Blank lines are skipped.
std::vector<SuiteItem> parse_suite(std::string_view text);
std::vector<SuiteItem> load_suite(const std::filesystem::path& path);
/// One suite line for `item`.
std::string item_json(const SuiteItem& item);

/// First standalone number in `text`; digits glued to letters or '_' ("298K", "CO2") are skipped.
std::optional<double> first_number(std::string_view text);

bool matches(const Matcher& matcher, std::string_view answer);

/// `unverified` marks answered items whose matcher is none; they count toward
/// neither side of the accuracy ratio.
enum class Label { correct, token_limit, logic_error, unverified };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

Label classify(OutcomeLabel outcome, const std::optional<std::string>& answer, const Matcher& matcher);

struct ItemResult {
    std::string id;
    Task task = Task::search;
    Label label = Label::logic_error;
    std::optional<std::string> answer;
    std::string error;
    double elapsed_ms = 0;
    std::size_t tokens = 0;
};

struct Report {
    std::vector<ItemResult> items;
    std::size_t n_true = 0, n_token = 0, n_logic = 0, n_unverified = 0;
    std::optional<double> accuracy;
};

/// n_true / (n_true + n_logic); nothing when that denominator is zero.
std::optional<double> accuracy(std::size_t n_true, std::size_t n_logic);

/// Counts and accuracy recomputed from per-item labels.
Report tally(std::vector<ItemResult> items);

using BackendFactory = std::function<std::unique_ptr<llm::Backend>(const SuiteItem&)>;

struct RunConfig {
    agent::AgentConfig agent;
    generator::GAConfig generation_ga;
    std::size_t budget = 4000;
    BudgetMode budget_mode = BudgetMode::session;
    std::size_t workers = 1;
};

/// Runs each item in its own session with a fresh backend from `factory`. Results keep suite order.
Report run_suite(const std::vector<SuiteItem>& suite, const dataset::Registry& registry,
                 const agent::ToolRegistry& tools, const BackendFactory& factory, const RunConfig& config = {});

std::string report_json(const Report& report);
Report report_from_json(std::string_view text);
/// Fixed-width text table with one row per item and a totals line.
std::string report_table(const Report& report);

} // namespace mofsmith::bench
