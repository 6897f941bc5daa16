#pragma once

#include "mofsmith/dataset.hpp"
#include "mofsmith/tokens.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

/// TQL: the table query language executed by the table searcher.
///
///   SELECT cols FROM table [WHERE pred] [ORDER BY col [ASC|DESC]] [LIMIT n]
///   DESCRIBE col FROM table
///
/// See docs/tql.md for the full grammar.
namespace mofsmith::query {

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::string expected)
        : Error("syntax error at position " + std::to_string(position) + ": expected " + expected),
          position_(position), expected_(std::move(expected)) {}
    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class TypeMismatch : public Error {
public:
    using Error::Error;
};

class RetriesExhausted : public Error {
public:
    RetriesExhausted(std::size_t attempts, std::string last_error)
        : Error("query failed after " + std::to_string(attempts) + " attempt(s): " + last_error),
          last_error_(std::move(last_error)) {}
    const std::string& last_error() const noexcept { return last_error_; }

private:
    std::string last_error_;
};

enum class CmpOp { eq, ne, lt, le, gt, ge, contains };
enum class Conjunction { and_, or_ };

using Literal = std::variant<double, std::string, bool>;

struct Condition {
    std::string column;
    CmpOp op = CmpOp::eq;
    Literal literal;
    bool operator==(const Condition&) const = default;
};

struct OrderBy {
    std::string column;
    bool descending = false;
    bool operator==(const OrderBy&) const = default;
};

struct QueryPlan {
    enum class Kind { select, describe };

    Kind kind = Kind::select;
    std::string table;
    /// Empty means `*`.
    std::vector<std::string> columns;
    /// Conditions combined left to right: ((c0 j0 c1) j1 c2) ...
    std::vector<Condition> filters;
    std::vector<Conjunction> joins;
    std::optional<OrderBy> order_by;
    std::optional<std::size_t> limit;
    std::string describe_column;

    bool operator==(const QueryPlan&) const = default;
};

QueryPlan parse_query(std::string_view text);
/// Statements separated by `;` (outside quotes).
std::vector<QueryPlan> parse_script(std::string_view text);
std::string format_query(const QueryPlan& plan);

std::string quote_identifier(std::string_view name);
std::string quote_string(std::string_view value);

struct ResultTable {
    std::vector<dataset::Column> columns;
    std::vector<dataset::Row> rows;
    std::vector<std::string> index;
    std::size_t row_count_total = 0;

    bool operator==(const ResultTable&) const = default;
};

/// Validates the plan against the table schema, then filter -> stable sort -> limit.
ResultTable execute(const QueryPlan& plan, const dataset::Table& table);

struct DescribeStats {
    double count, mean, std, min, q25, q50, q75, max;
};

/// Sample standard deviation (n-1); quartiles by linear interpolation between ranks.
DescribeStats describe(std::vector<double> values);
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Pipe table with the index as first column. Throws TokenBudgetExceeded when
/// the estimated size of the rendered text is over `token_budget`.
std::string render_markdown(const ResultTable& result, std::size_t token_budget,
                            const TokenEstimator& estimate = estimate_tokens);

/// Parses a pipe table produced by render_markdown: header cells (without the
/// index header) and rows of cells (index first).
struct MarkdownTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::optional<MarkdownTable> parse_markdown_table(std::string_view text);

using TableLookup = std::function<const dataset::Table*(std::string_view)>;

/// Maps (question, last error) to TQL text.
using Planner =
    std::function<std::string(std::string_view question, const std::optional<std::string>& last_error)>;

struct Retrieval {
    std::vector<ResultTable> results;
    std::string markdown;
    std::size_t attempts = 0;
};

/// Asks the planner for a query and runs it. Syntax, schema, and type errors are
/// fed back to the planner up to `max_attempts` calls in total; TokenBudgetExceeded
/// propagates immediately.
Retrieval run_with_retries(std::string_view question, const TableLookup& tables,
                           const Planner& planner, std::size_t max_attempts = 3,
                           std::size_t token_budget = 4000,
                           const TokenEstimator& estimate = estimate_tokens);

Retrieval run_with_retries(std::string_view question, const dataset::Table& table,
                           const Planner& planner, std::size_t max_attempts = 3,
                           std::size_t token_budget = 4000,
                           const TokenEstimator& estimate = estimate_tokens);

/// True for errors a planner can correct by rewriting its query.
bool is_retryable(const std::exception& e) noexcept;

} // namespace mofsmith::query
