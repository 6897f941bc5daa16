#pragma once

#include "mofsmith/dataset.hpp"
#include "mofsmith/intent.hpp"
#include "mofsmith/llm.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// A deterministic stand-in for the language model. It plans from the structured part
/// of each request (task, question, history) and answers in the same text formats a
/// model would, so the whole pipeline runs offline.
namespace mofsmith::rules {

class NoRuleMatched : public Error {
public:
    using Error::Error;
};

/// Columns of `entry` named in `question` (header stems without units, plus aliases),
/// longest phrase first, returned in question order. Among columns sharing a stem the
/// one whose unit appears in the question wins, else the earliest.
std::vector<std::string> match_columns(std::string_view question, const dataset::TableEntry& entry);

/// Key value of the first question token naming a row of `table`.
std::optional<std::string> find_material(std::string_view question, const dataset::Table& table);

struct TableQuery {
    enum class Kind { lookup, top, compare, describe, threshold, boolean_list };
    Kind kind = Kind::lookup;
    std::string dsl;
    std::vector<std::string> columns;
    std::string material;
    std::size_t k = 0;
    intent::Direction direction = intent::Direction::high;
    std::optional<intent::Threshold> threshold;
    std::string filter_column;
    bool negated = false;
};

/// Throws NoRuleMatched when the question names no usable column.
TableQuery plan_table_query(std::string_view question, const dataset::TableEntry& entry);

/// Sentence answer from the searcher observation; "nothing" when it holds no rows.
std::string compose_table_answer(const TableQuery& query, std::string_view observation);

class RulesBackend : public llm::Backend {
public:
    explicit RulesBackend(const dataset::Registry& registry) : registry_(registry) {}
    std::string name() const override { return "rules"; }
    std::string generate(const llm::CompletionRequest& request) override;

private:
    const dataset::Registry& registry_;

    std::string agent_turn(const llm::CompletionRequest& request) const;
    std::optional<std::string> remaining_prediction(const std::string& question,
                                                    const std::vector<llm::Turn>& history) const;
    std::string table_turn(const llm::CompletionRequest& request) const;
    std::string predict_plan(const llm::CompletionRequest& request) const;
    std::string gen_plan(const llm::CompletionRequest& request) const;
};

} // namespace mofsmith::rules
