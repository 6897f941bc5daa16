#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Keyword-level reading of question phrasing, shared by the rule-based planners
/// and the predictor's deterministic answers.
namespace mofsmith::intent {

/// Lowercased words with surrounding punctuation removed ("7.0?" -> "7.0").
std::vector<std::string> words(std::string_view question);

enum class Direction { high, low };

/// "highest", "largest", "top", ... -> high; "lowest", "smallest", ... -> low.
std::optional<Direction> superlative(std::string_view question);

/// "top 5", "list 5 materials", "the 10 materials" -> the count.
std::optional<std::size_t> requested_count(std::string_view question);

struct Threshold {
    enum class Kind { greater, less, between };
    Kind kind = Kind::greater;
    double value = 0;
    double upper = 0;  ///< between only
};

/// "greater than (a) 7.0", "below 0.25", "between 1 and 2", "exceeding 2".
/// Quantities glued to units ("100bar") are conditions, not thresholds.
std::optional<Threshold> threshold(std::string_view question);

/// "near 1.6", "close to 0.4", "about 500", "around 3".
std::optional<double> near_value(std::string_view question);

} // namespace mofsmith::intent
