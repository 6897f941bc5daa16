#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedGene : public Error {
public:
    explicit MalformedGene(std::string_view text)
        : Error("malformed gene '" + std::string(text) + "': expected topology+block1+block2") {}
};

/// A candidate framework: a topology net plus an ordered pair of building blocks.
/// Serialized as `topology+block1+block2`.
struct Gene {
    std::string topology;
    std::string block1;
    std::string block2;

    auto operator<=>(const Gene&) const = default;
    bool operator==(const Gene&) const = default;
};

/// Splits `tbo+N17+N10` into its three parts. Each part must be nonempty and
/// drawn from [A-Za-z0-9_-].
Gene parse_gene(std::string_view text);
std::string format_gene(const Gene& gene);
bool is_gene_part(std::string_view part) noexcept;

enum class Scale { linear, log };

std::string_view to_string(Scale scale) noexcept;
Scale parse_scale(std::string_view text);

/// A predictable or tabulated property. `unit` is kept verbatim.
struct PropertySpec {
    std::string name;
    std::string unit;
    Scale scale = Scale::linear;
    std::vector<std::string> aliases;
};

enum class ObjectiveKind { max, min, near, range };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::max;
    double target = 0.0;
    double low = 0.0;
    double high = 0.0;

    static Objective maximize() { return {ObjectiveKind::max}; }
    static Objective minimize() { return {ObjectiveKind::min}; }
    static Objective near(double target);
    static Objective range(double low, double high);

    bool operator==(const Objective&) const = default;
};

/// "max", "min", "near 0.5", "range 1 2". Infinite bounds accept "inf"/"-inf".
Objective parse_objective(std::string_view text);
std::string format_objective(const Objective& objective);

enum class OutcomeLabel { answered, token_limit, logic_error };

std::string_view to_string(OutcomeLabel label) noexcept;
OutcomeLabel parse_outcome_label(std::string_view text);

// Small text helpers shared across modules.
namespace text {

std::string_view trim(std::string_view s) noexcept;
std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with(std::string_view s, std::string_view prefix) noexcept;
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shortest decimal string that round-trips; integral values print without ".0".
std::string format_number(double value);
/// Up to `significant` digits, trailing zeros dropped (printf %g style).
std::string format_general(double value, int significant = 6);
std::optional<double> parse_number(std::string_view s) noexcept;

/// FNV-1a, used for stable digests of prompts and seeds.
std::uint64_t fnv1a(std::string_view s) noexcept;
std::string hex_digest(std::string_view s);

} // namespace text

} // namespace mofsmith
