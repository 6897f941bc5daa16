#include "mofsmith/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mofsmith {

bool is_gene_part(std::string_view part) noexcept {
    if (part.empty()) return false;
    return std::all_of(part.begin(), part.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
}

Gene parse_gene(std::string_view text) {
    auto parts = text::split(text, '+');
    if (parts.size() != 3) throw MalformedGene(text);
    for (const auto& p : parts)
        if (!is_gene_part(p)) throw MalformedGene(text);
    return Gene{parts[0], parts[1], parts[2]};
}

std::string format_gene(const Gene& gene) {
    return gene.topology + '+' + gene.block1 + '+' + gene.block2;
}

std::string_view to_string(Scale scale) noexcept {
    return scale == Scale::log ? "log" : "linear";
}

Scale parse_scale(std::string_view s) {
    if (s == "log") return Scale::log;
    if (s == "linear") return Scale::linear;
    throw Error("unknown scale '" + std::string(s) + "'");
}

Objective Objective::near(double target) {
    if (!std::isfinite(target)) throw Error("near objective requires a finite target");
    Objective o{ObjectiveKind::near};
    o.target = target;
    return o;
}

Objective Objective::range(double low, double high) {
    if (std::isnan(low) || std::isnan(high) || low > high)
        throw Error("range objective requires low <= high");
    Objective o{ObjectiveKind::range};
    o.low = low;
    o.high = high;
    return o;
}

namespace {

double parse_bound(std::string_view s) {
    auto t = text::lower(s);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    auto v = text::parse_number(s);
    if (!v) throw Error("objective: expected a number, got '" + std::string(s) + "'");
    return *v;
}

} // namespace

Objective parse_objective(std::string_view s) {
    std::vector<std::string> words;
    for (auto& w : text::split(text::trim(s), ' '))
        if (!w.empty()) words.push_back(w);
    if (words.empty()) throw Error("empty objective");
    auto kind = text::lower(words[0]);
    if (kind == "max" && words.size() == 1) return Objective::maximize();
    if (kind == "min" && words.size() == 1) return Objective::minimize();
    if (kind == "near" && words.size() == 2) return Objective::near(parse_bound(words[1]));
    if (kind == "range" && words.size() == 3)
        return Objective::range(parse_bound(words[1]), parse_bound(words[2]));
    throw Error("malformed objective '" + std::string(s) + "'");
}

std::string format_objective(const Objective& o) {
    auto bound = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        return text::format_number(v);
    };
    switch (o.kind) {
    case ObjectiveKind::max: return "max";
    case ObjectiveKind::min: return "min";
    case ObjectiveKind::near: return "near " + bound(o.target);
    case ObjectiveKind::range: return "range " + bound(o.low) + " " + bound(o.high);
    }
    return {};
}

std::string_view to_string(OutcomeLabel label) noexcept {
    switch (label) {
    case OutcomeLabel::answered: return "answered";
    case OutcomeLabel::token_limit: return "token_limit";
    case OutcomeLabel::logic_error: return "logic_error";
    }
    return "logic_error";
}

OutcomeLabel parse_outcome_label(std::string_view s) {
    if (s == "answered") return OutcomeLabel::answered;
    if (s == "token_limit") return OutcomeLabel::token_limit;
    if (s == "logic_error") return OutcomeLabel::logic_error;
    throw Error("unknown outcome label '" + std::string(s) + "'");
}

namespace text {

std::string_view trim(std::string_view s) noexcept {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

bool starts_with(std::string_view s, std::string_view prefix) noexcept {
    return s.substr(0, prefix.size()) == prefix;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    if (std::abs(value) < 1e16 && std::trunc(value) == value) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
        return std::string(buf, end);
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string format_general(double value, int significant) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, value);
    return buf;
}

std::optional<double> parse_number(std::string_view s) noexcept {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex_digest(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
    return buf;
}

} // namespace text

} // namespace mofsmith
