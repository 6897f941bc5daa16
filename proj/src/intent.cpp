#include "mofsmith/intent.hpp"

#include "mofsmith/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace mofsmith::intent {

namespace {

bool edge_punct(char c) {
    return c == '?' || c == ',' || c == '.' || c == '!' || c == ';' || c == ':' || c == '(' || c == ')' ||
           c == '"' || c == '\'';
}

std::optional<double> number_word(const std::string& w) {
    auto v = text::parse_number(w);
    if (v && std::isfinite(*v)) return v;
    return std::nullopt;
}

bool any_of(const std::string& w, std::initializer_list<std::string_view> list) {
    return std::find(list.begin(), list.end(), w) != list.end();
}

// Number at words[i], skipping one article.
std::optional<double> number_after(const std::vector<std::string>& w, std::size_t i) {
    if (i < w.size() && (w[i] == "a" || w[i] == "an")) ++i;
    if (i < w.size()) return number_word(w[i]);
    return std::nullopt;
}

} // namespace

std::vector<std::string> words(std::string_view question) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        std::size_t b = 0, e = cur.size();
        while (b < e && edge_punct(cur[b])) ++b;
        while (e > b && edge_punct(cur[e - 1])) --e;
        if (e > b) out.push_back(text::lower(std::string_view(cur).substr(b, e - b)));
        cur.clear();
    };
    for (char c : question) {
        if (std::isspace(static_cast<unsigned char>(c))) flush();
        else cur += c;
    }
    flush();
    return out;
}

std::optional<Direction> superlative(std::string_view question) {
    for (const auto& w : words(question)) {
        if (any_of(w, {"highest", "largest", "maximum", "max", "most", "best", "greatest", "biggest", "top"}))
            return Direction::high;
        if (any_of(w, {"lowest", "smallest", "minimum", "min", "least", "bottom", "fewest"})) return Direction::low;
    }
    return std::nullopt;
}

std::optional<std::size_t> requested_count(std::string_view question) {
    auto w = words(question);
    auto as_count = [](const std::string& s) -> std::optional<std::size_t> {
        auto v = text::parse_number(s);
        if (v && *v >= 1 && *v <= 1000 && std::trunc(*v) == *v) return static_cast<std::size_t>(*v);
        return std::nullopt;
    };
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (any_of(w[i], {"top", "list", "provide", "the", "show", "give", "find"}))
            if (auto n = as_count(w[i + 1])) {
                if (w[i] == "top" || (i + 2 < w.size() && any_of(w[i + 2], {"materials", "mofs", "structures"})))
                    return n;
            }
        if (any_of(w[i + 1], {"materials", "mofs", "structures"}))
            if (auto n = as_count(w[i])) return n;
    }
    return std::nullopt;
}

std::optional<Threshold> threshold(std::string_view question) {
    auto w = words(question);
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto two = [&](std::string_view a, std::string_view b) { return w[i] == a && i + 1 < w.size() && w[i + 1] == b; };
        if (w[i] == "between") {
            auto lo = number_after(w, i + 1);
            if (lo && i + 3 < w.size() && w[i + 2] == "and")
                if (auto hi = number_word(w[i + 3])) return Threshold{Threshold::Kind::between, std::min(*lo, *hi), std::max(*lo, *hi)};
        }
        for (auto [a, b] : {std::pair{"greater", "than"}, {"more", "than"}, {"higher", "than"}, {"larger", "than"}})
            if (two(a, b))
                if (auto v = number_after(w, i + 2)) return Threshold{Threshold::Kind::greater, *v, 0};
        for (auto [a, b] : {std::pair{"less", "than"}, {"lower", "than"}, {"smaller", "than"}, {"fewer", "than"}})
            if (two(a, b))
                if (auto v = number_after(w, i + 2)) return Threshold{Threshold::Kind::less, *v, 0};
        if (any_of(w[i], {"above", "exceeding", "exceeds", "over"}))
            if (auto v = number_after(w, i + 1)) return Threshold{Threshold::Kind::greater, *v, 0};
        if (any_of(w[i], {"below", "under"}))
            if (auto v = number_after(w, i + 1)) return Threshold{Threshold::Kind::less, *v, 0};
    }
    return std::nullopt;
}

std::optional<double> near_value(std::string_view question) {
    auto w = words(question);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (any_of(w[i], {"near", "about", "around", "approximately", "roughly", "nearly"}))
            if (auto v = number_after(w, i + 1)) return v;
        if ((w[i] == "close" || w[i] == "closest") && i + 1 < w.size() && w[i + 1] == "to")
            if (auto v = number_after(w, i + 2)) return v;
    }
    return std::nullopt;
}

} // namespace mofsmith::intent
