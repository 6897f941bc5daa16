#include "mofsmith/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

namespace mofsmith::bench {

using nlohmann::json;

std::string_view to_string(Task task) noexcept {
    switch (task) {
    case Task::search: return "search";
    case Task::prediction: return "prediction";
    case Task::generation: return "generation";
    }
    return "search";
}

Task parse_task(std::string_view s) {
    for (auto t : {Task::search, Task::prediction, Task::generation})
        if (to_string(t) == s) return t;
    throw Error("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(Label label) noexcept {
    switch (label) {
    case Label::correct: return "true";
    case Label::token_limit: return "token_limit";
    case Label::logic_error: return "logic_error";
    case Label::unverified: return "unverified";
    }
    return "logic_error";
}

Label parse_label(std::string_view s) {
    for (auto l : {Label::correct, Label::token_limit, Label::logic_error, Label::unverified})
        if (to_string(l) == s) return l;
    throw Error("unknown label '" + std::string(s) + "'");
}

namespace {

Matcher matcher_of(const json& j) {
    Matcher m;
    auto type = j.at("type").get<std::string>();
    if (type == "numeric") {
        m.kind = Matcher::Kind::numeric;
        m.value = j.at("value").get<double>();
        m.rel_tol = j.value("rel_tol", 1e-6);
        if (!(m.rel_tol >= 0)) throw Error("rel_tol must be non-negative");
    } else if (type == "regex") {
        m.kind = Matcher::Kind::regex;
        m.text = j.at("pattern").get<std::string>();
        std::regex check(m.text);
    } else if (type == "contains") {
        m.kind = Matcher::Kind::contains;
        m.text = j.at("text").get<std::string>();
    } else if (type == "none") {
        m.kind = Matcher::Kind::none;
    } else {
        throw Error("unknown matcher type '" + type + "'");
    }
    return m;
}

json matcher_json(const Matcher& m) {
    switch (m.kind) {
    case Matcher::Kind::numeric: return {{"type", "numeric"}, {"value", m.value}, {"rel_tol", m.rel_tol}};
    case Matcher::Kind::regex: return {{"type", "regex"}, {"pattern", m.text}};
    case Matcher::Kind::contains: return {{"type", "contains"}, {"text", m.text}};
    case Matcher::Kind::none: return {{"type", "none"}};
    }
    return {{"type", "none"}};
}

} // namespace

std::vector<SuiteItem> parse_suite(std::string_view src) {
    std::vector<SuiteItem> out;
    std::size_t n = 0;
    for (const auto& line : text::split(src, '\n')) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            SuiteItem item;
            item.id = j.at("id").get<std::string>();
            item.task = parse_task(j.at("task").get<std::string>());
            item.question = j.at("question").get<std::string>();
            if (item.question.empty()) throw Error("empty question");
            item.expect = j.contains("expect") ? matcher_of(j.at("expect")) : Matcher{};
            if (j.contains("budget")) item.budget = j.at("budget").get<std::size_t>();
            out.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw SuiteParseError(n, e.what());
        } catch (const std::regex_error& e) {
            throw SuiteParseError(n, std::string("bad pattern: ") + e.what());
        } catch (const SuiteParseError&) {
            throw;
        } catch (const Error& e) {
            throw SuiteParseError(n, e.what());
        }
    }
    return out;
}

std::string item_json(const SuiteItem& item) {
    json j{{"id", item.id}, {"task", to_string(item.task)}, {"question", item.question},
           {"expect", matcher_json(item.expect)}};
    if (item.budget) j["budget"] = *item.budget;
    return j.dump();
}

std::vector<SuiteItem> load_suite(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read suite '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_suite(ss.str());
}

std::optional<double> first_number(std::string_view s) {
    auto glued = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' || s[i] == ',')) {
            if (s[i] == ',' && !(i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) break;
            ++i;
        }
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
            std::size_t j = i + 1;
            if (j < s.size() && (s[j] == '-' || s[j] == '+')) ++j;
            if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                i = j;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
        }
        std::size_t end = i;
        while (end > start && s[end - 1] == '.') --end;
        bool left_glued = start > 0 && (glued(s[start - 1]) || s[start - 1] == '.');
        bool right_glued = i < s.size() && glued(s[i]);
        if (left_glued || right_glued) continue;
        std::string digits;
        for (auto c : s.substr(start, end - start))
            if (c != ',') digits += c;
        auto v = text::parse_number(digits);
        if (!v) continue;
        if (start > 0 && s[start - 1] == '-' && (start == 1 || !std::isalnum(static_cast<unsigned char>(s[start - 2]))))
            return -*v;
        // Unicode minus sign (U+2212).
        if (start >= 3 && s.substr(start - 3, 3) == "\xE2\x88\x92") return -*v;
        return *v;
    }
    return std::nullopt;
}

bool matches(const Matcher& m, std::string_view answer) {
    switch (m.kind) {
    case Matcher::Kind::numeric: {
        auto v = first_number(answer);
        if (!v) return false;
        return std::abs(*v - m.value) <= m.rel_tol * std::abs(m.value) || *v == m.value;
    }
    case Matcher::Kind::regex: return std::regex_search(std::string(answer), std::regex(m.text));
    case Matcher::Kind::contains: return answer.find(m.text) != std::string_view::npos;
    case Matcher::Kind::none: return true;
    }
    return false;
}

Label classify(OutcomeLabel outcome, const std::optional<std::string>& answer, const Matcher& matcher) {
    if (outcome == OutcomeLabel::token_limit) return Label::token_limit;
    if (outcome == OutcomeLabel::logic_error || !answer) return Label::logic_error;
    if (matcher.kind == Matcher::Kind::none) return Label::unverified;
    return matches(matcher, *answer) ? Label::correct : Label::logic_error;
}

std::optional<double> accuracy(std::size_t n_true, std::size_t n_logic) {
    if (n_true + n_logic == 0) return std::nullopt;
    return static_cast<double>(n_true) / static_cast<double>(n_true + n_logic);
}

Report tally(std::vector<ItemResult> items) {
    Report r;
    r.items = std::move(items);
    for (const auto& i : r.items) {
        switch (i.label) {
        case Label::correct: ++r.n_true; break;
        case Label::token_limit: ++r.n_token; break;
        case Label::logic_error: ++r.n_logic; break;
        case Label::unverified: ++r.n_unverified; break;
        }
    }
    r.accuracy = accuracy(r.n_true, r.n_logic);
    return r;
}

Report run_suite(const std::vector<SuiteItem>& suite, const dataset::Registry& registry,
                 const agent::ToolRegistry& tools, const BackendFactory& factory, const RunConfig& config) {
    std::vector<ItemResult> results(suite.size());
    auto run_one = [&](std::size_t k) {
        const auto& item = suite[k];
        auto& res = results[k];
        res.id = item.id;
        res.task = item.task;
        auto start = std::chrono::steady_clock::now();
        try {
            auto backend = factory(item);
            TokenBudget budget(item.budget.value_or(config.budget), config.budget_mode);
            auto agent_config = config.agent;
            if (item.task == Task::generation) agent_config.ga = config.generation_ga;
            auto outcome = agent::run_session(item.question, tools, registry, *backend, budget, agent_config);
            res.label = classify(outcome.label, outcome.answer, item.expect);
            res.answer = outcome.answer;
            res.error = outcome.error;
            res.tokens = outcome.trace.token_used;
        } catch (const std::exception& e) {
            res.label = Label::logic_error;
            res.error = e.what();
        }
        res.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };

    std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, suite.size()));
    if (workers == 1) {
        for (std::size_t k = 0; k < suite.size(); ++k) run_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < suite.size(); k = next++) run_one(k);
            });
        for (auto& t : pool) t.join();
    }
    return tally(std::move(results));
}

std::string report_json(const Report& r) {
    json items = json::array();
    for (const auto& i : r.items)
        items.push_back({{"id", i.id},
                         {"task", to_string(i.task)},
                         {"label", to_string(i.label)},
                         {"answer", i.answer ? json(*i.answer) : json(nullptr)},
                         {"error", i.error},
                         {"elapsed_ms", i.elapsed_ms},
                         {"tokens", i.tokens}});
    json j{{"items", items},
           {"n_true", r.n_true},
           {"n_token", r.n_token},
           {"n_logic", r.n_logic},
           {"n_unverified", r.n_unverified},
           {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)}};
    return j.dump(2);
}

Report report_from_json(std::string_view src) {
    try {
        auto j = json::parse(src);
        Report r;
        for (const auto& i : j.at("items")) {
            ItemResult res;
            res.id = i.at("id").get<std::string>();
            res.task = parse_task(i.at("task").get<std::string>());
            res.label = parse_label(i.at("label").get<std::string>());
            if (!i.at("answer").is_null()) res.answer = i.at("answer").get<std::string>();
            res.error = i.at("error").get<std::string>();
            res.elapsed_ms = i.at("elapsed_ms").get<double>();
            res.tokens = i.at("tokens").get<std::size_t>();
            r.items.push_back(std::move(res));
        }
        r.n_true = j.at("n_true").get<std::size_t>();
        r.n_token = j.at("n_token").get<std::size_t>();
        r.n_logic = j.at("n_logic").get<std::size_t>();
        r.n_unverified = j.at("n_unverified").get<std::size_t>();
        if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
}

std::string report_table(const Report& r) {
    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() > w) s = s.substr(0, w - 3) + "...";
        return s + std::string(w - s.size(), ' ');
    };
    out << pad("id", 18) << pad("task", 12) << pad("label", 13) << pad("tokens", 8) << "answer\n";
    for (const auto& i : r.items) {
        auto shown = i.answer ? *i.answer : i.error;
        std::replace(shown.begin(), shown.end(), '\n', ' ');
        out << pad(i.id, 18) << pad(std::string(to_string(i.task)), 12) << pad(std::string(to_string(i.label)), 13)
            << pad(std::to_string(i.tokens), 8) << (shown.size() > 70 ? shown.substr(0, 67) + "..." : shown) << "\n";
    }
    out << "true " << r.n_true << ", token_limit " << r.n_token << ", logic_error " << r.n_logic << ", unverified "
        << r.n_unverified << ", accuracy " << (r.accuracy ? text::format_general(*r.accuracy, 4) : "n/a") << "\n";
    return out.str();
}

} // namespace mofsmith::bench
