#include "mofsmith/rules.hpp"

#include "mofsmith/agent.hpp"
#include "mofsmith/calc.hpp"
#include "mofsmith/predictor.hpp"
#include "mofsmith/query.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace mofsmith::rules {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Every word-bounded occurrence of `phrase` in `hay`.
std::vector<std::size_t> occurrences(const std::string& hay, const std::string& phrase) {
    std::vector<std::size_t> out;
    if (phrase.empty()) return out;
    for (auto p = hay.find(phrase); p != std::string::npos; p = hay.find(phrase, p + 1)) {
        bool left = p == 0 || !word_char(hay[p - 1]);
        auto end = p + phrase.size();
        bool right = end >= hay.size() || !word_char(hay[end]);
        if (left && right) out.push_back(p);
    }
    return out;
}

bool contains_word(const std::string& hay, const std::string& phrase) { return !occurrences(hay, phrase).empty(); }

bool contains_any(const std::string& hay, std::initializer_list<const char*> phrases) {
    for (auto p : phrases)
        if (contains_word(hay, p)) return true;
    return false;
}

std::string header_stem(std::string_view header) {
    auto p = header.find('(');
    return text::lower(text::trim(header.substr(0, p)));
}

std::string header_unit(std::string_view header) {
    auto open = header.find('(');
    auto close = header.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return "";
    return std::string(header.substr(open + 1, close - open - 1));
}

struct Hit {
    std::size_t pos;
    std::size_t len;
    std::size_t column;
    std::string stem;
};

// Longest non-overlapping phrase hits; `phrases` pairs a candidate with its column.
std::vector<Hit> best_hits(const std::string& hay, const std::vector<std::pair<std::string, std::size_t>>& phrases) {
    std::vector<Hit> all;
    for (const auto& [phrase, col] : phrases)
        for (auto p : occurrences(hay, phrase)) all.push_back({p, phrase.size(), col, phrase});
    std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
        if (a.len != b.len) return a.len > b.len;
        return a.column < b.column;
    });
    std::vector<Hit> chosen;
    for (const auto& h : all) {
        bool overlap = std::any_of(chosen.begin(), chosen.end(), [&](const Hit& c) {
            return h.pos < c.pos + c.len && c.pos < h.pos + h.len;
        });
        if (!overlap) chosen.push_back(h);
    }
    std::sort(chosen.begin(), chosen.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
    return chosen;
}

std::vector<Hit> column_hits(std::string_view question, const dataset::TableEntry& entry) {
    const auto& table = entry.table;
    std::vector<std::pair<std::string, std::size_t>> phrases;
    for (std::size_t i = 0; i < table.column_count(); ++i) {
        const auto& header = table.columns()[i].header;
        if (header == table.key_column()) continue;
        phrases.emplace_back(header_stem(header), i);
        if (auto a = entry.column_aliases.find(header); a != entry.column_aliases.end())
            for (const auto& alias : a->second) phrases.emplace_back(text::lower(alias), i);
    }
    auto hay = text::lower(question);
    auto hits = best_hits(hay, phrases);
    // Columns that share a stem ("... (m^2/cm^3)" and "... (m^2/g)") are told apart by unit.
    for (auto& h : hits) {
        const auto& header = table.columns()[h.column].header;
        auto stem = header_stem(header);
        if (header_unit(header).empty() || hay.find(text::lower(header_unit(header))) != std::string::npos) continue;
        for (std::size_t i = 0; i < table.column_count(); ++i) {
            const auto& other = table.columns()[i].header;
            auto unit = text::lower(header_unit(other));
            if (i != h.column && header_stem(other) == stem && !unit.empty() && hay.find(unit) != std::string::npos) {
                h.column = i;
                break;
            }
        }
    }
    return hits;
}

std::string ident(const std::string& s) { return query::quote_identifier(s); }

std::string literal(double v) { return text::format_number(v); }

const char* threshold_phrases[] = {"greater than", "more than", "larger than", "higher than", "above",
                                   "exceeding",    "exceeds",   "over",        "at least",    "less than",
                                   "smaller than", "lower than", "below",      "under",       "at most",
                                   "between"};

std::size_t threshold_position(const std::string& hay) {
    std::size_t best = std::string::npos;
    for (auto p : threshold_phrases) {
        auto o = occurrences(hay, p);
        if (!o.empty()) best = std::min(best, o.front());
    }
    return best;
}

std::string unit_suffix(const std::string& header) {
    auto u = header_unit(header);
    return u.empty() ? "" : " " + u;
}

struct Block {
    query::MarkdownTable table;
    std::optional<std::size_t> total;
};

std::vector<Block> blocks_of(std::string_view observation) {
    std::vector<Block> out;
    static const std::regex note(R"(\(showing (\d+) of (\d+) rows\))");
    std::string current;
    std::vector<std::size_t> totals;
    auto flush = [&] {
        if (current.empty()) return;
        if (auto t = query::parse_markdown_table(current)) out.push_back({*t, std::nullopt});
        current.clear();
    };
    for (const auto& line : text::split(observation, '\n')) {
        auto l = std::string(text::trim(line));
        std::smatch m;
        if (std::regex_search(l, m, note)) {
            totals.push_back(std::stoul(m[2].str()));
            continue;
        }
        if (l.empty()) {
            flush();
            continue;
        }
        if (text::starts_with(l, "| |") && !current.empty()) flush();
        current += l + "\n";
    }
    flush();
    // Truncation notes follow the tables in order; only limited selects carry one.
    std::size_t t = 0;
    for (auto& b : out)
        if (t < totals.size() && b.table.rows.size() < totals[t] && !b.table.header.empty() &&
            b.table.header.size() > 1)
            b.total = totals[t++];
    return out;
}

std::string column_cell(const Block& b, std::size_t row, const std::string& header) {
    for (std::size_t i = 0; i < b.table.header.size(); ++i)
        if (b.table.header[i] == header && i + 1 < b.table.rows[row].size()) return b.table.rows[row][i + 1];
    return "";
}

std::string listing(const Block& b, const std::string& key, const std::string& column, std::size_t limit) {
    std::vector<std::string> parts;
    for (std::size_t r = 0; r < b.table.rows.size() && r < limit; ++r) {
        auto id = column_cell(b, r, key);
        if (column.empty()) parts.push_back(id);
        else parts.push_back(id + " (" + column_cell(b, r, column) + unit_suffix(column) + ")");
    }
    return text::join(parts, ", ");
}

std::string describe_cell(const Block& b, std::string_view label) {
    for (const auto& row : b.table.rows)
        if (!row.empty() && row[0] == label && row.size() > 1) return row[1];
    return "";
}

std::string threshold_text(const intent::Threshold& t) {
    switch (t.kind) {
    case intent::Threshold::Kind::greater: return "greater than " + literal(t.value);
    case intent::Threshold::Kind::less: return "less than " + literal(t.value);
    case intent::Threshold::Kind::between: return "between " + literal(t.value) + " and " + literal(t.upper);
    }
    return "";
}

bool is_boolean_cell(const std::string& s) { return s == "True" || s == "False" || s == "TRUE" || s == "FALSE"; }

} // namespace

std::vector<std::string> match_columns(std::string_view question, const dataset::TableEntry& entry) {
    std::vector<std::string> out;
    for (const auto& h : column_hits(question, entry)) {
        const auto& header = entry.table.columns()[h.column].header;
        if (std::find(out.begin(), out.end(), header) == out.end()) out.push_back(header);
    }
    return out;
}

std::vector<std::string> find_materials(std::string_view question, const dataset::Table& table) {
    std::vector<std::string> out;
    if (!table.has_key()) return out;
    auto key = table.column_index(table.key_column());
    std::string token;
    auto check = [&]() -> std::optional<std::string> {
        std::string t;
        t.swap(token);
        while (!t.empty() && (t.back() == '_' || t.back() == '-')) t.pop_back();
        bool marked = std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isupper(c) || std::isdigit(c); });
        if (t.size() < 3 || !marked || text::parse_number(t)) return std::nullopt;
        if (auto row = dataset::material_row(table, t))
            if (auto s = std::get_if<std::string>(&table.rows()[*row][key])) return *s;
        return std::nullopt;
    };
    auto keep = [&](std::optional<std::string> m) {
        if (m && std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    };
    for (char c : question) {
        if (word_char(c) || c == '-') {
            token += c;
            continue;
        }
        keep(check());
    }
    keep(check());
    return out;
}

std::optional<std::string> find_material(std::string_view question, const dataset::Table& table) {
    auto all = find_materials(question, table);
    if (all.empty()) return std::nullopt;
    return all.front();
}

TableQuery plan_table_query(std::string_view question, const dataset::TableEntry& entry) {
    const auto& table = entry.table;
    const std::string name = ident(table.name());
    const std::string key = table.key_column();
    auto hits = column_hits(question, entry);
    auto columns = match_columns(question, entry);
    auto hay = text::lower(question);
    auto dtype = [&](const std::string& c) { return table.columns()[table.column_index(c)].dtype; };

    TableQuery q;
    q.columns = columns;
    if (columns.empty()) throw NoRuleMatched("no column of " + table.name() + " is named in the question");

    if (auto material = find_material(question, table)) {
        q.material = *material;
        auto where = " FROM " + name + " WHERE " + ident(key) + " == " + query::quote_string(*material);
        std::vector<std::string> cols{ident(key)};
        for (const auto& c : columns) cols.push_back(ident(c));
        bool compare = contains_any(hay, {"compare", "compared", "comparison", "relative to", "other materials",
                                          "average", "typical"});
        auto numeric = std::find_if(columns.begin(), columns.end(),
                                    [&](const std::string& c) { return dtype(c) == dataset::DType::number; });
        if (compare && numeric != columns.end()) {
            q.kind = TableQuery::Kind::compare;
            q.columns = {*numeric};
            q.dsl = "SELECT " + ident(key) + ", " + ident(*numeric) + where + "; DESCRIBE " + ident(*numeric) +
                    " FROM " + name;
            return q;
        }
        q.kind = TableQuery::Kind::lookup;
        q.dsl = "SELECT " + text::join(cols, ", ") + where;
        return q;
    }

    std::vector<std::string> numeric;
    std::string boolean;
    for (const auto& c : columns) {
        if (dtype(c) == dataset::DType::number) numeric.push_back(c);
        else if (dtype(c) == dataset::DType::boolean && boolean.empty()) boolean = c;
    }

    if (!numeric.empty() &&
        contains_any(hay, {"describe", "distribution", "statistics", "statistic", "summary", "summarize",
                           "on average", "average", "mean"})) {
        q.kind = TableQuery::Kind::describe;
        q.columns = {numeric.front()};
        q.dsl = "DESCRIBE " + ident(numeric.front()) + " FROM " + name;
        return q;
    }

    if (auto t = intent::threshold(question); t && !numeric.empty()) {
        auto at = threshold_position(hay);
        std::string filter = numeric.front();
        for (const auto& h : hits) {
            const auto& header = table.columns()[h.column].header;
            if (h.pos < at && dtype(header) == dataset::DType::number) filter = header;
        }
        q.kind = TableQuery::Kind::threshold;
        q.threshold = t;
        q.filter_column = filter;
        std::vector<std::string> cols{ident(key), ident(filter)};
        for (const auto& c : columns)
            if (c != filter) cols.push_back(ident(c));
        std::string cond;
        switch (t->kind) {
        case intent::Threshold::Kind::greater: cond = ident(filter) + " > " + literal(t->value); break;
        case intent::Threshold::Kind::less: cond = ident(filter) + " < " + literal(t->value); break;
        case intent::Threshold::Kind::between:
            cond = ident(filter) + " >= " + literal(t->value) + " AND " + ident(filter) + " <= " + literal(t->upper);
            break;
        }
        q.dsl = "SELECT " + text::join(cols, ", ") + " FROM " + name + " WHERE " + cond + " LIMIT 10";
        return q;
    }

    if (auto dir = intent::superlative(question); dir && !numeric.empty()) {
        q.kind = TableQuery::Kind::top;
        q.direction = *dir;
        q.columns = {numeric.front()};
        bool plural = contains_any(hay, {"materials", "mofs", "structures", "list", "which ones"});
        q.k = intent::requested_count(question).value_or(plural ? 10 : 1);
        q.dsl = "SELECT " + ident(key) + ", " + ident(numeric.front()) + " FROM " + name + " ORDER BY " +
                ident(numeric.front()) + (*dir == intent::Direction::high ? " DESC" : " ASC") + " LIMIT " +
                std::to_string(q.k);
        return q;
    }

    if (!boolean.empty()) {
        q.kind = TableQuery::Kind::boolean_list;
        q.columns = {boolean};
        q.negated = contains_any(hay, {"without", "no", "not", "lack", "lacking"});
        q.dsl = "SELECT " + ident(key) + ", " + ident(boolean) + " FROM " + name + " WHERE " + ident(boolean) +
                (q.negated ? " == FALSE" : " == TRUE") + " LIMIT 10";
        return q;
    }
    throw NoRuleMatched("no rule covers this question");
}

std::string compose_table_answer(const TableQuery& q, std::string_view observation) {
    auto blocks = blocks_of(observation);
    if (blocks.empty() || blocks.front().table.rows.empty()) return "nothing";
    const auto& b = blocks.front();
    const std::string key = b.table.header.empty() ? "" : b.table.header.front();

    switch (q.kind) {
    case TableQuery::Kind::lookup: {
        std::vector<std::string> parts;
        auto id = column_cell(b, 0, key);
        for (const auto& c : q.columns) {
            auto v = column_cell(b, 0, c);
            if (is_boolean_cell(v)) parts.push_back("For " + id + ", " + c + " is " + v + ".");
            else parts.push_back("The " + header_stem(c) + " of " + id + " is " + v + unit_suffix(c) + ".");
        }
        return text::join(parts, " ");
    }
    case TableQuery::Kind::top: {
        auto word = q.direction == intent::Direction::high ? "highest" : "lowest";
        const auto& c = q.columns.front();
        if (b.table.rows.size() == 1)
            return "The material with the " + std::string(word) + " " + header_stem(c) + " is " +
                   listing(b, key, c, 1) + ".";
        return "The materials with the " + std::string(word) + " " + header_stem(c) + " are " +
               listing(b, key, c, b.table.rows.size()) + ".";
    }
    case TableQuery::Kind::threshold: {
        auto total = b.total.value_or(b.table.rows.size());
        return std::to_string(total) + " materials have " + header_stem(q.filter_column) + " " +
               threshold_text(*q.threshold) + unit_suffix(q.filter_column) +
               ". Examples: " + listing(b, key, q.filter_column, 10) + ".";
    }
    case TableQuery::Kind::boolean_list: {
        auto total = b.total.value_or(b.table.rows.size());
        return std::to_string(total) + " materials have " + q.columns.front() + " = " +
               (q.negated ? "False" : "True") + ", including " + listing(b, key, "", 10) + ".";
    }
    case TableQuery::Kind::compare: {
        const auto& c = q.columns.front();
        auto value = column_cell(b, 0, c);
        if (blocks.size() < 2) return "The " + header_stem(c) + " of " + q.material + " is " + value + unit_suffix(c) + ".";
        const auto& d = blocks[1];
        auto mean = describe_cell(d, "mean");
        auto v = text::parse_number(value);
        auto m = text::parse_number(mean);
        std::string side = v && m ? (*v > *m ? "above" : (*v < *m ? "below" : "at")) : "near";
        return "The " + header_stem(c) + " of " + q.material + " is " + value + unit_suffix(c) + ". Across all " +
               describe_cell(d, "count") + " materials the mean is " + mean + " (min " + describe_cell(d, "min") +
               ", max " + describe_cell(d, "max") + "), so " + q.material + " lies " + side + " the average.";
    }
    case TableQuery::Kind::describe: {
        const auto& c = q.columns.front();
        return "For " + header_stem(c) + unit_suffix(c) + ": count " + describe_cell(b, "count") + ", mean " +
               describe_cell(b, "mean") + ", std " + describe_cell(b, "std") + ", min " + describe_cell(b, "min") +
               ", median " + describe_cell(b, "50%") + ", max " + describe_cell(b, "max") + ".";
    }
    }
    return "nothing";
}

namespace {

bool generation_intent(const std::string& hay) {
    for (const auto& w : intent::words(hay))
        for (auto stem : {"generat", "creat", "design"})
            if (text::starts_with(w, stem)) return true;
    return false;
}

std::optional<std::string> arithmetic(std::string_view question) {
    std::string q(text::trim(question));
    for (auto prefix : {"what is", "calculate", "compute", "evaluate"})
        if (text::lower(q).rfind(prefix, 0) == 0) {
            q = std::string(text::trim(std::string_view(q).substr(std::string_view(prefix).size())));
            break;
        }
    while (!q.empty() && (q.back() == '?' || q.back() == '.')) q.pop_back();
    if (q.empty() || q.find_first_of("0123456789") == std::string::npos) return std::nullopt;
    try {
        calc::eval_expr(q);
    } catch (const Error&) {
        return std::nullopt;
    }
    return q;
}

std::string with_unders_as_spaces(std::string s) {
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
}

// Longest property names (or aliases) with a lookup of `kind` mentioned in the question.
std::vector<std::string> mentioned_properties(std::string_view question, const dataset::Registry& registry,
                                              dataset::MaterialKind kind) {
    std::vector<std::pair<std::string, std::size_t>> phrases;
    const auto& props = registry.properties();
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (!registry.lookup(props[i].name, kind)) continue;
        phrases.emplace_back(with_unders_as_spaces(dataset::fold_property_name(props[i].name)), i);
        for (const auto& a : props[i].aliases)
            phrases.emplace_back(with_unders_as_spaces(dataset::fold_property_name(a)), i);
    }
    auto hay = with_unders_as_spaces(dataset::fold_property_name(question));
    std::vector<std::string> out;
    for (const auto& h : best_hits(hay, phrases))
        if (std::find(out.begin(), out.end(), props[h.column].name) == out.end()) out.push_back(props[h.column].name);
    return out;
}

std::string act(const std::string& thought, const std::string& action, const std::string& input) {
    return " " + thought + "\nAction: " + action + "\nAction Input: " + input;
}

std::string finish(const std::string& answer) { return " I now know the final answer\nFinal Answer: " + answer; }

// Table findings from earlier steps, ahead of `answer`.
std::string with_earlier_findings(const std::vector<llm::Turn>& history, const std::string& answer) {
    std::string out;
    for (const auto& t : history)
        if (t.action == "search_csv" && !text::starts_with(t.observation, "Error:") &&
            t.observation.find("did not provide") == std::string::npos)
            out += agent::strip_final_hint(t.observation) + " ";
    return out + answer;
}

struct Bold {
    double value;
    std::string unit;
};

std::optional<Bold> first_bold_number(std::string_view observation) {
    static const std::regex bold(R"(\*\*\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([^*]*?)\s*\*\*)");
    std::string s(observation);
    std::smatch m;
    if (!std::regex_search(s, m, bold)) return std::nullopt;
    auto v = text::parse_number(m[1].str());
    if (!v) return std::nullopt;
    return Bold{*v, m[2].str()};
}

} // namespace

std::string RulesBackend::generate(const llm::CompletionRequest& request) {
    if (request.task == "agent") return agent_turn(request);
    if (request.task == "table_search") return table_turn(request);
    if (request.task == "predict_plan") return predict_plan(request);
    if (request.task == "gen_plan") return gen_plan(request);
    if (request.task == "predict_answer") return "nothing";
    if (request.task == "gen_children") return "";
    throw Error("rules backend has no rule for task '" + request.task + "'");
}

// "Predict the <properties> of <material>" when the question names predictable
// properties and no prediction has been made yet.
std::optional<std::string> RulesBackend::remaining_prediction(const std::string& question,
                                                              const std::vector<llm::Turn>& history) const {
    for (const auto& t : history)
        if (t.action == "predictor") return std::nullopt;
    auto props = mentioned_properties(question, registry_, dataset::MaterialKind::named_mof);
    if (props.empty()) return std::nullopt;
    auto ids = find_materials(question, registry_.primary_table());
    std::string input = "Predict the " + text::join(props, " and ");
    if (!ids.empty()) input += " of " + text::join(ids, ", ");
    return input;
}

std::string RulesBackend::agent_turn(const llm::CompletionRequest& r) const {
    const auto& history = r.history;
    const std::string& question = r.question;
    if (history.empty()) {
        if (generation_intent(text::lower(question)))
            return act("I need to generate new materials for this request.", "generator", question);
        static const std::regex cif(R"(([^\s'"`]+\.cif)\b)");
        std::smatch m;
        if (std::regex_search(question, m, cif))
            return act("I need to read the structure file.", "structure_info", m[1].str());
        if (auto expr = arithmetic(question)) return act("I need to evaluate this expression.", "calculator", *expr);
        return act("I need to look up the tabulated data first.", "search_csv", question);
    }

    const auto& last = history.back();
    const auto& obs = last.observation;
    if (text::starts_with(obs, "Error:")) {
        if (last.action == "search_csv")
            return act("The table search failed, so I will try a prediction instead.", "predictor", question);
        return act("The tool failed; I will try once more.", last.action, last.input);
    }
    if (last.action == "search_csv") {
        if (obs.find("did not provide") != std::string::npos)
            return act("The table has no such data, so I need to predict it.", "predictor", question);
        if (auto input = remaining_prediction(question, history))
            return act("The table answered part of the question; the rest needs a prediction.", "predictor", *input);
        return finish(agent::strip_final_hint(obs));
    }
    if (last.action == "predictor") {
        if (obs.find(predictor::log_caveat()) != std::string::npos)
            if (auto bold = first_bold_number(obs))
                return act("The predicted value is logarithmic, so I need to apply the exponential.", "calculator",
                           "exp(" + text::format_number(bold->value) + ")");
        return finish(with_earlier_findings(history, agent::strip_final_hint(obs)));
    }
    if (last.action == "calculator" || last.action == "Python_REPL") {
        if (history.size() >= 2 && history[history.size() - 2].action == "predictor") {
            auto v = text::parse_number(text::trim(obs));
            auto bold = first_bold_number(history[history.size() - 2].observation);
            if (v && bold)
                return finish("The value is approximately " + text::format_general(*v, 4) +
                              (bold->unit.empty() ? "" : " " + bold->unit) +
                              " after applying the exponential to the predicted logarithmic value.");
        }
        return finish("The result is " + std::string(text::trim(obs)) + ".");
    }
    return finish(agent::strip_final_hint(obs));
}

std::string RulesBackend::table_turn(const llm::CompletionRequest& r) const {
    const auto* entry = registry_.find_entry(registry_.primary_table_name());
    if (!entry) throw Error("rules backend: no primary table");
    TableQuery q;
    try {
        q = plan_table_query(r.question, *entry);
    } catch (const NoRuleMatched&) {
        return "Thought: The question asks for something the table does not hold.\n"
               "Final Thought: The table cannot answer this question.\nFinal Answer: nothing";
    }
    if (r.history.empty())
        return "Thought: I need to query the " + entry->table.name() + " table.\nInput: " + q.dsl;
    auto answer = compose_table_answer(q, r.history.back().observation);
    return "Thought: The result of the query answers the question.\n"
           "Final Thought: I can now state the answer from the observation.\nFinal Answer: " + answer;
}

std::string RulesBackend::predict_plan(const llm::CompletionRequest& r) const {
    auto props = mentioned_properties(r.question, registry_, dataset::MaterialKind::named_mof);
    if (props.empty())
        return "Thought: None of the predictable properties is mentioned.\nProperty: none\nMaterial: *\n"
               "Final Thought: I cannot predict this.";
    std::string selector = "*";
    auto ids = find_materials(r.question, registry_.primary_table());
    static const std::regex topo(R"(\b([A-Za-z]{3})\s+topology\b)");
    std::smatch m;
    if (!ids.empty()) selector = text::join(ids, ", ");
    else if (std::regex_search(r.question, m, topo)) selector = text::lower(m[1].str()) + "*";
    std::string out = "Thought: I need to predict the " + text::join(props, " and ") + " of the materials.\n";
    for (const auto& p : props) out += "Property: " + p + "\nMaterial: " + selector + "\n";
    out += "Final Thought: Based on the predicted " + text::join(props, " and ") + ", I can answer the question.";
    return out;
}

std::string RulesBackend::gen_plan(const llm::CompletionRequest& r) const {
    auto props = mentioned_properties(r.question, registry_, dataset::MaterialKind::gene);
    if (props.empty())
        return "Thought: None of the supported properties is mentioned.\nProperty: none\nObjective: max";
    const auto& property = props.front();
    auto hay = text::lower(r.question);
    std::string objective;
    if (auto v = intent::near_value(r.question)) {
        objective = "near " + text::format_number(*v);
    } else if (auto t = intent::threshold(r.question)) {
        switch (t->kind) {
        case intent::Threshold::Kind::greater: objective = "range " + text::format_number(t->value) + " inf"; break;
        case intent::Threshold::Kind::less: objective = "range -inf " + text::format_number(t->value); break;
        case intent::Threshold::Kind::between:
            objective = "range " + text::format_number(t->value) + " " + text::format_number(t->upper);
            break;
        }
    } else if (intent::superlative(r.question) == intent::Direction::low ||
               contains_any(hay, {"low", "small", "minimal", "minimum", "minimize"})) {
        objective = "min";
    } else {
        objective = "max";
    }
    return "Thought: I need to generate materials by their " + property + ".\n"
           "Property: " + property + "\n"
           "Objective: " + objective + "\n"
           "Search look-up table: extract the materials that best fit the objective for " + property + ".\n"
           "Genetic algorithm: create new genes from the extracted parents.\n"
           "Final thought: report the best generated material.";
}

} // namespace mofsmith::rules
