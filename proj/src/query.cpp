#include "mofsmith/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace mofsmith::query {

namespace {

enum class Tok { ident, quoted_ident, string, number, op, comma, star, semicolon, lparen, rparen, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            Token t;
            t.pos = pos_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (c == '`') {
                t.kind = Tok::quoted_ident;
                t.text = delimited('`', "closing '`'");
            } else if (c == '\'') {
                t.kind = Tok::string;
                t.text = delimited('\'', "closing quote");
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                       ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
                        (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.'))) {
                t.kind = Tok::number;
                t.number = number();
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::ident;
                std::size_t s = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    ++pos_;
                t.text = std::string(src_.substr(s, pos_ - s));
            } else if (c == ',') {
                t.kind = Tok::comma;
                ++pos_;
            } else if (c == '*') {
                t.kind = Tok::star;
                ++pos_;
            } else if (c == ';') {
                t.kind = Tok::semicolon;
                ++pos_;
            } else if (c == '(') {
                t.kind = Tok::lparen;
                ++pos_;
            } else if (c == ')') {
                t.kind = Tok::rparen;
                ++pos_;
            } else {
                static constexpr std::string_view ops[] = {"==", "!=", "<=", ">=", "<", ">"};
                bool found = false;
                for (auto op : ops) {
                    if (src_.substr(pos_, op.size()) == op) {
                        t.kind = Tok::op;
                        t.text = std::string(op);
                        pos_ += op.size();
                        found = true;
                        break;
                    }
                }
                if (!found) throw SyntaxError(pos_, "a token");
            }
            out.push_back(std::move(t));
        }
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    std::string delimited(char q, const char* expected) {
        std::size_t start = pos_++;
        std::string out;
        while (true) {
            if (pos_ >= src_.size()) throw SyntaxError(src_.size(), expected);
            char c = src_[pos_++];
            if (c == q) {
                if (pos_ < src_.size() && src_[pos_] == q) {
                    out += q;
                    ++pos_;
                    continue;
                }
                break;
            }
            out += c;
        }
        if (q == '`' && out.empty()) throw SyntaxError(start, "a column name");
        return out;
    }

    double number() {
        std::size_t start = pos_;
        if (src_[pos_] == '-' || src_[pos_] == '+') ++pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            else
                pos_ = save;
        }
        auto lit = src_.substr(start, pos_ - start);
        auto v = text::parse_number(lit);
        if (!v) throw SyntaxError(start, "a number");
        return *v;
    }
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks, std::size_t end_pos) : toks_(std::move(toks)), end_pos_(end_pos) {}

    QueryPlan statement() {
        QueryPlan plan;
        if (keyword("SELECT")) {
            plan.kind = QueryPlan::Kind::select;
            if (peek().kind == Tok::star) {
                next();
            } else {
                plan.columns.push_back(column("a column list or '*'"));
                while (peek().kind == Tok::comma) {
                    next();
                    plan.columns.push_back(column("a column name"));
                }
            }
            expect_keyword("FROM");
            plan.table = table_name();
            if (keyword("WHERE")) {
                plan.filters.push_back(condition());
                while (true) {
                    if (keyword("AND")) plan.joins.push_back(Conjunction::and_);
                    else if (keyword("OR")) plan.joins.push_back(Conjunction::or_);
                    else break;
                    plan.filters.push_back(condition());
                }
            }
            if (keyword("ORDER")) {
                expect_keyword("BY");
                OrderBy ob;
                ob.column = column("a column name");
                if (keyword("DESC")) ob.descending = true;
                else keyword("ASC");
                plan.order_by = ob;
            }
            if (keyword("LIMIT")) {
                const auto& t = peek();
                if (t.kind != Tok::number || t.number < 1 || std::trunc(t.number) != t.number ||
                    t.number > 1e15)
                    throw SyntaxError(t.pos, "a positive integer");
                plan.limit = static_cast<std::size_t>(t.number);
                next();
            }
        } else if (keyword("DESCRIBE")) {
            plan.kind = QueryPlan::Kind::describe;
            plan.describe_column = column("a column name");
            expect_keyword("FROM");
            plan.table = table_name();
        } else {
            throw SyntaxError(peek().pos, "SELECT or DESCRIBE");
        }
        return plan;
    }

    bool at(Tok k) const { return peek().kind == k; }
    const Token& peek() const { return toks_[i_]; }
    void next() {
        if (i_ + 1 < toks_.size()) ++i_;
    }

private:
    std::vector<Token> toks_;
    std::size_t end_pos_;
    std::size_t i_ = 0;

    bool keyword(std::string_view kw) {
        const auto& t = peek();
        if (t.kind == Tok::ident && text::iequals(t.text, kw)) {
            next();
            return true;
        }
        return false;
    }

    void expect_keyword(std::string_view kw) {
        if (!keyword(kw)) throw SyntaxError(peek().pos, std::string(kw));
    }

    static bool reserved(std::string_view w) {
        static constexpr std::string_view kws[] = {"SELECT", "FROM", "WHERE", "ORDER", "BY", "ASC", "DESC",
                                                   "LIMIT", "DESCRIBE", "AND", "OR", "CONTAINS", "TRUE", "FALSE"};
        for (auto k : kws)
            if (text::iequals(w, k)) return true;
        return false;
    }

    std::string column(const char* expected) {
        const auto& t = peek();
        if (t.kind == Tok::quoted_ident || (t.kind == Tok::ident && !reserved(t.text))) {
            auto s = t.text;
            next();
            return s;
        }
        throw SyntaxError(t.pos, expected);
    }

    std::string table_name() {
        const auto& t = peek();
        if (t.kind == Tok::quoted_ident || (t.kind == Tok::ident && !reserved(t.text))) {
            auto s = t.text;
            next();
            return s;
        }
        throw SyntaxError(t.pos, "a table name");
    }

    Condition condition() {
        Condition c;
        c.column = column("a column name");
        const auto& t = peek();
        if (t.kind == Tok::op) {
            static constexpr std::pair<std::string_view, CmpOp> ops[] = {
                {"==", CmpOp::eq}, {"!=", CmpOp::ne}, {"<=", CmpOp::le},
                {">=", CmpOp::ge}, {"<", CmpOp::lt},  {">", CmpOp::gt}};
            for (auto [s, op] : ops)
                if (t.text == s) c.op = op;
            next();
        } else if (keyword("CONTAINS")) {
            c.op = CmpOp::contains;
        } else {
            throw SyntaxError(t.pos, "a comparison operator");
        }
        const auto& v = peek();
        if (v.kind == Tok::number) c.literal = v.number;
        else if (v.kind == Tok::string) c.literal = v.text;
        else if (v.kind == Tok::ident && text::iequals(v.text, "TRUE")) c.literal = true;
        else if (v.kind == Tok::ident && text::iequals(v.text, "FALSE")) c.literal = false;
        else throw SyntaxError(v.pos, "a literal");
        next();
        return c;
    }
};

} // namespace

std::vector<QueryPlan> parse_script(std::string_view src) {
    auto toks = Lexer(src).run();
    Parser p(std::move(toks), src.size());
    std::vector<QueryPlan> out;
    while (!p.at(Tok::end)) {
        if (p.at(Tok::semicolon)) {
            p.next();
            continue;
        }
        out.push_back(p.statement());
        if (!p.at(Tok::semicolon) && !p.at(Tok::end)) throw SyntaxError(p.peek().pos, "end of statement");
    }
    if (out.empty()) throw SyntaxError(0, "SELECT or DESCRIBE");
    return out;
}

QueryPlan parse_query(std::string_view src) {
    auto toks = Lexer(src).run();
    Parser p(std::move(toks), src.size());
    auto plan = p.statement();
    if (p.at(Tok::semicolon)) p.next();
    if (!p.at(Tok::end)) throw SyntaxError(p.peek().pos, "end of query");
    return plan;
}

std::string quote_identifier(std::string_view name) {
    std::string out = "`";
    for (char c : name) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

std::string quote_string(std::string_view value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

namespace {

std::string format_literal(const Literal& l) {
    if (auto d = std::get_if<double>(&l)) return text::format_number(*d);
    if (auto b = std::get_if<bool>(&l)) return *b ? "TRUE" : "FALSE";
    return quote_string(std::get<std::string>(l));
}

std::string_view op_text(CmpOp op) {
    switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
    case CmpOp::contains: return "CONTAINS";
    }
    return "==";
}

} // namespace

std::string format_query(const QueryPlan& plan) {
    if (plan.kind == QueryPlan::Kind::describe)
        return "DESCRIBE " + quote_identifier(plan.describe_column) + " FROM " + quote_identifier(plan.table);
    std::string out = "SELECT ";
    if (plan.columns.empty()) {
        out += "*";
    } else {
        for (std::size_t i = 0; i < plan.columns.size(); ++i) {
            if (i) out += ", ";
            out += quote_identifier(plan.columns[i]);
        }
    }
    out += " FROM " + quote_identifier(plan.table);
    for (std::size_t i = 0; i < plan.filters.size(); ++i) {
        if (i == 0) out += " WHERE ";
        else out += plan.joins[i - 1] == Conjunction::and_ ? " AND " : " OR ";
        const auto& c = plan.filters[i];
        out += quote_identifier(c.column) + " " + std::string(op_text(c.op)) + " " + format_literal(c.literal);
    }
    if (plan.order_by)
        out += " ORDER BY " + quote_identifier(plan.order_by->column) + (plan.order_by->descending ? " DESC" : " ASC");
    if (plan.limit) out += " LIMIT " + std::to_string(*plan.limit);
    return out;
}

namespace {

using dataset::DType;
using dataset::Value;

struct BoundCondition {
    std::size_t col;
    DType dtype;
    CmpOp op;
    Literal literal;
};

BoundCondition bind(const Condition& c, const dataset::Table& table) {
    auto col = table.column_index(c.column);
    auto dtype = table.columns()[col].dtype;
    auto bad = [&](const char* why) {
        return TypeMismatch("cannot apply '" + std::string(op_text(c.op)) + "' to " +
                            std::string(dataset::to_string(dtype)) + " column '" + c.column + "': " + why);
    };
    switch (dtype) {
    case DType::number:
        if (!std::holds_alternative<double>(c.literal)) throw bad("expected a number literal");
        if (c.op == CmpOp::contains) throw bad("CONTAINS needs a text column");
        break;
    case DType::text:
        if (!std::holds_alternative<std::string>(c.literal)) throw bad("expected a quoted string");
        if (c.op != CmpOp::eq && c.op != CmpOp::ne && c.op != CmpOp::contains)
            throw bad("ordering comparisons need a number column");
        break;
    case DType::boolean:
        if (!std::holds_alternative<bool>(c.literal)) throw bad("expected TRUE or FALSE");
        if (c.op != CmpOp::eq && c.op != CmpOp::ne) throw bad("booleans support == and != only");
        break;
    }
    return {col, dtype, c.op, c.literal};
}

bool test(const BoundCondition& c, const Value& v) {
    if (dataset::is_null(v)) return false;
    switch (c.dtype) {
    case DType::number: {
        double a = std::get<double>(v), b = std::get<double>(c.literal);
        switch (c.op) {
        case CmpOp::eq: return a == b;
        case CmpOp::ne: return a != b;
        case CmpOp::lt: return a < b;
        case CmpOp::le: return a <= b;
        case CmpOp::gt: return a > b;
        case CmpOp::ge: return a >= b;
        default: return false;
        }
    }
    case DType::text: {
        const auto& a = std::get<std::string>(v);
        const auto& b = std::get<std::string>(c.literal);
        if (c.op == CmpOp::eq) return a == b;
        if (c.op == CmpOp::ne) return a != b;
        return a.find(b) != std::string::npos;
    }
    case DType::boolean: {
        bool a = std::get<bool>(v), b = std::get<bool>(c.literal);
        return c.op == CmpOp::eq ? a == b : a != b;
    }
    }
    return false;
}

// Strict weak order for one column with nulls ordered last in either direction.
bool less_value(const Value& a, const Value& b, bool descending) {
    bool an = dataset::is_null(a), bn = dataset::is_null(b);
    if (an || bn) return !an && bn;
    auto cmp = [&](const auto& x, const auto& y) { return descending ? y < x : x < y; };
    if (auto x = std::get_if<double>(&a)) return cmp(*x, std::get<double>(b));
    if (auto x = std::get_if<bool>(&a)) return cmp(*x, std::get<bool>(b));
    return cmp(std::get<std::string>(a), std::get<std::string>(b));
}

void check_table(const QueryPlan& plan, const dataset::Table& table) {
    if (!text::iequals(plan.table, table.name())) throw dataset::UnknownTable(plan.table);
}

} // namespace

double quantile_sorted(const std::vector<double>& x, double q) {
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    double pos = q * static_cast<double>(x.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    return x[lo] + (x[hi] - x[lo]) * (pos - static_cast<double>(lo));
}

DescribeStats describe(std::vector<double> v) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    DescribeStats s{static_cast<double>(v.size()), nan, nan, nan, nan, nan, nan, nan};
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    double n = static_cast<double>(v.size());
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    s.mean = mean;
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        s.std = std::sqrt(ss / (n - 1));
    }
    s.min = v.front();
    s.max = v.back();
    s.q25 = quantile_sorted(v, 0.25);
    s.q50 = quantile_sorted(v, 0.50);
    s.q75 = quantile_sorted(v, 0.75);
    return s;
}

ResultTable execute(const QueryPlan& plan, const dataset::Table& table) {
    check_table(plan, table);
    ResultTable out;

    if (plan.kind == QueryPlan::Kind::describe) {
        auto col = table.column_index(plan.describe_column);
        if (table.columns()[col].dtype != DType::number)
            throw TypeMismatch("DESCRIBE needs a number column; '" + plan.describe_column + "' is " +
                               std::string(dataset::to_string(table.columns()[col].dtype)));
        std::vector<double> values;
        for (const auto& r : table.rows())
            if (auto d = std::get_if<double>(&r[col])) values.push_back(*d);
        auto s = describe(std::move(values));
        out.columns = {{plan.describe_column, DType::number}};
        out.index = {"count", "mean", "std", "min", "25%", "50%", "75%", "max"};
        for (double v : {s.count, s.mean, s.std, s.min, s.q25, s.q50, s.q75, s.max})
            out.rows.push_back({std::isnan(v) ? Value{} : Value{v}});
        out.row_count_total = out.rows.size();
        return out;
    }

    std::vector<std::size_t> cols;
    if (plan.columns.empty()) {
        for (std::size_t i = 0; i < table.column_count(); ++i) cols.push_back(i);
    } else {
        for (const auto& c : plan.columns) cols.push_back(table.column_index(c));
    }
    std::vector<BoundCondition> conds;
    for (const auto& c : plan.filters) conds.push_back(bind(c, table));
    std::optional<std::size_t> order_col;
    if (plan.order_by) order_col = table.column_index(plan.order_by->column);

    std::vector<std::size_t> selected;
    const auto& rows = table.rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        bool keep = true;
        for (std::size_t i = 0; i < conds.size(); ++i) {
            bool t = test(conds[i], rows[r][conds[i].col]);
            if (i == 0) keep = t;
            else if (plan.joins[i - 1] == Conjunction::and_) keep = keep && t;
            else keep = keep || t;
        }
        if (keep) selected.push_back(r);
    }
    out.row_count_total = selected.size();

    if (order_col) {
        bool desc = plan.order_by->descending;
        std::stable_sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
            return less_value(rows[a][*order_col], rows[b][*order_col], desc);
        });
    }
    if (plan.limit && selected.size() > *plan.limit) selected.resize(*plan.limit);

    for (auto c : cols) out.columns.push_back(table.columns()[c]);
    for (auto r : selected) {
        dataset::Row row;
        row.reserve(cols.size());
        for (auto c : cols) row.push_back(rows[r][c]);
        out.rows.push_back(std::move(row));
        out.index.push_back(table.index()[r]);
    }
    return out;
}

namespace {

std::string cell_text(const Value& v) {
    if (dataset::is_null(v)) return "";
    if (auto d = std::get_if<double>(&v)) return text::format_general(*d, 6);
    std::string s = dataset::format_value(v);
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

} // namespace

std::string render_markdown(const ResultTable& result, std::size_t token_budget, const TokenEstimator& estimate) {
    if (token_budget == 0) throw Error("render_markdown: token budget must be positive");
    std::string out = "| |";
    for (const auto& c : result.columns) out += " " + c.header + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < result.columns.size(); ++i) out += "---|";
    out += "\n";
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        out += "| " + result.index[r] + " |";
        for (const auto& v : result.rows[r]) out += " " + cell_text(v) + " |";
        out += "\n";
    }
    auto n = estimate ? estimate(out) : estimate_tokens(out);
    if (n > token_budget) throw TokenBudgetExceeded(n, token_budget);
    return out;
}

std::optional<MarkdownTable> parse_markdown_table(std::string_view md) {
    auto cells_of = [](std::string_view line) {
        std::vector<std::string> cells;
        line = text::trim(line);
        if (line.size() < 2 || line.front() != '|' || line.back() != '|') return cells;
        line = line.substr(1, line.size() - 2);
        std::string cur;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
                cur += '|';
                ++i;
            } else if (line[i] == '|') {
                cells.emplace_back(text::trim(cur));
                cur.clear();
            } else {
                cur += line[i];
            }
        }
        cells.emplace_back(text::trim(cur));
        return cells;
    };
    auto lines = text::split(md, '\n');
    std::size_t i = 0;
    while (i < lines.size() && text::trim(lines[i]).substr(0, 1) != "|") ++i;
    if (i + 1 >= lines.size()) return std::nullopt;
    auto header = cells_of(lines[i]);
    auto sep = text::trim(lines[i + 1]);
    if (header.empty() || sep.find("---") == std::string_view::npos) return std::nullopt;
    MarkdownTable t;
    t.header.assign(header.begin() + 1, header.end());
    for (std::size_t j = i + 2; j < lines.size(); ++j) {
        auto cells = cells_of(lines[j]);
        if (cells.empty()) break;
        t.rows.push_back(std::move(cells));
    }
    return t;
}

bool is_retryable(const std::exception& e) noexcept {
    return dynamic_cast<const SyntaxError*>(&e) || dynamic_cast<const dataset::UnknownColumn*>(&e) ||
           dynamic_cast<const dataset::UnknownTable*>(&e) || dynamic_cast<const TypeMismatch*>(&e);
}

Retrieval run_with_retries(std::string_view question, const TableLookup& tables, const Planner& planner,
                           std::size_t max_attempts, std::size_t token_budget, const TokenEstimator& estimate) {
    std::optional<std::string> last_error;
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        auto query_text = planner(question, last_error);
        try {
            auto plans = parse_script(query_text);
            Retrieval out;
            out.attempts = attempt;
            for (const auto& plan : plans) {
                const auto* table = tables(plan.table);
                if (!table) throw dataset::UnknownTable(plan.table);
                out.results.push_back(execute(plan, *table));
            }
            std::size_t remaining = token_budget;
            for (const auto& r : out.results) {
                if (!out.markdown.empty()) out.markdown += "\n";
                auto md = render_markdown(r, remaining, estimate);
                remaining -= std::min(remaining - 1, estimate ? estimate(md) : estimate_tokens(md));
                out.markdown += md;
            }
            return out;
        } catch (const TokenBudgetExceeded&) {
            throw;
        } catch (const Error& e) {
            if (!is_retryable(e)) throw;
            last_error = e.what();
        }
    }
    throw RetriesExhausted(max_attempts, last_error.value_or("no attempts made"));
}

Retrieval run_with_retries(std::string_view question, const dataset::Table& table, const Planner& planner,
                           std::size_t max_attempts, std::size_t token_budget, const TokenEstimator& estimate) {
    TableLookup lookup = [&table](std::string_view name) -> const dataset::Table* {
        return text::iequals(name, table.name()) ? &table : nullptr;
    };
    return run_with_retries(question, lookup, planner, max_attempts, token_budget, estimate);
}

} // namespace mofsmith::query
