#pragma once

#include "mofsmith/dataset.hpp"
#include "mofsmith/query.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

// Random tables and plans plus a full-scan reference evaluator for the query engine.
namespace testing::query_ref {


struct RefTable {
    std::vector<std::string> headers;
    std::vector<int> kinds;  // 0 number, 1 text, 2 bool
    std::vector<std::vector<std::optional<std::string>>> cells;  // raw text, nullopt = blank
};

inline RefTable random_table(std::mt19937_64& rng) {
    RefTable t;
    std::size_t ncols = 2 + rng() % 5;
    std::size_t nrows = 1 + rng() % 1000;
    t.headers.push_back("name");
    t.kinds.push_back(1);
    for (std::size_t c = 1; c < ncols; ++c) {
        t.headers.push_back("col " + std::to_string(c));
        t.kinds.push_back(static_cast<int>(rng() % 3));
    }
    static const char* words[] = {"Zn", "Cu", "Co", "Zr", "Mn", "ZnCu", "Cd"};
    for (std::size_t r = 0; r < nrows; ++r) {
        std::vector<std::optional<std::string>> row;
        row.push_back("M" + std::to_string(r));
        for (std::size_t c = 1; c < ncols; ++c) {
            if (rng() % 10 == 0) {
                row.push_back(std::nullopt);
                continue;
            }
            switch (t.kinds[c]) {
            case 0: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(rng() % 2000) / 100.0 - 5.0);
                row.push_back(std::string(buf));
                break;
            }
            case 1: row.push_back(std::string(words[rng() % 7])); break;
            default: row.push_back(std::string(rng() % 2 ? "True" : "False"));
            }
        }
        t.cells.push_back(std::move(row));
    }
    // A column with only blanks reads back as numeric; keep the declared kinds honest.
    for (std::size_t c = 1; c < ncols; ++c) {
        bool any = false;
        for (auto& row : t.cells) any = any || row[c].has_value();
        if (!any && !t.cells.empty()) t.cells[0][c] = t.kinds[c] == 0 ? "1.000" : t.kinds[c] == 1 ? "Zn" : "True";
    }
    return t;
}

inline std::string to_csv(const RefTable& t) {
    std::string s;
    for (const auto& h : t.headers) s += "," + h;
    s += "\n";
    for (std::size_t r = 0; r < t.cells.size(); ++r) {
        s += std::to_string(r * 3 + 1);
        for (const auto& c : t.cells[r]) s += "," + c.value_or("");
        s += "\n";
    }
    return s;
}

struct RefCond {
    std::size_t col;
    std::string op;
    std::string literal_text;  // as written in the query
    double num = 0;
    std::string str;
    bool flag = false;
};

struct RefPlan {
    std::vector<std::size_t> cols;  // empty = all
    std::vector<RefCond> conds;
    std::vector<bool> ands;
    std::optional<std::size_t> order;
    bool desc = false;
    std::optional<std::size_t> limit;
};

inline RefPlan random_plan(const RefTable& t, std::mt19937_64& rng) {
    RefPlan p;
    if (rng() % 3) {
        std::size_t k = 1 + rng() % t.headers.size();
        for (std::size_t i = 0; i < k; ++i) p.cols.push_back(rng() % t.headers.size());
    }
    std::size_t nconds = rng() % 4;
    for (std::size_t i = 0; i < nconds; ++i) {
        RefCond c;
        c.col = rng() % t.headers.size();
        int kind = t.kinds[c.col];
        if (kind == 0) {
            static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
            c.op = ops[rng() % 6];
            c.num = static_cast<double>(rng() % 2000) / 100.0 - 5.0;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", c.num);
            c.literal_text = buf;
        } else if (kind == 1) {
            static const char* ops[] = {"==", "!=", "CONTAINS"};
            c.op = ops[rng() % 3];
            static const char* lits[] = {"Zn", "Cu", "n", "M1", "M10", "Cd"};
            c.str = lits[rng() % 6];
            c.literal_text = "'" + c.str + "'";
        } else {
            c.op = rng() % 2 ? "==" : "!=";
            c.flag = rng() % 2;
            c.literal_text = c.flag ? "TRUE" : "FALSE";
        }
        p.conds.push_back(c);
        if (i > 0) p.ands.push_back(rng() % 2);
    }
    if (rng() % 2) {
        p.order = rng() % t.headers.size();
        p.desc = rng() % 2;
    }
    if (rng() % 2) p.limit = 1 + rng() % 50;
    return p;
}

inline std::string to_query(const RefTable& t, const RefPlan& p) {
    auto id = [&](std::size_t c) { return "`" + t.headers[c] + "`"; };
    std::string q = "SELECT ";
    if (p.cols.empty()) q += "*";
    for (std::size_t i = 0; i < p.cols.size(); ++i) q += (i ? ", " : "") + id(p.cols[i]);
    q += " FROM t";
    for (std::size_t i = 0; i < p.conds.size(); ++i) {
        q += i == 0 ? " WHERE " : (p.ands[i - 1] ? " AND " : " OR ");
        q += id(p.conds[i].col) + " " + p.conds[i].op + " " + p.conds[i].literal_text;
    }
    if (p.order) q += " ORDER BY " + id(*p.order) + (p.desc ? " DESC" : " ASC");
    if (p.limit) q += " LIMIT " + std::to_string(*p.limit);
    return q;
}

inline bool ref_test(const RefTable& t, const RefCond& c, std::size_t r) {
    const auto& cell = t.cells[r][c.col];
    if (!cell) return false;
    switch (t.kinds[c.col]) {
    case 0: {
        double a = std::stod(*cell);
        if (c.op == "==") return a == c.num;
        if (c.op == "!=") return a != c.num;
        if (c.op == "<") return a < c.num;
        if (c.op == "<=") return a <= c.num;
        if (c.op == ">") return a > c.num;
        return a >= c.num;
    }
    case 1:
        if (c.op == "==") return *cell == c.str;
        if (c.op == "!=") return *cell != c.str;
        return cell->find(c.str) != std::string::npos;
    default: {
        bool a = *cell == "True";
        return c.op == "==" ? a == c.flag : a != c.flag;
    }
    }
}

// Row order of the reference: filtered rows, then an insertion sort (stable by
// construction) with blanks after every value in both directions.
inline std::vector<std::size_t> ref_rows(const RefTable& t, const RefPlan& p, std::size_t& total) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.cells.size(); ++r) {
        bool keep = true;
        for (std::size_t i = 0; i < p.conds.size(); ++i) {
            bool v = ref_test(t, p.conds[i], r);
            keep = i == 0 ? v : (p.ands[i - 1] ? (keep && v) : (keep || v));
        }
        if (keep) rows.push_back(r);
    }
    total = rows.size();
    if (p.order) {
        auto col = *p.order;
        auto before = [&](std::size_t a, std::size_t b) {
            const auto& x = t.cells[a][col];
            const auto& y = t.cells[b][col];
            if (!x || !y) return x.has_value() && !y.has_value();
            bool lt, gt;
            if (t.kinds[col] == 0) {
                lt = std::stod(*x) < std::stod(*y);
                gt = std::stod(*y) < std::stod(*x);
            } else if (t.kinds[col] == 2) {
                lt = *x == "False" && *y == "True";
                gt = *x == "True" && *y == "False";
            } else {
                lt = *x < *y;
                gt = *y < *x;
            }
            return p.desc ? gt : lt;
        };
        for (std::size_t i = 1; i < rows.size(); ++i)
            for (std::size_t j = i; j > 0 && before(rows[j], rows[j - 1]); --j) std::swap(rows[j], rows[j - 1]);
    }
    if (p.limit && rows.size() > *p.limit) rows.resize(*p.limit);
    return rows;
}

inline bool same_cell(const mofsmith::dataset::Value& got, const std::optional<std::string>& want, int kind) {
    if (!want) return mofsmith::dataset::is_null(got);
    if (kind == 0) return std::holds_alternative<double>(got) && std::get<double>(got) == std::stod(*want);
    if (kind == 2) return std::holds_alternative<bool>(got) && std::get<bool>(got) == (*want == "True");
    return std::holds_alternative<std::string>(got) && std::get<std::string>(got) == *want;
}


struct QueryOracleResult {
    std::size_t cases = 0;
    std::vector<std::string> mismatches;
};

/// `n` random tables and valid plans, executed by the engine and by the naive evaluator above.
inline QueryOracleResult run_query_oracle(std::uint64_t seed, std::size_t n) {
    QueryOracleResult out;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto rt = random_table(rng);
        auto table = mofsmith::dataset::parse_table(to_csv(rt), "t");
        auto plan = random_plan(rt, rng);
        auto q = to_query(rt, plan);
        auto result = mofsmith::query::execute(mofsmith::query::parse_query(q), table);

        std::size_t total = 0;
        auto rows = ref_rows(rt, plan, total);
        std::vector<std::size_t> cols = plan.cols;
        if (cols.empty()) {
            cols.resize(rt.headers.size());
            std::iota(cols.begin(), cols.end(), 0);
        }
        bool ok = result.row_count_total == total && result.rows.size() == rows.size() &&
                  result.columns.size() == cols.size();
        for (std::size_t r = 0; ok && r < rows.size(); ++r) {
            ok = result.index[r] == std::to_string(rows[r] * 3 + 1);
            for (std::size_t c = 0; ok && c < cols.size(); ++c)
                ok = same_cell(result.rows[r][c], rt.cells[rows[r]][cols[c]], rt.kinds[cols[c]]);
        }
        ++out.cases;
        if (!ok) out.mismatches.push_back(q);
    }
    return out;
}

} // namespace testing::query_ref
