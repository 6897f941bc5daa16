#pragma once

#include "mofsmith/calc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testing::calc_ref {


// Independent reference: a tiny expression tree built and evaluated here, printed
// fully parenthesized so the text has exactly one reading.
struct Ref {
    enum Kind { num, neg, bin, fn } kind = num;
    double value = 0;
    char op = '+';
    std::string name;
    std::vector<std::unique_ptr<Ref>> args;
};

inline std::unique_ptr<Ref> random_ref(std::mt19937_64& rng, int depth) {
    auto r = std::make_unique<Ref>();
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 9);
    int k = pick(rng);
    if (k <= 2) {
        std::uniform_real_distribution<double> mag(-3, 3);
        std::uniform_real_distribution<double> mant(0, 10);
        r->value = k == 0 ? static_cast<double>(rng() % 20) : mant(rng) * std::pow(10.0, std::round(mag(rng)));
        return r;
    }
    if (k == 3) {
        r->kind = Ref::neg;
        r->args.push_back(random_ref(rng, depth - 1));
        return r;
    }
    if (k <= 7) {
        r->kind = Ref::bin;
        r->op = "+-*/^"[rng() % 5];
        r->args.push_back(random_ref(rng, depth - 1));
        if (r->op == '^') {
            auto e = std::make_unique<Ref>();
            e->value = static_cast<double>(rng() % 4);
            r->args.push_back(std::move(e));
        } else {
            r->args.push_back(random_ref(rng, depth - 1));
        }
        return r;
    }
    static const char* names[] = {"exp", "ln", "log10", "sqrt", "abs", "pow", "min", "max"};
    r->kind = Ref::fn;
    r->name = names[rng() % 8];
    r->args.push_back(random_ref(rng, depth - 1));
    if (r->name == "pow" || r->name == "min" || r->name == "max") r->args.push_back(random_ref(rng, depth - 1));
    return r;
}

inline std::string print(const Ref& r) {
    char buf[64];
    switch (r.kind) {
    case Ref::num: std::snprintf(buf, sizeof buf, "%.17g", r.value); return buf;
    case Ref::neg: return "(-" + print(*r.args[0]) + ")";
    case Ref::bin: return "(" + print(*r.args[0]) + " " + std::string(1, r.op) + " " + print(*r.args[1]) + ")";
    case Ref::fn: {
        std::string s = r.name + "(" + print(*r.args[0]);
        if (r.args.size() > 1) s += ", " + print(*r.args[1]);
        return s + ")";
    }
    }
    return {};
}

// Nothing when the expression leaves the reals or overflows.
inline std::optional<double> reference(const Ref& r) {
    auto ok = [](double v) { return std::isfinite(v) ? std::optional<double>(v) : std::nullopt; };
    if (r.kind == Ref::num) return r.value;
    auto a = reference(*r.args[0]);
    if (!a) return std::nullopt;
    if (r.kind == Ref::neg) return -*a;
    std::optional<double> b;
    if (r.args.size() > 1) {
        b = reference(*r.args[1]);
        if (!b) return std::nullopt;
    }
    if (r.kind == Ref::bin) {
        switch (r.op) {
        case '+': return ok(*a + *b);
        case '-': return ok(*a - *b);
        case '*': return ok(*a * *b);
        case '/': return *b == 0 ? std::nullopt : ok(*a / *b);
        default: return ok(std::pow(*a, *b));
        }
    }
    if (r.name == "exp") return ok(std::exp(*a));
    if (r.name == "ln") return *a <= 0 ? std::nullopt : ok(std::log(*a));
    if (r.name == "log10") return *a <= 0 ? std::nullopt : ok(std::log10(*a));
    if (r.name == "sqrt") return *a < 0 ? std::nullopt : ok(std::sqrt(*a));
    if (r.name == "abs") return std::fabs(*a);
    if (r.name == "pow") return ok(std::pow(*a, *b));
    if (r.name == "min") return std::min(*a, *b);
    return std::max(*a, *b);
}


struct CalcOracleResult {
    std::size_t compared = 0, domain = 0;
    std::vector<std::string> failures;
};

/// `n` random expressions; values must agree within `rel_tol` (relative, floored at 1) and
/// out-of-domain expressions must raise DomainError.
inline CalcOracleResult run_calc_oracle(std::uint64_t seed, std::size_t n, double rel_tol = 1e-12) {
    CalcOracleResult out;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = random_ref(rng, 5);
        auto src = print(*r);
        auto want = reference(*r);
        if (!want) {
            ++out.domain;
            try {
                mofsmith::calc::eval_expr(src);
                out.failures.push_back(src + " should be a domain error");
            } catch (const mofsmith::calc::DomainError&) {
            } catch (const std::exception& e) {
                out.failures.push_back(src + ": " + e.what());
            }
            continue;
        }
        ++out.compared;
        try {
            double got = mofsmith::calc::eval_expr(src);
            double scale = std::max(1.0, std::fabs(*want));
            if (std::fabs(got - *want) > rel_tol * scale)
                out.failures.push_back(src + " = " + std::to_string(got) + ", reference " + std::to_string(*want));
        } catch (const std::exception& e) {
            out.failures.push_back(src + ": " + e.what());
        }
    }
    return out;
}

} // namespace testing::calc_ref
