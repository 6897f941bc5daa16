#include "mofsmith/calc.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>

namespace mofsmith::calc {

ExprPtr Expr::number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::number;
    e->value = v;
    return e;
}

ExprPtr Expr::negate(ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::negate;
    e->args.push_back(std::move(operand));
    return e;
}

ExprPtr Expr::binary(Op op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::binary;
    e->op = op;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    return e;
}

ExprPtr Expr::call(std::string name, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::call;
    e->function = std::move(name);
    e->args = std::move(args);
    return e;
}

bool equal(const Expr& a, const Expr& b) noexcept {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
    case Expr::Kind::number:
        if (std::memcmp(&a.value, &b.value, sizeof(double)) != 0) return false;
        break;
    case Expr::Kind::binary:
        if (a.op != b.op) return false;
        break;
    case Expr::Kind::call:
        if (a.function != b.function) return false;
        break;
    case Expr::Kind::negate: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal(*a.args[i], *b.args[i])) return false;
    return true;
}

int function_arity(std::string_view name) noexcept {
    static constexpr std::pair<std::string_view, int> table[] = {
        {"exp", 1}, {"ln", 1}, {"log", 1}, {"log10", 1}, {"sqrt", 1},
        {"abs", 1}, {"pow", 2}, {"min", 2}, {"max", 2},
    };
    for (auto [n, a] : table)
        if (n == name) return a;
    return -1;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse_all() {
        auto e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(std::string_view tok) {
        skip_ws();
        if (src_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    bool peek_pow() {
        skip_ws();
        return src_.substr(pos_, 1) == "^" || src_.substr(pos_, 2) == "**";
    }

    ExprPtr expression() {
        auto lhs = term();
        while (true) {
            if (eat("+")) lhs = Expr::binary(Op::add, lhs, term());
            else if (eat("-") || eat("\xE2\x88\x92")) lhs = Expr::binary(Op::sub, lhs, term());
            else return lhs;
        }
    }

    ExprPtr term() {
        auto lhs = unary();
        while (true) {
            skip_ws();
            if (src_.substr(pos_, 2) == "**") return lhs;
            if (eat("*") || eat("\xC3\x97")) lhs = Expr::binary(Op::mul, lhs, unary());
            else if (eat("/") || eat("\xC3\xB7")) lhs = Expr::binary(Op::div, lhs, unary());
            else return lhs;
        }
    }

    ExprPtr unary() {
        if (eat("-") || eat("\xE2\x88\x92")) return Expr::negate(unary());
        if (eat("+")) return unary();
        return power();
    }

    ExprPtr power() {
        auto base = primary();
        if (peek_pow()) {
            if (!eat("**")) eat("^");
            return Expr::binary(Op::pow, base, unary());
        }
        return base;
    }

    ExprPtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("expected a number, function call, or '('");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expression();
            if (!eat(")")) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return call();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || ptr != src_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return Expr::number(v);
    }

    ExprPtr call() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        int arity = function_arity(name);
        if (arity < 0) {
            pos_ = start;
            fail("unknown function '" + name + "'");
        }
        if (!eat("(")) fail("expected '(' after " + name);
        std::vector<ExprPtr> args;
        if (!eat(")")) {
            args.push_back(expression());
            while (eat(",")) args.push_back(expression());
            if (!eat(")")) fail("expected ')' or ','");
        }
        if (static_cast<int>(args.size()) != arity) {
            pos_ = start;
            fail(name + " takes " + std::to_string(arity) + " argument(s), got " +
                 std::to_string(args.size()));
        }
        if (name == "log") name = "ln";
        return Expr::call(std::move(name), std::move(args));
    }
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " produced a non-finite result");
    return v;
}

} // namespace

ExprPtr parse(std::string_view text) { return Parser(text).parse_all(); }

double evaluate(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::number: return e.value;
    case Expr::Kind::negate: return -evaluate(*e.args[0]);
    case Expr::Kind::binary: {
        double a = evaluate(*e.args[0]);
        double b = evaluate(*e.args[1]);
        switch (e.op) {
        case Op::add: return checked(a + b, "addition");
        case Op::sub: return checked(a - b, "subtraction");
        case Op::mul: return checked(a * b, "multiplication");
        case Op::div:
            if (b == 0.0) throw DomainError("division by zero");
            return checked(a / b, "division");
        case Op::pow: return checked(std::pow(a, b), "power");
        }
        break;
    }
    case Expr::Kind::call: {
        const auto& f = e.function;
        double a = evaluate(*e.args[0]);
        if (f == "exp") return checked(std::exp(a), "exp");
        if (f == "ln" || f == "log10") {
            if (a <= 0.0) throw DomainError(f + " of a non-positive number");
            return f == "ln" ? std::log(a) : std::log10(a);
        }
        if (f == "sqrt") {
            if (a < 0.0) throw DomainError("sqrt of a negative number");
            return std::sqrt(a);
        }
        if (f == "abs") return std::abs(a);
        double b = evaluate(*e.args[1]);
        if (f == "pow") return checked(std::pow(a, b), "pow");
        if (f == "min") return std::min(a, b);
        if (f == "max") return std::max(a, b);
        break;
    }
    }
    throw DomainError("malformed expression");
}

double eval_expr(std::string_view text) { return evaluate(*parse(text)); }

std::string to_string(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::number: {
        auto s = text::format_number(e.value);
        if (e.value < 0 || std::signbit(e.value)) return "(" + s + ")";
        return s;
    }
    case Expr::Kind::negate: return "(-" + to_string(*e.args[0]) + ")";
    case Expr::Kind::binary: {
        static constexpr const char* sym[] = {"+", "-", "*", "/", "^"};
        return "(" + to_string(*e.args[0]) + " " + sym[static_cast<int>(e.op)] + " " +
               to_string(*e.args[1]) + ")";
    }
    case Expr::Kind::call: {
        std::string out = e.function + "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i) out += ", ";
            out += to_string(*e.args[i]);
        }
        return out + ")";
    }
    }
    return {};
}

} // namespace mofsmith::calc
