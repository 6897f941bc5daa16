#pragma once

#include "mofsmith/core.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mofsmith::calc {

class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error("parse error at " + std::to_string(position) + ": " + message), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

enum class Op { add, sub, mul, div, pow };

/// Arithmetic expression tree. Immutable once built; children are shared.
struct Expr {
    enum class Kind { number, negate, binary, call };

    Kind kind = Kind::number;
    double value = 0.0;
    Op op = Op::add;
    std::string function;
    std::vector<std::shared_ptr<const Expr>> args;

    static std::shared_ptr<const Expr> number(double v);
    static std::shared_ptr<const Expr> negate(std::shared_ptr<const Expr> operand);
    static std::shared_ptr<const Expr> binary(Op op, std::shared_ptr<const Expr> lhs,
                                              std::shared_ptr<const Expr> rhs);
    static std::shared_ptr<const Expr> call(std::string name,
                                            std::vector<std::shared_ptr<const Expr>> args);
};

using ExprPtr = std::shared_ptr<const Expr>;

bool equal(const Expr& a, const Expr& b) noexcept;

/// Whole input must parse. `^` (or `**`) is right-associative and binds tighter
/// than unary minus, so `-3^2` is -9.
ExprPtr parse(std::string_view text);

/// Evaluates in IEEE double; any non-finite intermediate is a DomainError.
double evaluate(const Expr& expr);

double eval_expr(std::string_view text);

/// Fully parenthesized form; parse(to_string(e)) is structurally equal to e.
std::string to_string(const Expr& expr);

/// Arity of a known function, or -1.
int function_arity(std::string_view name) noexcept;

} // namespace mofsmith::calc
