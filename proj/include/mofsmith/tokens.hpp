#pragma once

#include "mofsmith/core.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace mofsmith {

class TokenBudgetExceeded : public Error {
public:
    TokenBudgetExceeded(std::size_t requested, std::size_t limit)
        : Error("The number of tokens has been exceeded (" + std::to_string(requested) + " > " +
                std::to_string(limit) + ")"),
          requested_(requested), limit_(limit) {}
    std::size_t requested() const noexcept { return requested_; }
    std::size_t limit() const noexcept { return limit_; }

private:
    std::size_t requested_;
    std::size_t limit_;
};

/// Approximate token count: ceil(bytes / 4). Monotone and subadditive under
/// concatenation. Real tokenizers differ; swap in a TokenEstimator when one is known.
std::size_t estimate_tokens(std::string_view text) noexcept;

using TokenEstimator = std::function<std::size_t(std::string_view)>;

enum class BudgetMode { session, per_call };

/// Token allowance for one session. In `session` mode every charge accumulates
/// against `limit`; in `per_call` mode the window resets at each `begin_call()`.
class TokenBudget {
public:
    explicit TokenBudget(std::size_t limit = 4000, BudgetMode mode = BudgetMode::session)
        : limit_(limit), mode_(mode) {}

    std::size_t limit() const noexcept { return limit_; }
    std::size_t used() const noexcept { return used_; }
    BudgetMode mode() const noexcept { return mode_; }
    std::size_t window_used() const noexcept { return window_; }
    std::size_t remaining() const noexcept { return limit_ > window_ ? limit_ - window_ : 0; }

    /// Adds `tokens`; throws before mutating if the window would exceed the limit.
    void charge_tokens(std::size_t tokens);
    void begin_call() noexcept;

private:
    std::size_t limit_;
    BudgetMode mode_;
    std::size_t used_ = 0;
    std::size_t window_ = 0;
};

/// Charges estimate(text) and returns the amount charged.
std::size_t charge(TokenBudget& budget, std::string_view text,
                   const TokenEstimator& estimate = estimate_tokens);

} // namespace mofsmith
