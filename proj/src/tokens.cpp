#include "mofsmith/tokens.hpp"

namespace mofsmith {

std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

void TokenBudget::charge_tokens(std::size_t tokens) {
    if (window_ + tokens > limit_) throw TokenBudgetExceeded(window_ + tokens, limit_);
    window_ += tokens;
    used_ += tokens;
}

void TokenBudget::begin_call() noexcept {
    if (mode_ == BudgetMode::per_call) window_ = 0;
}

std::size_t charge(TokenBudget& budget, std::string_view text, const TokenEstimator& estimate) {
    auto n = estimate ? estimate(text) : estimate_tokens(text);
    budget.charge_tokens(n);
    return n;
}

} // namespace mofsmith
