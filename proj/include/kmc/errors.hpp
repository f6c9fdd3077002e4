#pragma once

#include <stdexcept>
#include <string>

namespace kmc {

/// Raised when a size or cost guardrail would be exceeded (oversized Poisson
/// region, infeasible solver instance, ...). Maps to CLI exit code 3.
struct GuardrailError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised by the exact solver when the transition budget runs out. Carries the
/// best complete chain length found so far, which is a valid lower bound.
struct BudgetExceededError : GuardrailError {
    long long best_lower_bound;
    long long states_explored;

    BudgetExceededError(long long lower_bound, long long explored)
        : GuardrailError("solver transition budget exceeded; best complete chain so far: " +
                         std::to_string(lower_bound)),
          best_lower_bound(lower_bound),
          states_explored(explored) {}
};

}  // namespace kmc
