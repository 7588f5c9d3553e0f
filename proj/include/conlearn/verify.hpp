#pragma once

// Built-in verification: oracle equivalences, invariants, and scaled-down
// empirical rate checks. Each check returns a single pass/fail verdict with
// a human-readable detail line.

#include "conlearn/losses.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace conlearn {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double time_budget = 0.0; ///< seconds; a check that overruns is reported as failed
};

enum class VerifyLevel { Quick, Full };

/// Fixed seeds every multi-seed check runs over.
inline constexpr std::uint64_t kCheckSeeds[] = {1, 2, 3, 4, 5};

/// A loss under derivative test. Swapping one callable for a corrupted one is how the
/// mutation fixture proves the check has teeth.
struct DerivativeTarget {
    std::string name;
    std::function<double(double, double)> value;
    std::function<double(double, double)> first;
    std::function<double(double, double)> second;
    /// Draws an admissible (xi, y) from a uniform u1, u2, u3 in [0, 1).
    std::function<std::pair<double, double>(double, double, double)> sample;
};

DerivativeTarget derivative_target(const LossFamily& family);

/// g1 and g2 against central differences at `points` admissible points per target;
/// error is |analytic - fd| / max(1, |analytic|), threshold 1e-5.
CheckResult check_derivatives(const std::vector<DerivativeTarget>& targets, std::size_t points, std::uint64_t seed);

CheckResult check_derivatives();
CheckResult check_recursive_batch_equivalence();
CheckResult check_alg1_alg2_equivalence();
CheckResult check_projection_optimality();
CheckResult check_error_trend();
CheckResult check_weak_excitation();
CheckResult check_shared_rates();
CheckResult check_nonlinear_regret();
CheckResult check_drifting_target();
CheckResult check_group_demo();
CheckResult check_reproducibility();

struct NamedCheck {
    std::string name;
    bool quick;
    std::function<CheckResult()> run;
};

/// Every check in reporting order.
const std::vector<NamedCheck>& all_checks();

/// One line: "PASS|FAIL <name> [<seconds> s]: <detail>".
void print_result(const CheckResult& r, std::ostream& out);

/// Runs the checks for `level`, printing one PASS/FAIL line each to `log`.
std::vector<CheckResult> verify_suite(VerifyLevel level, std::ostream& log);

} // namespace conlearn
