#pragma once

#include "mtt/linalg.hpp"

namespace mtt {

enum class SimplexStatus { optimal, infeasible, iteration_limit, unbounded };

struct SimplexResult {
    SimplexStatus status = SimplexStatus::optimal;
    Vec x;
    double objective = 0.0;
    int iterations = 0;
};

// Two-phase dense-tableau simplex for  min c'x  s.t.  Ax = b, x >= 0,
// with Bland's anti-cycling rule (lowest-index entering variable, lowest
// basic index on ratio ties). Deterministic; always returns a basic
// solution. b may have negative entries (rows are sign-flipped).
// max_iterations <= 0 selects the default 10 * (rows + cols) per phase.
SimplexResult simplex_solve(const Mat& a, const Vec& b, const Vec& c, int max_iterations = 0);

}  // namespace mtt
