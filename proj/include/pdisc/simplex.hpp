#pragma once

// Dense bounded-variable revised simplex for
//     max c'x   s.t.  A x = b,   lower <= x <= upper,
// with upper allowed to be +infinity. The LP stage feeds it
// A = [X | -I] (half-space rows with surplus variables); it is kept generic
// so the solver can be exercised on small hand-checkable programs too.
//
// The method maintains an explicit basis inverse (m is a few hundred here),
// updated by pivot row operations and refactorized periodically. Phase 1
// appends one artificial per row and maximizes minus their sum. Dantzig
// pricing with a Bland's-rule fallback when degenerate pivots pile up.

#include <cstdint>
#include <limits>
#include <vector>

namespace pdisc {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit, kNumerical };

struct LpProblem {
  int m = 0;  // rows
  int n = 0;  // structural variables
  std::vector<double> a;      // column-major, m*n
  std::vector<double> b;      // m
  std::vector<double> c;      // n
  std::vector<double> lower;  // n
  std::vector<double> upper;  // n, may hold +infinity
};

struct SimplexOptions {
  int max_iterations = 0;        // 0 -> 200*(m+n) + 20000
  double pivot_tol = 1e-9;       // reject pivots smaller than this
  double cost_tol = 1e-9;        // reduced-cost optimality threshold
  double feas_tol = 1e-8;        // phase-1 leftover infeasibility threshold
  int refactor_every = 128;      // rebuild B^{-1} from scratch this often
  int bland_after = 64;          // degenerate pivots before Bland's rule
  // Optional starting bound assignment for the structural variables
  // (true = start at upper). Empty -> everything starts at its lower bound
  // (or upper if the lower is -infinity; both infinite is rejected).
  std::vector<std::uint8_t> start_at_upper;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumerical;
  std::vector<double> x;        // n structural values
  std::vector<double> y;        // m row multipliers c_B' B^{-1}
  double objective = 0.0;
  int iterations = 0;           // phase-2 pivots/flips
  int phase1_iterations = 0;
  std::vector<int> basis;       // m basic indices (into structurals+surplus)
  double residual = 0.0;        // max |Ax - b| at the returned point
  double infeasibility = 0.0;   // phase-1 leftover when status == kInfeasible
};

LpSolution solve_bounded_lp(const LpProblem& p, const SimplexOptions& opts = {});

}  // namespace pdisc
