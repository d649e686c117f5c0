#pragma once

// Stage 1: maximize a random linear functional over the relaxed solution body
//     max <v, theta>   s.t.  X theta >= kappa0 sqrt(N) 1,  theta in [-1,1]^N,
// with v standard normal from its own seed stream. The optimum is a vertex,
// which is what makes the next stage work: all but ~M coordinates end up
// exactly at +-1, and the margins of the tight rows sit exactly at kappa0.

#include <cstdint>
#include <vector>

#include "pdisc/instance.hpp"

namespace pdisc {

struct LPOutput {
  std::vector<double> theta_hat;        // in [-1,1]^N
  std::vector<std::size_t> tight_set;   // |theta_hat_i| >= 1 - 1e-8
  std::vector<double> margin_vector;    // <X_i, theta_hat>/sqrt(N)
  double objective = 0.0;               // <v, theta_hat>
  std::uint64_t direction_seed = 0;
  double duality_gap = 0.0;             // certified primal-dual gap bound
  std::vector<int> basis;               // basic columns (theta: [0,N), surplus: [N,N+M))
  int iterations = 0;                   // simplex pivots, both phases
};

// Solves the stage-1 program. Throws PdiscError when the instance is
// infeasible at kappa0 (with the phase-1 residual as certificate), and
// std::runtime_error for solver breakdowns — the domain is compact, so
// unbounded/limit statuses are internal failures, not data errors.
LPOutput solve_lp(const Instance& inst, double kappa0,
                  std::uint64_t direction_seed);

struct LPDiagnostics {
  double tight_fraction = 0.0;   // |tight_set|/N
  double w2_to_margin_law = 0.0; // W2(margins, law of max(rho* G, kappa0))
  double min_margin = 0.0;       // min_i margins_i - kappa0, >= -1e-8
};

LPDiagnostics lp_diagnostics(const LPOutput& out, double alpha, double kappa0);

}  // namespace pdisc
