#pragma once

// Storage-capacity bounds. For kappa < 0 the upper bound comes from the
// first moment, alpha_up = -log2 / log(1 - Phi(kappa)); for kappa >= 0 from
// the Gaussian-width argument, alpha_up = (2/pi) / E[(kappa - G)_+^2]. The
// lower bound alpha_low reweights the second moment with
// f(x) = exp(-c* x) 1{x >= kappa} and asks when
//   Psi(q; alpha) = alpha log e(q) + Ent((1+q)/2) + log 2
// is still uniquely maximized at q = 0 with Psi''(0) < 0.

#include <optional>
#include <vector>

namespace pdisc {

// e(q) = E[f(G1) f(G2)] for jointly Gaussian (G1, G2) with correlation q.
// The outer integral is a Gauss-Legendre rule on [kappa, max(kappa,-c*)+L];
// the inner expectation has a closed form after G2 = q G1 + sqrt(1-q^2) Z.
// At q = 0 and |q| = 1 the whole thing collapses to closed forms, and those
// are what e_of_q returns there: the alpha_low search compares Psi(1) with
// Psi(0) to a 1e-9 gap, which quadrature differences cannot resolve once
// kappa <= -5 (the two values agree to ~1e-9 relative).
struct OverlapFunctional {
  double kappa = 0.0;
  double c_star = 0.0;
  std::vector<double> x;      // outer nodes
  std::vector<double> wx;     // outer weights
  std::vector<double> outer;  // phi(x) exp(-c* x) at the nodes

  double e_of_q(double q) const;

  // Second difference of e at 0: Richardson-extrapolated central differences
  // with steps 1e-3 and 5e-4. Noise floor ~1e-11 (long double accumulation),
  // so the value is meaningful wherever |e''(0)| clears that.
  double e_second_at_0() const;
};

OverlapFunctional make_overlap(double kappa, int n_nodes = 400,
                               double tail_length = 14.0);

// Unique positive root of c (1 - Phi(kappa + c)) = phi(kappa + c), kappa < 0.
double c_star(double kappa);

// Upper bound; the sign of kappa selects the branch. The two formulas do not
// meet at 0 (negative branch: exactly 1; positive branch: (2/pi)/(1/2) =
// 4/pi), so the switch is the literal sign rule, kappa >= 0 -> positive.
double alpha_up(double kappa);

double entropy_bit(double p);  // -p log p - (1-p) log(1-p), 0 at the ends

double psi(double q, double alpha, const OverlapFunctional& F);

struct AlphaLowResult {
  double alpha_low = 0.0;
  double c_star = 0.0;
  double e0 = 0.0;            // e(0)
  double e2 = 0.0;            // Richardson second difference at 0
  double argmax_q = 0.0;      // refined argmax of Psi at the returned alpha
  double psi_second_0 = 0.0;  // alpha * e2/e0 - 1 at the returned alpha
};

// Largest admissible alpha by binary search (relative tolerance alpha_tol).
// Admissible: the Psi maximum over a q_grid-point grid (refined by golden
// section around the grid argmax) is at q = 0 with gap >= 1e-9 against all
// |q| >= 2/q_grid, and alpha e''(0)/e(0) - 1 < 0.
AlphaLowResult alpha_low(double kappa, int q_grid = 2001,
                         double alpha_tol = 1e-4);

struct CapacityReport {
  double kappa = 0.0;
  double alpha_up = 0.0;
  std::optional<double> alpha_low;  // kappa < 0 only
  std::optional<double> c_star;
  double psi_argmax_q = 0.0;
  double psi_second_deriv_at_0 = 0.0;
};

CapacityReport capacity_report(double kappa);

}  // namespace pdisc
