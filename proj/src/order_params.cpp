#include "pdisc/order_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdisc/gaussian_moments.hpp"
#include "pdisc/instance.hpp"
#include "pdisc/normal.hpp"

namespace pdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// h(t) = E[min(|G|/t,1)^2] = min_sq(t)/t^2, strictly decreasing from 1 to 0.
// The closed form of min_sq cancels to O(t^3) near zero, so below 1e-4 we use
// its Taylor series min_sq(t) = t^2 - (4/3)phi(0) t^3 + (2/15)phi(0) t^5
// (next term is O(t^7), utterly negligible at the switch point).
double min_sq_ratio(double t) {
  if (t < 1e-4) {
    return 1.0 - (4.0 / 3.0) * kInvSqrt2Pi * t +
           (2.0 / 15.0) * kInvSqrt2Pi * t * t * t;
  }
  return min_sq(t) / (t * t);
}

}  // namespace

double t_of_rho(double rho) {
  if (rho >= 1.0) return 0.0;
  if (rho <= 0.0) return kInf;
  double target = rho * rho;
  double lo = 0.0, hi = 1.0;
  while (min_sq_ratio(hi) > target) hi *= 2.0;  // h(t) ~ 1/t^2, terminates
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, lo); ++it) {
    double mid = 0.5 * (lo + hi);
    if (min_sq_ratio(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double phi_of_rho(double rho) {
  if (rho <= 0.0) return 0.0;
  if (rho >= 1.0) return excess(0.0);  // sqrt(2/pi)
  double t = t_of_rho(rho);
  // min_sq via the same stable split as above.
  double ms = t < 1e-4 ? t * t * min_sq_ratio(t) : min_sq(t);
  return 0.5 * rho * rho * t + 0.5 * ms / t + excess(t);
}

double phi_prime_of_rho(double rho) {
  if (rho <= 0.0) return 1.0;  // limit of rho*t(rho) as rho -> 0
  return rho * t_of_rho(rho);
}

double feasibility_threshold(double kappa) {
  if (kappa < 0.0) return kInf;
  if (kappa == 0.0) return 2.0;  // sup of 2 (phi(rho)/rho)^2 as rho -> 0
  // Coarse grid then golden-section refinement of the unimodal ratio.
  auto ratio = [&](double rho) {
    double p = phi_of_rho(rho);
    return p * p / hinge_sq(kappa, rho);
  };
  double best_rho = 0.5, best = -kInf;
  for (int i = 1; i <= 200; ++i) {
    double rho = i / 200.0;
    double r = ratio(rho);
    if (r > best) {
      best = r;
      best_rho = rho;
    }
  }
  double a = std::max(1e-6, best_rho - 0.01);
  double b = std::min(1.0, best_rho + 0.01);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = ratio(x1), f2 = ratio(x2);
  for (int it = 0; it < 120 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = ratio(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = ratio(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

OrderParams solve_order_params(double alpha, double kappa) {
  if (!(alpha > 0.0)) throw PdiscError("alpha must be positive");
  OrderParams op;
  if (alpha >= feasibility_threshold(kappa)) {
    op.feasible = false;
    return op;
  }

  // rho* maximizes F(rho) = phi(rho)^2 - alpha E[(kappa - rho G)_+^2]; at an
  // interior maximum this is the first-order condition
  // alpha Phi(kappa/rho) = phi(rho) t(rho). We locate the global maximum by a
  // grid scan + golden-section refinement instead of bisecting the condition
  // directly: for small positive kappa and alpha near the ceiling, F picks up
  // a spurious stationary pair near rho = 0 and blind bisection can land on
  // the wrong root.
  auto F = [&](double rho) {
    double p = phi_of_rho(rho);
    return p * p - alpha * hinge_sq(kappa, rho);
  };
  const double lo_end = 1e-6, hi_end = 1.0 - 1e-9;
  const int grid = 512;
  int best_i = 0;
  double best_f = -kInf;
  for (int i = 0; i <= grid; ++i) {
    double rho = lo_end + (hi_end - lo_end) * i / grid;
    double f = F(rho);
    if (f > best_f) {
      best_f = f;
      best_i = i;
    }
  }
  double a_br = lo_end + (hi_end - lo_end) * std::max(0, best_i - 1) / grid;
  double b_br = lo_end + (hi_end - lo_end) * std::min(grid, best_i + 1) / grid;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b_br - gr * (b_br - a_br), x2 = a_br + gr * (b_br - a_br);
  double f1 = F(x1), f2 = F(x2);
  for (int it = 0; it < 200 && b_br - a_br > 1e-12; ++it) {
    if (f1 < f2) {
      a_br = x1;
      x1 = x2;
      f1 = f2;
      x2 = a_br + gr * (b_br - a_br);
      f2 = F(x2);
    } else {
      b_br = x2;
      x2 = x1;
      f2 = f1;
      x1 = b_br - gr * (b_br - a_br);
      f1 = F(x1);
    }
  }
  op.rho = 0.5 * (a_br + b_br);

  // Golden-section resolves rho* only to ~sqrt(eps) once F differences fall
  // below rounding noise; polish with bisection on the first-order condition
  // inside the localized window, where the downward crossing is the right one.
  auto g = [&](double rho) {
    return phi_of_rho(rho) * t_of_rho(rho) - alpha * norm_cdf(kappa / rho);
  };
  double lo_b = std::max(lo_end, op.rho - 1e-5);
  double hi_b = std::min(hi_end, op.rho + 1e-5);
  if (g(lo_b) > 0.0 && g(hi_b) < 0.0) {
    for (int it = 0; it < 100 && hi_b - lo_b > 1e-14; ++it) {
      double mid = 0.5 * (lo_b + hi_b);
      if (g(mid) > 0.0)
        lo_b = mid;
      else
        hi_b = mid;
    }
    op.rho = 0.5 * (lo_b + hi_b);
  }

  op.t = t_of_rho(op.rho);
  double a = phi_of_rho(op.rho);
  double b2 = alpha * hinge_sq(kappa, op.rho);
  if (a * a <= b2) {
    // Numerically at the feasibility boundary: report infeasible rather than
    // a complex gamma.
    op.feasible = false;
    return op;
  }
  op.gamma = std::sqrt(b2) / std::sqrt(a * a - b2);
  op.objective = std::sqrt(a * a - b2);
  op.tight_fraction = 2.0 * norm_sf(op.t);
  op.feasible = true;
  return op;
}

double MarginLaw::atom_mass() const { return norm_cdf(kappa / rho); }

double MarginLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw PdiscError("margin law quantile requires p in (0,1)");
  if (p <= atom_mass()) return kappa;
  return rho * norm_ppf(p);
}

}  // namespace pdisc
