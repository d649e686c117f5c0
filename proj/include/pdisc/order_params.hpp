#pragma once

// The scalar fixed point behind the two-stage solver.
//
// For rho in [0,1] let t(rho) be the unique root of
//     rho^2 = E[min(|G|/t, 1)^2],
// and phi(rho) = rho^2 t/2 + E[min(|G|,t)^2]/(2t) + E[(|G|-t)_+] evaluated at
// t = t(rho). phi is increasing and concave with phi(0)=0, phi(1)=sqrt(2/pi),
// and phi'(rho) = rho t(rho). Given (alpha, kappa) within the feasibility
// region, the optimizer rho* solves
//     alpha Phi(kappa/rho) = phi(rho) t(rho),
// and the scaling gamma* = b / sqrt(a^2 - b^2) with a = phi(rho*),
// b = sqrt(alpha E[(kappa - rho* G)_+^2]) determines the predicted LP value
// sqrt(a^2 - b^2). The fraction of constraints tight at the LP optimum
// concentrates on 2 Phi(-t*), and the empirical margin distribution converges
// to the law of max(rho* G, kappa).

#include <cstdint>

namespace pdisc {

struct OrderParams {
  double rho = 0.0;
  double t = 0.0;
  double gamma = 0.0;
  double objective = 0.0;      // sqrt(phi(rho*)^2 - alpha E[(kappa-rho*G)_+^2])
  double tight_fraction = 0.0; // 2 Phi(-t*)
  bool feasible = false;
};

// Root of rho^2 = min_sq(t)/t^2; +inf at rho = 0, 0 at rho = 1.
double t_of_rho(double rho);

double phi_of_rho(double rho);

// phi'(rho) = rho * t(rho), by the envelope theorem applied at the inner
// optimum t(rho).
double phi_prime_of_rho(double rho);

// sup_rho phi(rho)^2 / E[(kappa - rho G)_+^2]: +inf for kappa < 0, exactly 2
// at kappa = 0, and a numerically located supremum for kappa > 0.
double feasibility_threshold(double kappa);

OrderParams solve_order_params(double alpha, double kappa);

// Limiting margin law: max(rho G, kappa) — an atom of mass Phi(kappa/rho) at
// kappa with a Gaussian tail above it.
struct MarginLaw {
  double rho = 1.0;
  double kappa = 0.0;
  double atom_mass() const;
  double quantile(double p) const;  // p in (0,1)
};

}  // namespace pdisc
