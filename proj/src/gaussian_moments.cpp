#include "pdisc/gaussian_moments.hpp"

#include <algorithm>
#include <cmath>

#include "pdisc/normal.hpp"
#include "pdisc/quadrature.hpp"

namespace pdisc {

double min_sq(double t) {
  if (t <= 0.0) return 0.0;
  if (t > 40.0) return 1.0;  // tail terms underflow anyway
  double q = norm_sf(t);     // Phi(-t)
  return (1.0 - 2.0 * q) - 2.0 * t * norm_pdf(t) + 2.0 * t * t * q;
}

double excess(double t) {
  if (t < 0.0) t = 0.0;
  return 2.0 * (norm_pdf(t) - t * norm_sf(t));
}

double hinge_sq(double kappa, double rho) {
  if (rho <= 0.0) {
    // Limit rho -> 0: (kappa)_+^2, with the halfway convention at 0 being
    // irrelevant since kappa^2 = 0 there.
    return kappa > 0.0 ? kappa * kappa : 0.0;
  }
  double u = kappa / rho;
  return (rho * rho + kappa * kappa) * norm_cdf(u) +
         kappa * rho * norm_pdf(u);
}

double exp_restricted(double s, double kappa) {
  return std::exp(0.5 * s * s) * norm_sf(kappa + s);
}

double validate_gaussian_moments() {
  double worst = 0.0;
  auto check = [&](double closed, double quad) {
    worst = std::max(worst, std::abs(closed - quad));
  };

  for (double t : {0.05, 0.3, 0.7, 1.0, 1.6, 2.5, 4.0, 6.0}) {
    check(min_sq(t), expect_gauss([&](double x) {
            double a = std::min(std::abs(x), t);
            return a * a;
          }));
    check(excess(t), expect_gauss([&](double x) {
            return std::max(std::abs(x) - t, 0.0);
          }));
  }
  for (double kappa : {-3.0, -1.0, 0.0, 0.5, 2.0, 3.42}) {
    for (double rho : {0.2, 0.6, 0.95, 1.0}) {
      check(hinge_sq(kappa, rho), expect_gauss([&](double x) {
              double h = std::max(kappa - rho * x, 0.0);
              return h * h;
            }));
    }
  }
  for (double s : {0.0, 0.5, 1.5, 3.0}) {
    for (double kappa : {-2.0, 0.0, 1.0}) {
      // Integrate on [kappa, L]; push L out far enough for the e^{-sx} tilt.
      double L = std::max(kappa, -s) + 14.0;
      check(exp_restricted(s, kappa),
            integrate([&](double x) { return std::exp(-s * x) * norm_pdf(x); },
                      kappa, L, 80, 8));
    }
  }
  return worst;
}

}  // namespace pdisc
