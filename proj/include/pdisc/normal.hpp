#pragma once

// Standard-normal helpers used throughout the solver and the analytic layer.
//
// Everything funnels through erfc so the tails stay accurate: Phi(-40) is
// representable (~1.5e-350 is not, but erfc keeps ~1e-308 territory fine and
// log_phi_tail covers the rest in log space).

#include <cmath>

namespace pdisc {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal density.
inline double norm_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Phi(x) = P[G <= x], computed as erfc(-x/sqrt2)/2 so the left tail does not
// cancel. Good to full double precision for |x| <~ 37; underflows to 0 beyond.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// Upper tail Q(x) = P[G >= x] = Phi(-x).
inline double norm_sf(double x) {
  return 0.5 * std::erfc(x * kInvSqrt2);
}

// log Phi(x). For x >= -8 the direct formula is fine; deeper into the left
// tail we switch to the asymptotic expansion of Mills' ratio,
//   Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...),
// which keeps log-space results finite far past the point where Phi(x)
// underflows (needed by the OGP exponent at kappa << 0).
inline double log_norm_cdf(double x) {
  if (x >= 0.0) {
    // Phi(x) is near 1; log1p against the small upper tail keeps full
    // precision (log(Phi(6)) needs ~1e-9 resolved to 1e-15 relative).
    return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  }
  if (x >= -8.0) {
    double p = norm_cdf(x);
    return std::log(p);
  }
  double x2 = x * x;
  // Alternating series in 1/x^2; five terms are ample for x <= -8.
  double series =
      1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
      105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - 0.5 * std::log(2.0 * M_PI) - std::log(-x) +
         std::log(series);
}

// log(1 - Phi(x)) = log Phi(-x).
inline double log_norm_sf(double x) { return log_norm_cdf(-x); }

// Inverse CDF. Peter Acklam's rational approximation (~1.15e-9 relative)
// followed by one Halley step against erfc, which pushes the result to
// machine precision everywhere we evaluate it (u in (0,1)).
double norm_ppf(double u);

}  // namespace pdisc
