#include "pdisc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pdisc/gaussian_moments.hpp"
#include "pdisc/instance.hpp"
#include "pdisc/normal.hpp"
#include "pdisc/quadrature.hpp"

namespace pdisc {

double alpha_up(double kappa) {
  if (kappa < 0.0) {
    // -log2 / log(1 - Phi(kappa)); log1p keeps the denominator accurate when
    // Phi(kappa) is ~1e-9 and below.
    return -std::log(2.0) / std::log1p(-norm_cdf(kappa));
  }
  return (2.0 / M_PI) / hinge_sq(kappa, 1.0);
}

double c_star(double kappa) {
  if (!(kappa < 0.0)) {
    throw PdiscError("c_star is defined for kappa < 0 only");
  }
  auto f = [kappa](double c) {
    return c * norm_sf(kappa + c) - norm_pdf(kappa + c);
  };
  // f(0+) = -phi(kappa) < 0, and the root shrinks like exp(-kappa^2/2), so
  // grow the upper bracket geometrically instead of guessing its scale.
  double hi = 1.0;
  while (f(hi) <= 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 400 && (hi - lo) > 1e-17 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

constexpr long double kInvSqrt2L = 0.7071067811865475244008443621048490L;

inline long double sf_ld(long double x) {
  return 0.5L * erfcl(x * kInvSqrt2L);
}

// Long-double quadrature of e(q) for |q| < 1. q = 0 goes through the same
// path on purpose: the admissibility test compares Psi at q = 0 against
// neighbors ~1e-3 away to a 1e-9 gap scaled by alpha ~ 7e8, which only works
// if the rule's truncation error cancels between the two evaluations.
long double e_quad_ld(const OverlapFunctional& F, double q) {
  const long double c = F.c_star;
  const long double kap = F.kappa;
  const long double s2 = (1.0L - (long double)q) * (1.0L + (long double)q);
  const long double s = sqrtl(s2);
  const long double shift = 0.5L * c * c * s2;
  long double acc = 0.0L;
  for (size_t i = 0; i < F.x.size(); ++i) {
    const long double xi = F.x[i];
    // E_Z[e^{-c(qx+sZ)} 1{qx+sZ >= kappa}]
    //   = e^{-cqx + c^2 s^2/2} Phi(-((kappa-qx)/s + cs)).
    long double inner =
        expl(-c * (long double)q * xi + shift) * sf_ld((kap - q * xi) / s + c * s);
    acc += (long double)F.wx[i] * (long double)F.outer[i] * inner;
  }
  return acc;
}

long double e_quad_one_ld(const OverlapFunctional& F) {
  const long double c = F.c_star;
  long double acc = 0.0L;
  for (size_t i = 0; i < F.x.size(); ++i) {
    acc += (long double)F.wx[i] * (long double)F.outer[i] *
           expl(-c * (long double)F.x[i]);
  }
  return acc;
}

}  // namespace

OverlapFunctional make_overlap(double kappa, int n_nodes, double tail_length) {
  OverlapFunctional F;
  F.kappa = kappa;
  F.c_star = c_star(kappa);
  const QuadRule& rule = gauss_legendre(n_nodes);
  // Mass of exp(-c x) phi(x) sits near max(kappa, -c); 14 units beyond that
  // the discarded tail is ~Phi(-14) of the total.
  double lo = kappa;
  double hi = std::max(kappa, -F.c_star) + tail_length;
  F.x.resize(n_nodes);
  F.wx.resize(n_nodes);
  F.outer.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    double xi = 0.5 * (hi - lo) * rule.x[i] + 0.5 * (hi + lo);
    F.x[i] = xi;
    F.wx[i] = 0.5 * (hi - lo) * rule.w[i];
    F.outer[i] = std::exp(-F.c_star * xi) * norm_pdf(xi);
  }
  return F;
}

double OverlapFunctional::e_of_q(double q) const {
  if (!(q >= -1.0 && q <= 1.0)) {
    throw PdiscError("e_of_q requires |q| <= 1");
  }
  if (q >= 1.0) {
    return static_cast<double>(e_quad_one_ld(*this));
  }
  if (q <= -1.0) {
    // f(x) f(-x) = 1{kappa <= x <= -kappa}; empty for kappa > 0.
    return std::max(0.0, norm_cdf(-kappa) - norm_cdf(kappa));
  }
  return static_cast<double>(e_quad_ld(*this, q));
}

double OverlapFunctional::e_second_at_0() const {
  long double e0 = e_quad_ld(*this, 0.0);
  auto d2 = [&](double h) {
    return static_cast<double>(
        (e_quad_ld(*this, h) - 2.0L * e0 + e_quad_ld(*this, -h)) /
        ((long double)h * (long double)h));
  };
  double a1 = d2(1e-3);
  double a2 = d2(5e-4);
  return (4.0 * a2 - a1) / 3.0;
}

double entropy_bit(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

double psi(double q, double alpha, const OverlapFunctional& F) {
  return alpha * std::log(F.e_of_q(q)) + entropy_bit(0.5 * (1.0 + q)) +
         std::log(2.0);
}

namespace {

// Golden-section maximum on [a, b]; f evaluated in long double so that the
// admissibility refinement is not at the mercy of double rounding.
std::pair<double, long double> golden_max(
    const std::function<long double(double)>& f, double a, double b,
    double xtol) {
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  long double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double mid = 0.5 * (a + b);
  return {mid, f(mid)};
}

}  // namespace

AlphaLowResult alpha_low(double kappa, int q_grid, double alpha_tol) {
  if (!(kappa < 0.0)) {
    throw PdiscError("alpha_low is defined for kappa < 0 only");
  }
  OverlapFunctional F = make_overlap(kappa);
  const double c = F.c_star;
  const long double log2l = logl(2.0L);

  std::vector<double> qs(q_grid), ent(q_grid);
  std::vector<long double> log_e(q_grid);
  for (int i = 0; i < q_grid; ++i) {
    qs[i] = -1.0 + 2.0 * i / (q_grid - 1);
    ent[i] = entropy_bit(0.5 * (1.0 + qs[i]));
    if (i == 0) {
      log_e[i] = logl((long double)std::max(
          1e-300, norm_cdf(-kappa) - norm_cdf(kappa)));
    } else if (i == q_grid - 1) {
      // closed form in log space: e(1) = exp(2c^2) Phi(-(kappa+2c))
      log_e[i] = 2.0L * (long double)c * c +
                 (long double)log_norm_sf(kappa + 2.0 * c);
    } else {
      log_e[i] = logl(e_quad_ld(F, qs[i]));
    }
  }
  const long double log_e0_quad = logl(e_quad_ld(F, 0.0));
  // closed form for the q = 0 endpoint pairing: e(0) = (e^{c^2/2}Phi(-k-c))^2
  const long double log_e0_closed =
      (long double)c * c + 2.0L * (long double)log_norm_sf(kappa + c);
  const double e0 = static_cast<double>(expl(log_e0_quad));
  const double e2 = F.e_second_at_0();
  const double off_cut = 2.0 / q_grid;

  double last_argmax = 0.0;
  auto admissible = [&](double alpha) {
    const long double al = alpha;
    const long double psi0_quad = al * log_e0_quad + 2.0L * log2l;
    const long double psi0_closed = al * log_e0_closed + 2.0L * log2l;
    // Interior grid points compare against the quadrature Psi(0); the +-1
    // endpoints against the closed-form Psi(0). Each comparison stays within
    // one evaluation family so systematic quadrature error cancels.
    int gbest = -1;
    long double gval = -1e300L;
    for (int i = 0; i < q_grid; ++i) {
      bool endpoint = (i == 0 || i == q_grid - 1);
      long double v = al * log_e[i] + (long double)ent[i] + log2l;
      long double ref = endpoint ? psi0_closed : psi0_quad;
      if (std::abs(qs[i]) >= off_cut && v > ref - 1e-9L) return false;
      if (!endpoint && v > gval) {
        gval = v;
        gbest = i;
      }
    }
    // Golden refinement around the interior grid argmax; a sub-grid peak
    // outside the dead zone |q| < 2/q_grid fails admissibility.
    double a = qs[std::max(1, gbest - 1)];
    double b = qs[std::min(q_grid - 2, gbest + 1)];
    auto [qr, pr] = golden_max(
        [&](double q) {
          return al * logl(e_quad_ld(F, q)) +
                 (long double)entropy_bit(0.5 * (1.0 + q)) + log2l;
        },
        a, b, 1e-7);
    last_argmax = qr;
    if (std::abs(qr) >= off_cut && pr > psi0_quad - 1e-9L) return false;
    return alpha * e2 / e0 - 1.0 < 0.0;
  };

  double lo = 1e-6, hi = 1.0;
  if (!admissible(lo)) {
    throw PdiscError("alpha_low: admissible set empty below 1e-6");
  }
  while (admissible(hi)) hi *= 2.0;
  while (hi - lo > alpha_tol * lo) {
    double mid = 0.5 * (lo + hi);
    if (admissible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  admissible(lo);  // refresh last_argmax at the returned alpha
  AlphaLowResult r;
  r.alpha_low = lo;
  r.c_star = c;
  r.e0 = e0;
  r.e2 = e2;
  r.argmax_q = last_argmax;
  r.psi_second_0 = lo * e2 / e0 - 1.0;
  return r;
}

CapacityReport capacity_report(double kappa) {
  CapacityReport rep;
  rep.kappa = kappa;
  rep.alpha_up = alpha_up(kappa);
  if (kappa < 0.0) {
    AlphaLowResult r = alpha_low(kappa);
    rep.alpha_low = r.alpha_low;
    rep.c_star = r.c_star;
    rep.psi_argmax_q = r.argmax_q;
    rep.psi_second_deriv_at_0 = r.psi_second_0;
  }
  return rep;
}

}  // namespace pdisc
