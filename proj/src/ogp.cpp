#include "pdisc/ogp.hpp"

#include <cmath>
#include <string>

#include "pdisc/instance.hpp"
#include "pdisc/normal.hpp"
#include "pdisc/rng.hpp"

namespace pdisc {

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

namespace {

void validate(const OgpQuery& q) {
  if (q.m < 1) throw PdiscError("tuple size m must be >= 1");
  if (!(q.alpha >= 0.0)) throw PdiscError("density alpha must be >= 0");
  if (!(q.iota >= 0.0)) throw PdiscError("index budget iota must be >= 0");
  if (q.m > 1 && !(0.0 < q.eta && q.eta < q.beta && q.beta < 1.0))
    throw PdiscError("overlap window needs 0 < eta < beta < 1");
}

// x such that the exponent's log term is alpha * log(1 + x). Built from
// log-CDFs: at kappa = -10, Phi(kappa) ~ 7.6e-24 and forming 1 - m Phi
// directly would round to 1.
double log_term_x(const OgpQuery& q) {
  double phi_k = std::exp(log_norm_cdf(q.kappa));
  double inner = -1.0;
  if (q.m > 1) {
    inner += 2.0 * double(q.m - 1) *
             std::exp(log_norm_cdf(-std::fabs(q.kappa) *
                                   std::sqrt((1.0 - q.beta) / 2.0)));
  }
  return double(q.m) * phi_k * inner;
}

}  // namespace

double ogp_exponent(const OgpQuery& q) {
  validate(q);
  double x = log_term_x(q);
  if (x <= -1.0)
    throw PdiscError("exponent log argument is nonpositive (1 + x = " +
                     std::to_string(1.0 + x) +
                     "): m is too large for this kappa");
  return std::log(2.0) +
         double(q.m - 1) * binary_entropy((1.0 + q.beta - q.eta) / 2.0) +
         double(q.m) * q.iota + q.alpha * std::log1p(x);
}

double ogp_alpha_root(const OgpQuery& q) {
  validate(q);
  double x = log_term_x(q);
  if (x <= -1.0)
    throw PdiscError("exponent log argument is nonpositive at this query");
  double slope = std::log1p(x);
  if (!(slope < 0.0))
    throw PdiscError("log term is nonnegative; the exponent has no root in alpha");
  double head = std::log(2.0) +
                double(q.m - 1) * binary_entropy((1.0 + q.beta - q.eta) / 2.0) +
                double(q.m) * q.iota;
  return -head / slope;
}

C1Scan scan_c1(double kappa, int max_doublings) {
  if (!(kappa < 0.0)) throw PdiscError("the C1 scan is a kappa < 0 construction");
  double k2 = kappa * kappa;
  double lk2 = std::log(std::fabs(kappa));
  lk2 *= lk2;
  OgpQuery q;
  q.m = int(k2);
  q.beta = 1.0 - 9.0 * lk2 / k2;
  q.eta = lk2 / k2;
  q.kappa = kappa;
  q.iota = 0.0;
  double phi_k = std::exp(log_norm_cdf(kappa));

  C1Scan out;
  double c1 = 1.0;
  for (int i = 0; i <= max_doublings; ++i, c1 *= 2.0) {
    q.alpha = c1 * lk2 / (k2 * phi_k);
    double e = ogp_exponent(q);
    out.entries.emplace_back(c1, e);
    if (e < 0.0) {
      out.found = c1;
      break;
    }
  }
  return out;
}

double joint_tail_bound(double A, double q) {
  if (!(A <= -2.0))
    throw PdiscError(
        "joint tail bound needs A <= -2 (the lemma assumes A sufficiently "
        "negative; -2 is the validated cutoff)");
  if (!(0.0 <= q && q <= 1.0))
    throw PdiscError("correlation q must lie in [0, 1]");
  return 4.0 * norm_cdf(A) * norm_sf(std::fabs(A) * std::sqrt((1.0 - q) / 2.0));
}

JointTailEstimate joint_tail_mc(double A, double q, std::uint64_t samples,
                                std::uint64_t seed, int chunks) {
  if (!(A <= -2.0)) throw PdiscError("joint tail MC needs A <= -2");
  if (!(0.0 <= q && q <= 1.0)) throw PdiscError("correlation q must lie in [0, 1]");
  if (samples == 0 || chunks < 1) throw PdiscError("need samples >= 1 and chunks >= 1");

  const double phi_a = norm_cdf(A);
  const double root = q < 1.0 ? std::sqrt(1.0 - q * q) : 0.0;
  double sum = 0.0, sumsq = 0.0;
  std::uint64_t done = 0;
  for (int c = 0; c < chunks; ++c) {
    // Fixed per-chunk share and seed: the estimate does not depend on how
    // chunks would be scheduled, only on (seed, chunks, samples).
    std::uint64_t lo = samples * std::uint64_t(c) / std::uint64_t(chunks);
    std::uint64_t hi = samples * std::uint64_t(c + 1) / std::uint64_t(chunks);
    Rng rng = Rng(seed, kStreamMonteCarlo).descend(std::uint64_t(c));
    for (std::uint64_t i = lo; i < hi; ++i) {
      double g = norm_ppf(rng.uniform() * phi_a);  // exact conditional draw
      double w = q == 1.0 ? double(g <= A)
                          : norm_cdf((A - q * g) / root);
      sum += w;
      sumsq += w * w;
      ++done;
    }
  }
  JointTailEstimate est;
  est.samples = done;
  double mean = sum / double(done);
  double var = sumsq / double(done) - mean * mean;
  if (var < 0.0) var = 0.0;
  est.estimate = phi_a * mean;
  est.se = phi_a * std::sqrt(var / double(done));
  return est;
}

}  // namespace pdisc
