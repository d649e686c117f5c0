#pragma once

// First-moment overlap machinery: the exponent that bounds the expected
// count of m-tuples of solutions with pairwise overlaps in a window
// (beta - eta, beta), and the bivariate Gaussian tail bound it leans on.
// A negative exponent certifies (at first-moment order) that such clusters
// are exponentially unlikely — the obstruction that rules out stable
// algorithms above the threshold.

#include <cstdint>
#include <vector>

namespace pdisc {

struct OgpQuery {
  int m = 1;            // tuple size
  double beta = 0.0;    // overlap window upper edge
  double eta = 0.0;     // window width; window is (beta - eta, beta)
  double alpha = 0.0;   // constraint density
  double kappa = 0.0;   // margin
  double iota = 0.0;    // log |I| / N budget for the index set
};

// Binary entropy in nats with the x log x -> 0 endpoint limits.
double binary_entropy(double x);

// log 2 + (m-1) Ent((1+beta-eta)/2) + m iota + alpha log(1 + x), where
//   x = m Phi(kappa) (-1 + 2(m-1) Phi(-|kappa| sqrt((1-beta)/2))).
// x is assembled from log-space CDFs so kappa <= -8 keeps full precision.
// PdiscError when 1 + x <= 0 (m too large for this kappa) or the query is
// outside 0 < eta < beta < 1, m >= 1, iota >= 0, alpha >= 0.
double ogp_exponent(const OgpQuery& q);

// The density at which the exponent crosses zero for fixed (m, beta, eta,
// kappa, iota): alpha_root = -(log 2 + (m-1)Ent + m iota)/log(1+x).
// For m = 1, iota = 0 this is the plain first-moment threshold
// -log 2 / log(1 - Phi(kappa)). PdiscError when log(1+x) >= 0.
double ogp_alpha_root(const OgpQuery& q);

// Scan C1 = 1, 2, 4, ... at the window the kappa -> -inf theorem uses
// (beta = 1 - 9 log^2|kappa|/kappa^2, eta = log^2|kappa|/kappa^2,
//  m = floor(kappa^2), alpha = C1 log^2|kappa|/(kappa^2 Phi(kappa))),
// stopping at the first C1 whose exponent is negative.
struct C1Scan {
  double found = 0.0;  // 0 if no power of two up to the cap works
  std::vector<std::pair<double, double>> entries;  // (C1, exponent)
};
C1Scan scan_c1(double kappa, int max_doublings = 40);

// Lemma-style bound on P(G <= A, G' <= A) at correlation q in [0, 1]:
//   4 Phi(A) Phi(-|A| sqrt((1-q)/2)).
// The underlying lemma assumes A "sufficiently negative"; A <= -2 is the
// gate here, justified by the Monte-Carlo suite rather than the asymptotic
// statement. PdiscError for A > -2 or q outside [0, 1].
double joint_tail_bound(double A, double q);

// Importance-sampled estimate of the same probability: draw G exactly from
// its conditional law on (-inf, A] via the inverse CDF, average
// Phi((A - qG)/sqrt(1-q^2)). Chunked with per-chunk seeds; the merge is a
// fixed-order sum, so the result is deterministic in (seed, chunks).
struct JointTailEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::uint64_t samples = 0;
};
JointTailEstimate joint_tail_mc(double A, double q, std::uint64_t samples,
                                std::uint64_t seed, int chunks = 16);

}  // namespace pdisc
