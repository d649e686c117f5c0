#include "pdisc/lp_stage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "pdisc/order_params.hpp"
#include "pdisc/rng.hpp"
#include "pdisc/simplex.hpp"
#include "pdisc/wasserstein.hpp"

namespace pdisc {

namespace {

constexpr double kTightTol = 1e-8;

void finalize(LPOutput& out, const Instance& inst, double kappa0) {
  const std::size_t n = inst.n;
  out.tight_set.clear();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(out.theta_hat[j]) >= 1.0 - kTightTol) out.tight_set.push_back(j);
  }
  out.margin_vector = margins(inst, out.theta_hat);
  for (double mg : out.margin_vector) {
    if (mg < kappa0 - kTightTol) {
      throw std::runtime_error("lp stage returned an infeasible point");
    }
  }
}

}  // namespace

LPOutput solve_lp(const Instance& inst, double kappa0,
                  std::uint64_t direction_seed) {
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  const double sqrt_n = std::sqrt(double(n));
  std::vector<double> v = Rng(direction_seed, kStreamDirection).normal_vector(n);

  LPOutput out;
  out.direction_seed = direction_seed;

  if (m == 0) {
    // No half-space rows: the box LP separates over coordinates.
    out.theta_hat.resize(n);
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out.theta_hat[j] = v[j] >= 0.0 ? 1.0 : -1.0;
      out.objective += std::fabs(v[j]);
    }
    out.duality_gap = 0.0;
    finalize(out, inst, kappa0);
    return out;
  }

  // Equality form: [X | -I] (theta, s) = kappa0 sqrt(N) 1 with s >= 0.
  LpProblem p;
  p.m = int(m);
  p.n = int(n + m);
  p.a.assign(std::size_t(p.m) * p.n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = inst.row(i);
    for (std::size_t j = 0; j < n; ++j) p.a[j * m + i] = row[j];
    p.a[(n + i) * m + i] = -1.0;
  }
  p.b.assign(m, kappa0 * sqrt_n);
  p.c.assign(n + m, 0.0);
  std::copy(v.begin(), v.end(), p.c.begin());
  p.lower.assign(n + m, 0.0);
  p.upper.assign(n + m, std::numeric_limits<double>::infinity());
  std::fill(p.lower.begin(), p.lower.begin() + n, -1.0);
  std::fill(p.upper.begin(), p.upper.begin() + n, 1.0);

  SimplexOptions opts;
  opts.start_at_upper.assign(n + m, 0);
  for (std::size_t j = 0; j < n; ++j) opts.start_at_upper[j] = v[j] >= 0.0;

  LpSolution sol = solve_bounded_lp(p, opts);
  if (sol.status == LpStatus::kInfeasible) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "LP infeasible at kappa0=%.6g (phase-1 residual %.3e "
                  "certifies no point of the box meets every margin)",
                  kappa0, sol.infeasibility);
    throw PdiscError(buf);
  }
  if (sol.status == LpStatus::kIterLimit) {
    throw PdiscError(
        "LP stopped at the pivot limit (m=" + std::to_string(m) +
        ", n=" + std::to_string(n) +
        "): the program is heavily degenerate; shapes with m >> n or "
        "kappa0 near 0 are outside this solver's desk range");
  }
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("lp stage solver breakdown (status " +
                             std::to_string(int(sol.status)) + ")");
  }

  out.theta_hat.assign(sol.x.begin(), sol.x.begin() + n);
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += v[j] * out.theta_hat[j];
  out.basis = sol.basis;
  out.iterations = sol.phase1_iterations + sol.iterations;

  // Weak-duality certificate. For any lambda >= 0,
  //   max_{theta in box} <v,theta> + <lambda, X theta - b>
  //     = sum_j |v_j + (X' lambda)_j| - <b, lambda>
  // bounds the optimum from above; the simplex multipliers (negated — the
  // surplus columns carry -I) make it tight at the optimum.
  std::vector<double> lambda(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = std::max(-sol.y[i], 0.0);
  double dual_value = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double r = v[j];
    for (std::size_t i = 0; i < m; ++i) r += lambda[i] * inst.x[i * n + j];
    dual_value += std::fabs(r);
  }
  for (std::size_t i = 0; i < m; ++i) dual_value -= lambda[i] * p.b[i];
  out.duality_gap = dual_value - out.objective;
  if (!(out.duality_gap <= 1e-6 * double(n))) {
    throw std::runtime_error("lp stage optimality certificate failed (gap " +
                             std::to_string(out.duality_gap) + ")");
  }

  finalize(out, inst, kappa0);
  return out;
}

LPDiagnostics lp_diagnostics(const LPOutput& out, double alpha, double kappa0) {
  LPDiagnostics d;
  const double n = double(out.theta_hat.size());
  d.tight_fraction = double(out.tight_set.size()) / n;

  OrderParams op = solve_order_params(alpha, kappa0);
  if (!op.feasible) {
    throw PdiscError("order parameters infeasible at this (alpha, kappa0); "
                     "no margin law to compare against");
  }
  MarginLaw law{op.rho, kappa0};
  d.w2_to_margin_law = wasserstein2(
      out.margin_vector, [&law](double p) { return law.quantile(p); });

  double worst = std::numeric_limits<double>::infinity();
  for (double mg : out.margin_vector) worst = std::min(worst, mg);
  d.min_margin = worst - kappa0;
  return d;
}

}  // namespace pdisc
