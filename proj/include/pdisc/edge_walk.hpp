#pragma once

// The edge walk: a projected Gaussian random walk inside [-1,1]^n that
// freezes coordinates as they reach the cube boundary and freezes
// discrepancy rows as their margin gets eaten down to the slack barrier.
// Once frozen, a coordinate or row constrains every later step: the walk
// continues in the orthogonal subspace, so frozen margins and frozen
// coordinates never move again. Three step-count conventions share the same
// core: the general one-sided walk (T = ceil(16/(3 gamma^2))), the
// margin-zero variant (T = K1/gamma^2), and the ODE-calibrated variant
// (T = T1/gamma^2 with T1 computed elsewhere).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pdisc/rng.hpp"

namespace pdisc {

enum class WalkVariant { kGeneral16_8, kZeroMargin, kOde };

struct ColoringConfig {
  WalkVariant variant = WalkVariant::kGeneral16_8;
  double gamma = 0.0;  // 0 -> delta / sqrt(log n)
  double delta = 0.0;  // 0 -> 0.05 / log n; must satisfy delta <= 0.1/log(max(n,3))
  // Constants for the margin-zero variant; the general walk has 16 and 8
  // baked into its step count and slack precondition.
  double k1 = 4.2;
  double k2 = 30.0;
  double k3 = 1.3745;
  double t1 = 0.0;        // ODE variant: walk time horizon
  double p1_target = 0.0; // ODE variant: success needs this frozen fraction
  int retries = 0;        // 0 -> ceil(10 log n)
  std::vector<long> trace_steps;  // sorted step indices to sample
};

struct WalkTracePoint {
  long step = 0;
  std::size_t n_var = 0;
  std::size_t n_disc = 0;
  double theta_norm_sq = 0.0;
};

struct WalkState {
  std::vector<double> theta;
  std::vector<double> theta0;
  long steps = 0;
  std::vector<std::uint8_t> var_frozen;   // |theta_i| >= 1-delta, monotone
  std::vector<std::uint8_t> disc_frozen;  // margin at the slack barrier, monotone
  std::size_t n_var_frozen = 0;
  std::size_t n_disc_frozen = 0;
  std::vector<double> disc_margin;        // <theta - theta0, X_j>, maintained
  int gamma_halvings = 0;   // cube-overshoot backtracks
  int skipped_steps = 0;    // steps abandoned after 20 halvings (pathological)
  bool subspace_collapsed = false;  // V_t hit {0} before the horizon
  std::vector<WalkTracePoint> trace;
};

// Exact threshold scan: indices with |theta_i| >= 1-delta, and rows with
// <theta-theta0, X_j> <= (-c_j+delta)*||X_j||_2. Pure; the walk maintains the
// same sets incrementally and refreshes against this definition whenever the
// projector is rebuilt.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> active_sets(
    const std::vector<double>& theta, const std::vector<double>& theta0,
    const double* x, std::size_t m, std::size_t n, const std::vector<double>& c,
    double delta);

// One standard-normal draw on the subspace {u : u_i = 0 for frozen i,
// <u, X_j> = 0 for active j}: draw on the free coordinates, then project out
// the active rows via an orthonormal basis (dependent rows dropped). Returns
// the zero vector when the subspace is {0}.
std::vector<double> project_gaussian(const double* x, std::size_t m,
                                     std::size_t n,
                                     const std::vector<std::size_t>& active_rows,
                                     const std::vector<std::uint8_t>& var_frozen,
                                     Rng& rng);

// Runs the walk for the variant's step count from theta0 (which must lie in
// [-1,1]^n). c holds per-row slacks in row-norm units, >= 0 (+inf allowed:
// the row can never freeze). Throws PdiscError on parameter violations.
WalkState edge_walk_run(const double* x, std::size_t m, std::size_t n,
                        const std::vector<double>& c,
                        const std::vector<double>& theta0,
                        const ColoringConfig& cfg, Rng rng);

struct ColoringResult {
  WalkState state;
  bool success = false;
  int retries_used = 0;    // attempts consumed (1 = first try succeeded)
  double min_slack = 0.0;  // min_j (margin_j + c_j ||X_j||), >= 0 on success
};

// Retry wrapper: checks the variant's slack precondition, then reruns the
// walk with descended RNG streams until the success test passes (margin
// preservation + frozen fraction >= n/2, n/K3, or p1_target*n by variant).
// Keeps the best attempt by frozen count when every retry fails.
ColoringResult partial_coloring(const double* x, std::size_t m, std::size_t n,
                                const std::vector<double>& c,
                                const std::vector<double>& theta0,
                                const ColoringConfig& cfg, const Rng& rng);

}  // namespace pdisc
