#include "pdisc/edge_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdisc/instance.hpp"
#include "pdisc/normal.hpp"

namespace pdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Orthonormal basis of the active discrepancy rows restricted to the free
// coordinates. Rebuilt from scratch whenever either active set changes —
// the restriction changes under variable freezes, so incremental updates
// buy little. Modified Gram-Schmidt with a second pass; rows that lose all
// but a 1e-10 fraction of their norm are dependent and dropped.
class ProjectionBasis {
 public:
  void rebuild(const double* x, std::size_t n,
               const std::vector<std::size_t>& active,
               const std::vector<std::uint8_t>& frozen) {
    q_.assign(active.size() * n, 0.0);
    rank_ = 0;
    dropped_ = 0;
    n_ = n;
    for (std::size_t j : active) {
      const double* row = x + j * n;
      double* v = &q_[rank_ * n];
      double norm0 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double e = frozen[i] ? 0.0 : row[i];
        v[i] = e;
        norm0 += e * e;
      }
      norm0 = std::sqrt(norm0);
      if (norm0 == 0.0) {
        ++dropped_;
        continue;
      }
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t a = 0; a < rank_; ++a) {
          const double* q = &q_[a * n];
          double d = dot(q, v, n);
          for (std::size_t i = 0; i < n; ++i) v[i] -= d * q[i];
        }
      }
      double norm = std::sqrt(dot(v, v, n));
      if (norm <= 1e-10 * norm0) {
        ++dropped_;
        continue;
      }
      double inv = 1.0 / norm;
      for (std::size_t i = 0; i < n; ++i) v[i] *= inv;
      ++rank_;
    }
  }

  void project(double* g) const {
    for (std::size_t a = 0; a < rank_; ++a) {
      const double* q = &q_[a * n_];
      double d = dot(q, g, n_);
      for (std::size_t i = 0; i < n_; ++i) g[i] -= d * q[i];
    }
  }

  std::size_t rank() const { return rank_; }

 private:
  std::vector<double> q_;
  std::size_t rank_ = 0;
  std::size_t dropped_ = 0;
  std::size_t n_ = 0;
};

struct ResolvedParams {
  double delta = 0.0;
  double gamma = 0.0;
  long steps = 0;
};

ResolvedParams resolve_params(const ColoringConfig& cfg, std::size_t n) {
  ResolvedParams r;
  double logn = std::log(double(std::max<std::size_t>(n, 3)));
  r.delta = cfg.delta > 0.0 ? cfg.delta : 0.05 / logn;
  if (r.delta > 0.1 / logn * (1.0 + 1e-12)) {
    throw PdiscError("walk delta exceeds the 0.1/log(n) ceiling");
  }
  r.gamma = cfg.gamma > 0.0 ? cfg.gamma : r.delta / std::sqrt(logn);
  if (!(r.gamma > 0.0)) throw PdiscError("walk gamma must be positive");
  double g2 = r.gamma * r.gamma;
  switch (cfg.variant) {
    case WalkVariant::kGeneral16_8:
      r.steps = long(std::ceil(16.0 / (3.0 * g2)));
      break;
    case WalkVariant::kZeroMargin:
      if (!(cfg.k1 > 0.0) || !(cfg.k2 > 0.0) || !(cfg.k3 > 1.0))
        throw PdiscError("zero-margin walk needs K1, K2 > 0 and K3 > 1");
      r.steps = long(std::ceil(cfg.k1 / g2));
      break;
    case WalkVariant::kOde:
      if (!(cfg.t1 > 0.0))
        throw PdiscError("ODE-calibrated walk needs a positive time horizon");
      r.steps = long(std::ceil(cfg.t1 / g2));
      break;
  }
  return r;
}

std::vector<double> row_norms(const double* x, std::size_t m, std::size_t n) {
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = std::sqrt(dot(x + j * n, x + j * n, n));
  return out;
}

std::vector<double> barrier_thresholds(const std::vector<double>& c,
                                       const std::vector<double>& norms,
                                       double delta) {
  std::vector<double> th(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (!(c[j] >= 0.0)) throw PdiscError("slack vector entries must be >= 0");
    th[j] = std::isfinite(c[j]) ? (delta - c[j]) * norms[j] : -kInf;
  }
  return th;
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> active_sets(
    const std::vector<double>& theta, const std::vector<double>& theta0,
    const double* x, std::size_t m, std::size_t n, const std::vector<double>& c,
    double delta) {
  if (theta.size() != n || theta0.size() != n || c.size() != m)
    throw PdiscError("active_sets: dimension mismatch");
  std::vector<std::size_t> vars, rows;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(theta[i]) >= 1.0 - delta) vars.push_back(i);
  auto norms = row_norms(x, m, n);
  auto th = barrier_thresholds(c, norms, delta);
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = theta[i] - theta0[i];
  for (std::size_t j = 0; j < m; ++j)
    if (dot(x + j * n, diff.data(), n) <= th[j]) rows.push_back(j);
  return {std::move(vars), std::move(rows)};
}

std::vector<double> project_gaussian(const double* x, std::size_t m,
                                     std::size_t n,
                                     const std::vector<std::size_t>& active_rows,
                                     const std::vector<std::uint8_t>& var_frozen,
                                     Rng& rng) {
  if (var_frozen.size() != n)
    throw PdiscError("project_gaussian: frozen mask length mismatch");
  for (std::size_t j : active_rows)
    if (j >= m) throw PdiscError("project_gaussian: active row out of range");
  std::vector<double> g(n, 0.0);
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!var_frozen[i]) {
      g[i] = rng.normal();
      ++free_count;
    }
  }
  if (free_count == 0) return g;  // V = {0}
  ProjectionBasis basis;
  basis.rebuild(x, n, active_rows, var_frozen);
  if (basis.rank() >= free_count) {
    std::fill(g.begin(), g.end(), 0.0);
    return g;
  }
  basis.project(g.data());
  return g;
}

WalkState edge_walk_run(const double* x, std::size_t m, std::size_t n,
                        const std::vector<double>& c,
                        const std::vector<double>& theta0,
                        const ColoringConfig& cfg, Rng rng) {
  if (n == 0) throw PdiscError("edge walk needs at least one coordinate");
  if (theta0.size() != n || c.size() != m)
    throw PdiscError("edge walk: dimension mismatch");
  for (double v : theta0)
    if (!(std::fabs(v) <= 1.0 + 1e-12))
      throw PdiscError("edge walk start point leaves [-1,1]");
  ResolvedParams pr = resolve_params(cfg, n);
  const double delta = pr.delta;
  const double gamma = pr.gamma;
  const long total_steps = pr.steps;

  WalkState st;
  st.theta = theta0;
  st.theta0 = theta0;
  st.var_frozen.assign(n, 0);
  st.disc_frozen.assign(m, 0);
  st.disc_margin.assign(m, 0.0);

  auto norms = row_norms(x, m, n);
  auto thresh = barrier_thresholds(c, norms, delta);

  std::vector<std::size_t> active_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(theta0[i]) >= 1.0 - delta) {
      st.var_frozen[i] = 1;
      ++st.n_var_frozen;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (0.0 <= thresh[j]) {
      st.disc_frozen[j] = 1;
      ++st.n_disc_frozen;
      active_rows.push_back(j);
    }
  }

  ProjectionBasis basis;
  basis.rebuild(x, n, active_rows, st.var_frozen);

  auto free_dim = [&] { return n - st.n_var_frozen; };
  auto collapsed = [&] {
    return free_dim() == 0 || basis.rank() >= free_dim();
  };

  // Trace plumbing: capture points are observed after the given number of
  // steps; once the walk goes stationary the remaining points repeat the
  // final state.
  std::size_t next_trace = 0;
  auto capture = [&](long step) {
    while (next_trace < cfg.trace_steps.size() &&
           cfg.trace_steps[next_trace] <= step) {
      double nsq = dot(st.theta.data(), st.theta.data(), n);
      st.trace.push_back({cfg.trace_steps[next_trace], st.n_var_frozen,
                          st.n_disc_frozen, nsq});
      ++next_trace;
    }
  };
  capture(0);

  std::vector<double> g(n);
  for (long t = 1; t <= total_steps; ++t) {
    if (collapsed()) {
      st.subspace_collapsed = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i)
      g[i] = st.var_frozen[i] ? 0.0 : rng.normal();
    basis.project(g.data());

    // Shrink the step rather than clamp when it would poke out of the cube;
    // clamping would bias the martingale the tail bounds live on.
    double geff = gamma;
    int halvings = 0;
    while (halvings <= 20) {
      bool overshoot = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!st.var_frozen[i] &&
            std::fabs(st.theta[i] + geff * g[i]) > 1.0) {
          overshoot = true;
          break;
        }
      }
      if (!overshoot) break;
      geff *= 0.5;
      ++halvings;
    }
    if (halvings > 20) {
      ++st.skipped_steps;
      capture(t);
      continue;
    }
    st.gamma_halvings += halvings;

    for (std::size_t i = 0; i < n; ++i)
      if (!st.var_frozen[i]) st.theta[i] += geff * g[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (!st.disc_frozen[j])
        st.disc_margin[j] += geff * dot(x + j * n, g.data(), n);
    }

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!st.var_frozen[i] && std::fabs(st.theta[i]) >= 1.0 - delta) {
        st.var_frozen[i] = 1;
        ++st.n_var_frozen;
        changed = true;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!st.disc_frozen[j] && st.disc_margin[j] <= thresh[j]) {
        st.disc_frozen[j] = 1;
        ++st.n_disc_frozen;
        active_rows.push_back(j);
        changed = true;
      }
    }
    if (changed) {
      basis.rebuild(x, n, active_rows, st.var_frozen);
      // Refresh the maintained margins of still-free rows against theta
      // itself so incremental drift can't accumulate across a long walk.
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = st.theta[i] - theta0[i];
      for (std::size_t j = 0; j < m; ++j) {
        if (!st.disc_frozen[j])
          st.disc_margin[j] = dot(x + j * n, diff.data(), n);
      }
    }
    capture(t);
  }
  st.steps = total_steps;
  capture(total_steps);
  return st;
}

ColoringResult partial_coloring(const double* x, std::size_t m, std::size_t n,
                                const std::vector<double>& c,
                                const std::vector<double>& theta0,
                                const ColoringConfig& cfg, const Rng& rng) {
  if (c.size() != m) throw PdiscError("partial coloring: slack length mismatch");

  // Slack preconditions come before any randomness is spent.
  if (cfg.variant == WalkVariant::kGeneral16_8) {
    double s = 0.0;
    for (double cj : c) {
      if (!(cj >= 0.0)) throw PdiscError("slack vector entries must be >= 0");
      if (std::isfinite(cj)) s += std::exp(-cj * cj / 16.0);
    }
    if (s > double(n) / 8.0 + 1e-12) {
      throw PdiscError("slack precondition failed: sum exp(-c^2/16) = " +
                       std::to_string(s) + " exceeds n/8");
    }
  } else if (cfg.variant == WalkVariant::kZeroMargin) {
    double s = 0.0;
    for (double cj : c) {
      if (!(cj >= 0.0)) throw PdiscError("slack vector entries must be >= 0");
      if (std::isfinite(cj)) s += 2.0 * norm_cdf(-cj / std::sqrt(cfg.k1));
    }
    if (s > double(n) / cfg.k2 + 1e-12) {
      throw PdiscError("slack precondition failed: 2 sum Phi(-c/sqrt(K1)) = " +
                       std::to_string(s) + " exceeds n/K2");
    }
  }

  double logn = std::log(double(std::max<std::size_t>(n, 3)));
  int retries = cfg.retries > 0 ? cfg.retries : int(std::ceil(10.0 * logn));

  std::size_t need;
  switch (cfg.variant) {
    case WalkVariant::kGeneral16_8:
      need = (n + 1) / 2;
      break;
    case WalkVariant::kZeroMargin:
      need = std::size_t(std::ceil(double(n) / cfg.k3));
      break;
    case WalkVariant::kOde:
    default:
      need = std::size_t(std::ceil(cfg.p1_target * double(n)));
      break;
  }

  auto norms = row_norms(x, m, n);
  ColoringResult best;
  bool have_best = false;
  for (int r = 0; r < retries; ++r) {
    WalkState st = edge_walk_run(x, m, n, c, theta0, cfg, rng.descend(r));

    double min_slack = kInf;
    bool margins_ok = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(c[j])) continue;
      double slack = st.disc_margin[j] + c[j] * norms[j];
      min_slack = std::min(min_slack, slack);
      if (slack < -1e-9 * std::max(1.0, norms[j])) margins_ok = false;
    }
    bool ok = margins_ok && st.n_var_frozen >= need;
    if (ok || !have_best || st.n_var_frozen > best.state.n_var_frozen) {
      best.state = std::move(st);
      best.min_slack = min_slack;
      have_best = true;
    }
    if (ok) {
      best.success = true;
      best.retries_used = r + 1;
      return best;
    }
  }
  best.success = false;
  best.retries_used = retries;
  return best;
}

}  // namespace pdisc
