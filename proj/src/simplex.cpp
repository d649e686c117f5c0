#include "pdisc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum VStat : signed char { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFreeZero = 3 };

// Working state for one solve. Variables 0..n-1 are the caller's, n..n+m-1
// are phase-1 artificials (column asign[i] * e_i, bounds [0,inf) in phase 1,
// pinned to [0,0] afterwards).
struct Solver {
  const LpProblem& p;
  const SimplexOptions& opt;
  int m, n, nt;
  std::vector<double> asign;
  std::vector<double> lo, up, cost;
  std::vector<signed char> stat;
  std::vector<int> basis;    // position -> variable
  std::vector<int> pos_of;   // variable -> basis position, -1 if nonbasic
  std::vector<double> binv;  // m*m, row-major, rows indexed by basis position
  std::vector<double> xb;    // basic values by position
  std::vector<double> y;     // duals for the current cost vector
  std::vector<double> w;     // ftran scratch (B^{-1} a_enter)
  std::vector<double> acol;  // dense column scratch
  int iters = 0;
  int degen_streak = 0;
  int since_refactor = 0;

  Solver(const LpProblem& prob, const SimplexOptions& o)
      : p(prob), opt(o), m(prob.m), n(prob.n), nt(prob.n + prob.m) {}

  void load_col(int j, double* out) const {
    if (j < n) {
      std::memcpy(out, &p.a[static_cast<size_t>(j) * m], sizeof(double) * m);
    } else {
      std::fill(out, out + m, 0.0);
      out[j - n] = asign[j - n];
    }
  }

  double nb_value(int j) const {
    if (stat[j] == kAtLower) return lo[j];
    if (stat[j] == kAtUpper) return up[j];
    return 0.0;  // free at zero
  }

  // Rebuild binv by Gauss-Jordan on the current basis matrix, then recompute
  // the basic values from the nonbasic ones. Returns false on a singular
  // basis.
  bool refactor() {
    if (m == 0) return true;
    std::vector<double> bm(static_cast<size_t>(m) * m);  // row-major B
    for (int k = 0; k < m; ++k) {
      load_col(basis[k], acol.data());
      for (int i = 0; i < m; ++i) bm[static_cast<size_t>(i) * m + k] = acol[i];
    }
    std::fill(binv.begin(), binv.end(), 0.0);
    for (int i = 0; i < m; ++i) binv[static_cast<size_t>(i) * m + i] = 1.0;
    for (int k = 0; k < m; ++k) {
      int piv = k;
      double best = std::fabs(bm[static_cast<size_t>(k) * m + k]);
      for (int i = k + 1; i < m; ++i) {
        double v = std::fabs(bm[static_cast<size_t>(i) * m + k]);
        if (v > best) { best = v; piv = i; }
      }
      if (best < 1e-12) return false;
      if (piv != k) {
        for (int j = 0; j < m; ++j) {
          std::swap(bm[static_cast<size_t>(piv) * m + j], bm[static_cast<size_t>(k) * m + j]);
          std::swap(binv[static_cast<size_t>(piv) * m + j], binv[static_cast<size_t>(k) * m + j]);
        }
      }
      double inv = 1.0 / bm[static_cast<size_t>(k) * m + k];
      for (int j = 0; j < m; ++j) {
        bm[static_cast<size_t>(k) * m + j] *= inv;
        binv[static_cast<size_t>(k) * m + j] *= inv;
      }
      for (int i = 0; i < m; ++i) {
        if (i == k) continue;
        double f = bm[static_cast<size_t>(i) * m + k];
        if (f == 0.0) continue;
        for (int j = 0; j < m; ++j) {
          bm[static_cast<size_t>(i) * m + j] -= f * bm[static_cast<size_t>(k) * m + j];
          binv[static_cast<size_t>(i) * m + j] -= f * binv[static_cast<size_t>(k) * m + j];
        }
      }
    }
    // Gauss-Jordan leaves binv rows ordered so that row k recovers the value
    // of basis[k]; no permutation bookkeeping needed beyond the swaps above.
    recompute_xb();
    since_refactor = 0;
    return true;
  }

  void recompute_xb() {
    std::vector<double> rhs(p.b.begin(), p.b.end());
    for (int j = 0; j < nt; ++j) {
      if (stat[j] == kBasic) continue;
      double v = nb_value(j);
      if (v == 0.0) continue;
      if (j < n) {
        const double* col = &p.a[static_cast<size_t>(j) * m];
        for (int i = 0; i < m; ++i) rhs[i] -= col[i] * v;
      } else {
        rhs[j - n] -= asign[j - n] * v;
      }
    }
    for (int k = 0; k < m; ++k) {
      const double* row = &binv[static_cast<size_t>(k) * m];
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += row[i] * rhs[i];
      xb[k] = s;
    }
  }

  void compute_duals() {
    for (int i = 0; i < m; ++i) y[i] = 0.0;
    for (int k = 0; k < m; ++k) {
      double cb = cost[basis[k]];
      if (cb == 0.0) continue;
      const double* row = &binv[static_cast<size_t>(k) * m];
      for (int i = 0; i < m; ++i) y[i] += cb * row[i];
    }
  }

  double reduced_cost(int j) const {
    if (j >= n) return cost[j] - asign[j - n] * y[j - n];
    const double* col = &p.a[static_cast<size_t>(j) * m];
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += y[i] * col[i];
    return cost[j] - s;
  }

  // Pick an entering variable; returns -1 at optimality. dir is +1 when the
  // entering variable increases, -1 when it decreases.
  int price(bool bland, int* dir) const {
    int best = -1, best_dir = 0;
    double best_score = opt.cost_tol;
    for (int j = 0; j < nt; ++j) {
      signed char s = stat[j];
      if (s == kBasic) continue;
      if (lo[j] == up[j]) continue;  // pinned (includes retired artificials)
      double d = reduced_cost(j);
      int dj;
      if (s == kAtLower) {
        if (d <= opt.cost_tol) continue;
        dj = 1;
      } else if (s == kAtUpper) {
        if (d >= -opt.cost_tol) continue;
        dj = -1;
      } else {  // free at zero
        if (std::fabs(d) <= opt.cost_tol) continue;
        dj = d > 0 ? 1 : -1;
      }
      if (bland) { *dir = dj; return j; }
      if (std::fabs(d) > best_score) {
        best_score = std::fabs(d);
        best = j;
        best_dir = dj;
      }
    }
    *dir = best_dir;
    return best;
  }

  void ftran(int j) {
    if (j >= n) {
      int i = j - n;
      for (int k = 0; k < m; ++k) w[k] = asign[i] * binv[static_cast<size_t>(k) * m + i];
      return;
    }
    load_col(j, acol.data());
    for (int k = 0; k < m; ++k) {
      const double* row = &binv[static_cast<size_t>(k) * m];
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += row[i] * acol[i];
      w[k] = s;
    }
  }

  // One simplex phase. The cost vector and bounds are already in place.
  LpStatus iterate(int phase, int max_iters) {
    bool fresh = true;
    while (true) {
      if (iters >= max_iters) return LpStatus::kIterLimit;
      if (since_refactor >= opt.refactor_every) {
        if (!refactor()) return LpStatus::kNumerical;
        fresh = true;
      }
      compute_duals();
      bool bland = degen_streak > opt.bland_after;
      int dir = 0;
      int enter = price(bland, &dir);
      if (enter < 0) {
        if (!fresh) {
          // Guard against a stale inverse claiming optimality.
          if (!refactor()) return LpStatus::kNumerical;
          fresh = true;
          continue;
        }
        return LpStatus::kOptimal;
      }
      ftran(enter);

      double span = up[enter] - lo[enter];  // may be inf
      double best_t = span;
      int leave = -1;          // -1 means bound flip
      signed char leave_to = kAtLower;
      double leave_w = 0.0;
      for (int k = 0; k < m; ++k) {
        double e = dir * w[k];
        int bv = basis[k];
        double t;
        signed char hit;
        if (e > opt.pivot_tol) {
          if (lo[bv] == -kInf) continue;
          t = (xb[k] - lo[bv]) / e;
          hit = kAtLower;
        } else if (e < -opt.pivot_tol) {
          if (up[bv] == kInf) continue;
          t = (xb[k] - up[bv]) / e;
          hit = kAtUpper;
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;  // tiny bound violations from drift
        bool take;
        if (t < best_t - 1e-10) {
          take = true;
        } else if (t < best_t + 1e-10 && leave >= 0) {
          // Tie: prefer a large pivot for stability, lowest index under Bland.
          take = bland ? (bv < basis[leave]) : (std::fabs(w[k]) > std::fabs(leave_w));
        } else {
          take = false;
        }
        if (take) {
          best_t = t;
          leave = k;
          leave_to = hit;
          leave_w = w[k];
        }
      }
      if (best_t == kInf) {
        return phase == 1 ? LpStatus::kNumerical : LpStatus::kUnbounded;
      }

      ++iters;
      fresh = false;
      degen_streak = best_t > 1e-10 ? 0 : degen_streak + 1;

      if (leave < 0) {
        // Entering variable runs to its opposite bound; basis unchanged.
        for (int k = 0; k < m; ++k) xb[k] -= dir * span * w[k];
        stat[enter] = stat[enter] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }

      int lv = basis[leave];
      double enter_val = nb_value(enter) + dir * best_t;
      for (int k = 0; k < m; ++k) {
        if (k != leave) xb[k] -= dir * best_t * w[k];
      }
      xb[leave] = enter_val;
      stat[lv] = leave_to;
      if (phase == 1 && lv >= n) up[lv] = 0.0;  // artificials never come back
      pos_of[lv] = -1;
      basis[leave] = enter;
      pos_of[enter] = leave;
      stat[enter] = kBasic;

      double piv = w[leave];
      double* prow = &binv[static_cast<size_t>(leave) * m];
      double inv = 1.0 / piv;
      for (int i = 0; i < m; ++i) prow[i] *= inv;
      for (int k = 0; k < m; ++k) {
        if (k == leave) continue;
        double f = w[k];
        if (f == 0.0) continue;
        double* row = &binv[static_cast<size_t>(k) * m];
        for (int i = 0; i < m; ++i) row[i] -= f * prow[i];
      }
      ++since_refactor;
    }
  }
};

}  // namespace

LpSolution solve_bounded_lp(const LpProblem& p, const SimplexOptions& opts) {
  LpSolution out;
  const int m = p.m, n = p.n;
  if (m < 0 || n < 0 || p.a.size() != static_cast<size_t>(m) * n ||
      p.b.size() != static_cast<size_t>(m) || p.c.size() != static_cast<size_t>(n) ||
      p.lower.size() != static_cast<size_t>(n) || p.upper.size() != static_cast<size_t>(n)) {
    return out;  // kNumerical: malformed input
  }
  for (int j = 0; j < n; ++j) {
    if (!(p.lower[j] <= p.upper[j]) || p.lower[j] == kInf || p.upper[j] == -kInf) {
      return out;
    }
  }

  Solver s(p, opts);
  const int nt = s.nt;
  s.asign.assign(m, 1.0);
  s.lo.resize(nt);
  s.up.resize(nt);
  s.cost.assign(nt, 0.0);
  s.stat.assign(nt, kAtLower);
  s.basis.resize(m);
  s.pos_of.assign(nt, -1);
  s.binv.assign(static_cast<size_t>(m) * m, 0.0);
  s.xb.assign(m, 0.0);
  s.y.assign(m, 0.0);
  s.w.assign(m, 0.0);
  s.acol.assign(m, 0.0);

  std::copy(p.lower.begin(), p.lower.end(), s.lo.begin());
  std::copy(p.upper.begin(), p.upper.end(), s.up.begin());
  const bool use_hint = opts.start_at_upper.size() == static_cast<size_t>(n);
  for (int j = 0; j < n; ++j) {
    bool want_upper = use_hint && opts.start_at_upper[j] != 0;
    if (want_upper && p.upper[j] < kInf) {
      s.stat[j] = kAtUpper;
    } else if (p.lower[j] > -kInf) {
      s.stat[j] = kAtLower;
    } else if (p.upper[j] < kInf) {
      s.stat[j] = kAtUpper;
    } else {
      s.stat[j] = kFreeZero;
    }
  }
  for (int i = 0; i < m; ++i) {
    s.lo[n + i] = 0.0;
    s.up[n + i] = kInf;
  }

  // Residuals at the nonbasic starting point decide the artificial signs.
  std::vector<double> resid(p.b.begin(), p.b.end());
  for (int j = 0; j < n; ++j) {
    double v = s.nb_value(j);
    if (v == 0.0) continue;
    const double* col = &p.a[static_cast<size_t>(j) * m];
    for (int i = 0; i < m; ++i) resid[i] -= col[i] * v;
  }

  // Crash: a column touching only row i can absorb that row's residual
  // without disturbing anything else, so it starts basic if its bounds allow.
  // With surplus columns this puts already-satisfied rows straight into the
  // basis.
  std::vector<int> nnz(n, 0), only_row(n, -1);
  for (int j = 0; j < n; ++j) {
    const double* col = &p.a[static_cast<size_t>(j) * m];
    for (int i = 0; i < m; ++i) {
      if (col[i] != 0.0) {
        if (++nnz[j] > 1) break;
        only_row[j] = i;
      }
    }
  }
  std::vector<int> crash(m, -1);
  for (int j = 0; j < n; ++j) {
    if (nnz[j] != 1 || s.lo[j] == s.up[j]) continue;
    int i = only_row[j];
    double aij = p.a[static_cast<size_t>(j) * m + i];
    if (std::fabs(aij) < 1e-7) continue;
    if (crash[i] >= 0 &&
        std::fabs(p.a[static_cast<size_t>(crash[i]) * m + i]) >= std::fabs(aij)) {
      continue;
    }
    double val = s.nb_value(j) + resid[i] / aij;
    if (val >= s.lo[j] - 1e-9 && val <= s.up[j] + 1e-9) crash[i] = j;
  }

  double art_total = 0.0;
  for (int i = 0; i < m; ++i) {
    int j = crash[i];
    if (j >= 0) {
      double aij = p.a[static_cast<size_t>(j) * m + i];
      double val = s.nb_value(j) + resid[i] / aij;
      val = std::min(std::max(val, s.lo[j]), s.up[j]);
      s.basis[i] = j;
      s.pos_of[j] = i;
      s.stat[j] = kBasic;
      s.xb[i] = val;
      s.binv[static_cast<size_t>(i) * m + i] = 1.0 / aij;
      // Pin the matching artificial so it never prices in.
      s.up[n + i] = 0.0;
      s.stat[n + i] = kAtLower;
      continue;
    }
    double r = resid[i];
    s.asign[i] = r >= 0.0 ? 1.0 : -1.0;
    s.basis[i] = n + i;
    s.pos_of[n + i] = i;
    s.stat[n + i] = kBasic;
    s.xb[i] = std::fabs(r);
    s.binv[static_cast<size_t>(i) * m + i] = s.asign[i];
    art_total += std::fabs(r);
  }
  // With crashed columns in the basis the diagonal inverse above is exact
  // only when their rows line up; rebuild to be safe.
  if (m > 0 && !s.refactor()) {
    out.status = LpStatus::kNumerical;
    return out;
  }

  int max_iters = opts.max_iterations > 0 ? opts.max_iterations : 50 * (m + n) + 10000;
  double bscale = 1.0;
  for (int i = 0; i < m; ++i) bscale = std::max(bscale, std::fabs(p.b[i]));

  if (art_total > opts.feas_tol * bscale) {
    for (int i = 0; i < m; ++i) s.cost[n + i] = -1.0;
    LpStatus st = s.iterate(1, max_iters);
    out.phase1_iterations = s.iters;
    if (st != LpStatus::kOptimal) {
      out.status = st;
      return out;
    }
    double left = 0.0;
    for (int k = 0; k < m; ++k) {
      if (s.basis[k] >= n) left += std::max(s.xb[k], 0.0);
    }
    if (left > opts.feas_tol * bscale) {
      out.status = LpStatus::kInfeasible;
      out.infeasibility = left;
      out.iterations = 0;
      return out;
    }
  }

  for (int i = 0; i < m; ++i) {
    s.cost[n + i] = 0.0;
    s.up[n + i] = 0.0;  // keep any zero-level basic artificials pinned
  }
  std::copy(p.c.begin(), p.c.end(), s.cost.begin());
  int phase1_iters = s.iters;
  s.degen_streak = 0;

  LpStatus st = s.iterate(2, max_iters);
  out.status = st;
  out.iterations = s.iters - phase1_iters;

  if (m > 0) s.refactor();
  s.compute_duals();
  out.x.resize(n);
  for (int j = 0; j < n; ++j) {
    double v = s.pos_of[j] >= 0 ? s.xb[s.pos_of[j]] : s.nb_value(j);
    if (p.lower[j] > -kInf) v = std::max(v, p.lower[j]);
    if (p.upper[j] < kInf) v = std::min(v, p.upper[j]);
    out.x[j] = v;
  }
  out.y.assign(s.y.begin(), s.y.end());
  out.basis = s.basis;
  out.objective = 0.0;
  for (int j = 0; j < n; ++j) out.objective += p.c[j] * out.x[j];
  out.residual = 0.0;
  for (int i = 0; i < m; ++i) {
    double ax = 0.0;
    for (int j = 0; j < n; ++j) ax += p.a[static_cast<size_t>(j) * m + i] * out.x[j];
    out.residual = std::max(out.residual, std::fabs(ax - p.b[i]));
  }
  return out;
}

}  // namespace pdisc
