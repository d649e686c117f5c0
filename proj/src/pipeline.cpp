#include "pdisc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "pdisc/edge_walk.hpp"
#include "pdisc/lp_stage.hpp"
#include "pdisc/normal.hpp"
#include "pdisc/rng.hpp"
#include "pdisc/schedules.hpp"

namespace pdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The negative-kappa preset solves the LP on the full dense matrix; past
// this many matrix entries a single desk core stops being a sane venue.
constexpr double kNegDeskCap = 1e8;

[[noreturn]] void fail_round(int k, const std::string& what) {
  throw PdiscError("round " + std::to_string(k) + ": " + what);
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kNeg: return "neg";
    case Regime::kZero005: return "zero005";
    case Regime::kZero010: return "zero010";
    case Regime::kPos: return "pos";
    case Regime::kProportional: return "proportional";
  }
  return "?";
}

Regime regime_from_name(const std::string& name) {
  if (name == "neg") return Regime::kNeg;
  if (name == "zero005") return Regime::kZero005;
  if (name == "zero010") return Regime::kZero010;
  if (name == "pos") return Regime::kPos;
  if (name == "proportional") return Regime::kProportional;
  throw PdiscError("unknown regime '" + name +
                   "' (expected neg, zero005, zero010, pos, proportional)");
}

std::vector<double> randomized_round(const std::vector<double>& theta,
                                     std::uint64_t seed) {
  Rng rng = Rng(seed, kStreamRounding);
  std::vector<double> chi(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double t = theta[i];
    if (std::abs(t) > 1.0 + 1e-10)
      throw PdiscError("cannot round coordinate " + std::to_string(i) +
                       ": |theta| = " + std::to_string(std::abs(t)) +
                       " exceeds 1");
    double s = (t >= 0.0) ? 1.0 : -1.0;  // sign(0) = +1
    double p = (1.0 + std::min(std::abs(t), 1.0)) / 2.0;
    chi[i] = (rng.uniform() < p) ? s : -s;
  }
  return chi;
}

PipelineTrace run_pipeline(const Instance& inst, double kappa,
                           const PipelineConfig& cfg) {
  auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = inst.n, m = inst.m;
  if (n == 0 || m == 0) throw PdiscError("instance is empty");

  PipelineTrace tr;
  tr.regime = cfg.regime;
  tr.kappa = kappa;
  tr.n = n;
  tr.m = m;
  tr.alpha = double(m) / double(n);
  tr.instance_seed = inst.seed;
  tr.direction_seed = cfg.direction_seed;
  tr.walk_seed = cfg.walk_seed;
  tr.c0 = cfg.c0;
  tr.beta0 = cfg.beta0;
  tr.ode_epsilon = cfg.ode_epsilon;

  // --- resolve defaults -----------------------------------------------
  const double logn = std::log(double(std::max<std::size_t>(n, 3)));
  const double delta = cfg.delta > 0.0 ? cfg.delta : 0.05 / logn;
  if (!(delta > 0.0 && delta < 1.0))
    throw PdiscError("freeze threshold delta must lie in (0, 1)");
  tr.delta = delta;
  tr.gamma = cfg.gamma;

  double kappa0 = cfg.kappa0;
  if (std::isnan(kappa0)) {
    switch (cfg.regime) {
      case Regime::kNeg:
        if (!(kappa < 0.0))
          throw PdiscError("neg regime needs kappa < 0 (got " +
                           std::to_string(kappa) + ")");
        kappa0 = kappa + cfg.c0 / std::abs(kappa);
        break;
      case Regime::kZero005: kappa0 = 3.42; break;
      case Regime::kZero010: kappa0 = 2.31; break;
      case Regime::kPos:
      case Regime::kProportional: kappa0 = kappa + 1.0; break;
    }
  }
  if (!(kappa0 > kappa))
    throw PdiscError("kappa0 = " + std::to_string(kappa0) +
                     " must exceed kappa = " + std::to_string(kappa) +
                     "; the walk only gives margin back");
  tr.kappa0 = kappa0;

  if (cfg.regime == Regime::kNeg && double(m) * double(n) > kNegDeskCap)
    throw PdiscError("regime not desk-feasible: neg needs the dense " +
                     std::to_string(m) + " x " + std::to_string(n) +
                     " program in memory (cap " + std::to_string(std::size_t(kNegDeskCap)) +
                     " entries)");

  const int rounds = cfg.rounds > 0 ? cfg.rounds
                                    : int(std::ceil(2.0 * logn));
  tr.rounds_budget = rounds;

  // neg/proportional spend a geometric fraction of each row's realized
  // margin surplus (the kappa -> -inf analysis); pos instead runs plain
  // iterated partial coloring on the free submatrix, with a per-round
  // scalar slack sized from the coloring precondition itself (the
  // kappa -> +inf analysis loses only O(sqrt(|free|)) of margin total).
  const bool surplus_sched = cfg.regime == Regime::kNeg ||
                             cfg.regime == Regime::kProportional;
  std::vector<double> betas;
  if (surplus_sched) {
    betas = geometric_betas(cfg.beta0, rounds);
    double bsum = std::accumulate(betas.begin(), betas.end(), 0.0);
    if (!(bsum < 1.0))
      throw PdiscError("beta schedule sums to " + std::to_string(bsum) +
                       " >= 1; the slack budget would overdraw the margin");
  }

  // --- stage 1: margin LP at kappa0 ------------------------------------
  LPOutput lp = solve_lp(inst, kappa0, cfg.direction_seed);
  tr.lp_objective = lp.objective;
  tr.lp_duality_gap = lp.duality_gap;
  tr.lp_iterations = lp.iterations;
  tr.lp_tight_fraction = double(lp.tight_set.size()) / double(n);
  tr.lp_min_margin =
      *std::min_element(lp.margin_vector.begin(), lp.margin_vector.end()) -
      kappa0;

  std::vector<double> theta = lp.theta_hat;
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(theta[i]) < 1.0 - delta) free_idx.push_back(i);

  // Proportional schedules spend a fixed fraction of each row's surplus
  // over kappa, minus a reserve that soaks up the rounding shift. Rows are
  // priced once, off the stage-1 point.
  std::vector<double> surplus;  // <theta_hat, X_j> - kappa sqrt(N) - reserve
  if (surplus_sched) {
    const double reserve =
        4.0 * std::sqrt(delta * double(n) * std::log(double(std::max<std::size_t>(m, 1))));
    const double sqn = std::sqrt(double(n));
    surplus.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      surplus[j] = (lp.margin_vector[j] - kappa) * sqn - reserve;
      if (!(surplus[j] > 0.0))
        throw PdiscError("row " + std::to_string(j) + " has no margin surplus (" +
                         std::to_string(surplus[j]) +
                         ") after the rounding reserve; raise kappa0 or shrink delta");
    }
  }

  const ScalarSlackTable* table = nullptr;
  if (cfg.regime == Regime::kZero005) table = &zero_margin_table_005();
  if (cfg.regime == Regime::kZero010) table = &zero_margin_table_010();

  // The ODE-driven head of the 0.10 schedule is a pure desk computation:
  // round k's walk horizon comes from the coloring ODE at the table's own
  // alpha recursion (alpha_k = alpha0 / prod_{i<k}(1 - p1^(i)), residual
  // mass chained through the table p0), never from the realized run. The
  // realized free set only normalizes the row slacks; the certified table
  // p1 is the per-round success bar. Recomputing the ODE at realized
  // parameters would be adaptive tuning, and the realized shrinkage
  // (typically much faster than the table bar) routinely pushes the
  // realized alpha_k outside the ODE's well-defined region.
  struct OdeRound {
    double t1 = 0.0, p0 = 0.0, p1 = 0.0, p1_bar = 0.0, alpha_k = 0.0;
  };
  std::vector<OdeRound> ode_head;
  if (cfg.regime == Regime::kZero010) {
    double prod = 1.0;
    double r_prev = table->r0;
    int head = std::min(rounds, int(table->p1.size()));
    for (int k = 1; k <= head; ++k) {
      OdeRound row;
      row.alpha_k = table->alpha0 / prod;
      row.p1_bar = table->p1_pred(k);
      OdeParams ode;
      try {
        ode = ode_coloring_params(row.alpha_k,
                                  CLaw::point(table->c_scalar(k)), r_prev);
      } catch (const PdiscError& e) {
        fail_round(k, std::string("schedule head: ") + e.what());
      }
      row.t1 = ode.t1;
      row.p0 = ode.p0;
      row.p1 = ode.p1;
      ode_head.push_back(row);
      prod *= 1.0 - table->p1_pred(k);
      r_prev = table->p0_pred(k);
    }
  }

  // --- stage 2: scheduled partial colorings on the free columns --------
  const double inv_sqn = 1.0 / std::sqrt(double(n));
  double budget_spent = 0.0;
  std::vector<double> x_sub, theta_sub, row_norm;
  for (int k = 1; k <= rounds; ++k) {
    const std::size_t ns = free_idx.size();
    if (ns == 0) {
      tr.early_exit = true;
      break;
    }

    x_sub.assign(m * ns, 0.0);
    theta_sub.resize(ns);
    row_norm.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* r = inst.row(j);
      double* s = x_sub.data() + j * ns;
      double acc = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        s[i] = r[free_idx[i]];
        acc += s[i] * s[i];
      }
      row_norm[j] = std::sqrt(acc);
    }
    for (std::size_t i = 0; i < ns; ++i) theta_sub[i] = theta[free_idx[i]];

    RoundRecord rec;
    rec.k = k;
    rec.n_free_in = ns;

    ColoringConfig wcfg;
    wcfg.gamma = cfg.gamma;
    wcfg.delta = delta;
    wcfg.retries = cfg.retries;

    std::vector<double> c(m);
    if (table != nullptr) {
      rec.c_scalar = table->c_scalar(k);
      c = normalized_row_slack(rec.c_scalar, x_sub, m, ns);
      if (k <= int(ode_head.size())) {
        const OdeRound& row = ode_head[std::size_t(k - 1)];
        rec.ode_t1 = row.t1;
        rec.ode_p0 = row.p0;
        rec.ode_p1 = row.p1;
        wcfg.variant = WalkVariant::kOde;
        wcfg.t1 = row.t1;
        // The table p1 is what the desk check certifies; the ODE's own p1
        // (typically far larger) is logged as the forecast. With no table
        // entry the forecast stands in, shaved by the configured epsilon.
        double bar = std::isnan(row.p1_bar)
                         ? row.p1 - cfg.ode_epsilon
                         : row.p1_bar;
        wcfg.p1_target = std::max(bar, 1e-6);
      } else {
        wcfg.variant = WalkVariant::kZeroMargin;
        wcfg.k1 = table->k1;
        wcfg.k2 = table->k2;
        wcfg.k3 = table->k3;
      }
    } else if (surplus_sched) {
      rec.beta = betas[std::size_t(k - 1)];
      for (std::size_t j = 0; j < m; ++j)
        c[j] = row_norm[j] > 0.0 ? rec.beta * surplus[j] / row_norm[j] : kInf;
      wcfg.variant = WalkVariant::kGeneral16_8;
    } else {
      // Smallest scalar slack meeting the coloring precondition with 2x
      // headroom: sum_j exp(-(c sqrt(n_sub)/||row_j||)^2/16) <= n_sub/16.
      // The sum is strictly decreasing in c, so bisect.
      const double sqns = std::sqrt(double(ns));
      auto mass = [&](double cs) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          if (row_norm[j] == 0.0) continue;
          double cj = cs * sqns / row_norm[j];
          s += std::exp(-cj * cj / 16.0);
        }
        return s;
      };
      const double target = double(ns) / 16.0;
      double cs = 0.0;
      if (mass(0.0) > target) {
        double hi = 8.0;
        while (mass(hi) > target) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          (mass(mid) > target ? lo : hi) = mid;
        }
        cs = hi;
      }
      rec.c_scalar = cs;
      for (std::size_t j = 0; j < m; ++j)
        c[j] = row_norm[j] > 0.0 ? cs * sqns / row_norm[j] : kInf;
      wcfg.variant = WalkVariant::kGeneral16_8;
    }

    switch (wcfg.variant) {
      case WalkVariant::kGeneral16_8: rec.need = (ns + 1) / 2; break;
      case WalkVariant::kZeroMargin:
        rec.need = std::size_t(std::ceil(double(ns) / wcfg.k3));
        break;
      case WalkVariant::kOde:
        rec.need = std::size_t(std::ceil(wcfg.p1_target * double(ns)));
        break;
    }
    rec.predicted_free_out = double(ns) - double(rec.need);

    // The walk's row-mass precondition, checked here first: a failing round
    // is recorded and skipped rather than aborting the run. The asymptotic
    // schedules assume row norms concentrate; at desk sizes a late round
    // with a handful of free columns can miss, and the next round's larger
    // slack almost always clears it.
    if (wcfg.variant == WalkVariant::kGeneral16_8 ||
        wcfg.variant == WalkVariant::kZeroMargin) {
      bool general = wcfg.variant == WalkVariant::kGeneral16_8;
      double lhs = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(c[j])) continue;
        lhs += general ? std::exp(-c[j] * c[j] / 16.0)
                       : 2.0 * norm_cdf(-c[j] / std::sqrt(wcfg.k1));
      }
      double rhs = double(ns) / (general ? 8.0 : wcfg.k2);
      rec.precondition_lhs = lhs;
      rec.precondition_rhs = rhs;
      if (lhs > rhs + 1e-12) {
        rec.skipped = true;
        rec.n_free_out = ns;
        rec.ledger_bound = kappa0 - budget_spent - 1e-6;
        rec.min_margin_after = min_margin(inst, theta);
        rec.ledger_ok = rec.min_margin_after >= rec.ledger_bound;
        tr.rounds.push_back(std::move(rec));
        tr.rounds_used = k;
        continue;
      }
    }

    ColoringResult res;
    try {
      res = partial_coloring(x_sub.data(), m, ns, c, theta_sub, wcfg,
                             Rng(cfg.walk_seed, kStreamWalk).descend(std::uint64_t(k)));
    } catch (const PdiscError& e) {
      fail_round(k, e.what());
    }

    for (std::size_t i = 0; i < ns; ++i) theta[free_idx[i]] = res.state.theta[i];

    rec.frozen = res.state.n_var_frozen;
    rec.retries_used = res.retries_used;
    rec.success = res.success;
    rec.steps = res.state.steps;
    rec.gamma_halvings = res.state.gamma_halvings;
    rec.skipped_steps = res.state.skipped_steps;
    rec.subspace_collapsed = res.state.subspace_collapsed;
    rec.min_slack = res.min_slack;

    double budget = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (std::isfinite(c[j])) budget = std::max(budget, c[j] * row_norm[j]);
    rec.budget = budget * inv_sqn;
    budget_spent += rec.budget;
    rec.min_margin_after = min_margin(inst, theta);
    rec.ledger_bound = kappa0 - budget_spent - 1e-6;
    rec.ledger_ok = rec.min_margin_after >= rec.ledger_bound;

    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < ns; ++i)
      if (!res.state.var_frozen[i]) next.push_back(free_idx[i]);
    free_idx = std::move(next);
    rec.n_free_out = free_idx.size();

    tr.rounds.push_back(std::move(rec));
    tr.rounds_used = k;
  }
  if (free_idx.empty() && tr.rounds_used < rounds) tr.early_exit = true;
  tr.theta_final = theta;

  // --- stage 3: randomized rounding + verification ----------------------
  tr.chi = randomized_round(theta, cfg.walk_seed);
  double shift = kInf;
  {
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = tr.chi[i] - theta[i];
    auto mv = margins(inst, diff);
    shift = *std::min_element(mv.begin(), mv.end());
  }
  tr.rounding_shift = shift;
  tr.report = verify_solution(inst, tr.chi, kappa);
  tr.min_margin_final = min_margin(inst, tr.chi);

  tr.wall_ms = std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t_start)
                   .count();
  return tr;
}

std::string trace_to_json(const PipelineTrace& tr) {
  nlohmann::json j;
  j["config"] = {
      {"regime", regime_name(tr.regime)}, {"kappa", tr.kappa},
      {"kappa0", tr.kappa0},              {"n", tr.n},
      {"m", tr.m},                        {"alpha", tr.alpha},
      {"instance_seed", tr.instance_seed},
      {"direction_seed", tr.direction_seed},
      {"walk_seed", tr.walk_seed},        {"delta", tr.delta},
      {"gamma", tr.gamma},                {"rounds_budget", tr.rounds_budget},
      {"c0", tr.c0},                      {"beta0", tr.beta0},
      {"ode_epsilon", tr.ode_epsilon},
  };
  j["lp"] = {
      {"objective", tr.lp_objective},
      {"tight_fraction", tr.lp_tight_fraction},
      {"min_margin_slack", tr.lp_min_margin},
      {"duality_gap", tr.lp_duality_gap},
      {"iterations", tr.lp_iterations},
  };
  j["rounds"] = nlohmann::json::array();
  for (const RoundRecord& r : tr.rounds) {
    nlohmann::json rj = {
        {"k", r.k},
        {"n_free_in", r.n_free_in},
        {"n_free_out", r.n_free_out},
        {"frozen", r.frozen},
        {"need", r.need},
        {"retries_used", r.retries_used},
        {"success", r.success},
        {"skipped", r.skipped},
        {"precondition_lhs", r.precondition_lhs},
        {"precondition_rhs", r.precondition_rhs},
        {"min_margin_after", r.min_margin_after},
        {"budget", r.budget},
        {"ledger_bound", r.ledger_bound},
        {"ledger_ok", r.ledger_ok},
        {"predicted_free_out", r.predicted_free_out},
        {"steps", r.steps},
        {"gamma_halvings", r.gamma_halvings},
        {"skipped_steps", r.skipped_steps},
        {"subspace_collapsed", r.subspace_collapsed},
        {"min_slack", r.min_slack},
    };
    if (r.c_scalar != 0.0) rj["c_scalar"] = r.c_scalar;
    if (r.beta != 0.0) rj["beta"] = r.beta;
    if (r.ode_t1 != 0.0) {
      rj["ode_t1"] = r.ode_t1;
      rj["ode_p0"] = r.ode_p0;
      rj["ode_p1"] = r.ode_p1;
    }
    j["rounds"].push_back(std::move(rj));
  }
  j["rounds_used"] = tr.rounds_used;
  j["early_exit"] = tr.early_exit;
  j["rounding_shift"] = tr.rounding_shift;
  j["result"] = {
      {"feasible", tr.report.feasible},
      {"binary", tr.report.binary},
      {"min_margin", tr.min_margin_final},
      {"margin_over_kappa", tr.report.min_margin},
      {"violated_rows", tr.report.violated_rows},
  };
  // Wall time deliberately stays out: the JSON trace is a pure function of
  // (instance seed, direction seed, walk seed) and replays byte-identically.
  // Timing lives in the CSV summary instead.
  j["theta_final"] = tr.theta_final;
  j["chi"] = tr.chi;
  return j.dump(2);
}

}  // namespace pdisc
