#pragma once

// The two-stage solver, end to end: margin LP at a raised target kappa0,
// then up to ceil(2 log N) rounds of the constrained walk on the surviving
// free columns (each round giving back a scheduled sliver of margin), then
// randomized rounding to {-1,+1} and verification against kappa.
//
// Five regimes pick the kappa0 / slack-schedule / walk-variant combination:
//   neg          kappa < 0,  kappa0 = kappa + c0/|kappa|, proportional slack
//   zero005      kappa = 0,  kappa0 = 3.42, scalar table, zero-margin walk
//   zero010      kappa = 0,  kappa0 = 2.31, scalar table + per-round ODE walk
//   pos          kappa > 0,  kappa0 = kappa + 1, proportional slack
//   proportional explicit kappa0, proportional slack (the generic certified
//                schedule; neg/pos are its asymptotic presets)
//
// A run is a pure function of (instance seed, direction seed, walk seed):
// traces replay bit-exactly.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pdisc/instance.hpp"

namespace pdisc {

enum class Regime { kNeg, kZero005, kZero010, kPos, kProportional };

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);  // PdiscError on unknown

struct PipelineConfig {
  Regime regime = Regime::kZero005;
  // NaN -> the regime's default (see table above).
  double kappa0 = std::numeric_limits<double>::quiet_NaN();
  double c0 = 1.0;     // neg regime: kappa0 = kappa + c0/|kappa|
  double beta0 = 0.1;  // proportional generator scale, beta_k = beta0 2^{-k/4}
  double delta = 0.0;  // freeze threshold; 0 -> 0.05/log N
  double gamma = 0.0;  // step size; 0 -> delta/sqrt(log N_k) per round
  int rounds = 0;      // 0 -> ceil(2 log N)
  int retries = 0;     // per-round walk retries; 0 -> ceil(10 log N_k)
  std::uint64_t direction_seed = 1;
  std::uint64_t walk_seed = 1;
  // ODE-driven rounds succeed at the table's certified p1 fraction; when a
  // round has no table entry the ODE forecast minus this slack is the bar.
  double ode_epsilon = 0.05;
};

struct RoundRecord {
  int k = 0;
  std::size_t n_free_in = 0;   // |I_{k-1}|
  std::size_t n_free_out = 0;  // |I_k|
  std::size_t frozen = 0;      // columns frozen by the round's best attempt
  std::size_t need = 0;        // the variant's success threshold
  int retries_used = 0;
  bool success = false;        // false = retries exhausted, best attempt kept
  // A round whose slack vector cannot meet the walk's row-mass precondition
  // is recorded and skipped (no walk, no margin spent); later rounds carry
  // larger slacks and usually clear it. The offending sums are kept here.
  bool skipped = false;
  double precondition_lhs = 0.0, precondition_rhs = 0.0;
  double c_scalar = 0.0;       // table regimes
  double beta = 0.0;           // proportional regimes
  double ode_t1 = 0.0, ode_p0 = 0.0, ode_p1 = 0.0;  // zero010 realized params
  double min_margin_after = 0.0;  // min_j <theta^(k), X_j>/sqrt(N)
  double budget = 0.0;         // max_j c_j ||(X_j)_I|| / sqrt(N) this round
  double ledger_bound = 0.0;   // kappa0 - sum of budgets so far - 1e-6
  bool ledger_ok = false;      // min_margin_after >= ledger_bound
  double predicted_free_out = 0.0;  // schedule's forecast of |I_k|
  long steps = 0;
  int gamma_halvings = 0;
  int skipped_steps = 0;
  bool subspace_collapsed = false;
  double min_slack = 0.0;      // distance to the nearest slack barrier
};

struct PipelineTrace {
  // Effective configuration (defaults resolved), echoed for provenance.
  Regime regime = Regime::kZero005;
  double kappa = 0.0;
  double kappa0 = 0.0;
  double alpha = 0.0;
  std::size_t n = 0, m = 0;
  std::uint64_t instance_seed = 0, direction_seed = 0, walk_seed = 0;
  double delta = 0.0;
  double gamma = 0.0;  // 0 = per-round default
  int rounds_budget = 0;
  double c0 = 0.0, beta0 = 0.0, ode_epsilon = 0.0;

  // Stage 1.
  double lp_objective = 0.0;
  double lp_tight_fraction = 0.0;
  double lp_min_margin = 0.0;  // min_i <X_i, theta_hat>/sqrt(N) - kappa0
  double lp_duality_gap = 0.0;
  int lp_iterations = 0;

  // Stage 2.
  std::vector<RoundRecord> rounds;
  int rounds_used = 0;
  bool early_exit = false;  // free set emptied before the round budget
  std::vector<double> theta_final;

  // Stage 3.
  std::vector<double> chi;
  double rounding_shift = 0.0;  // min_j <chi - theta^(K), X_j>/sqrt(N)
  SolutionReport report;
  double min_margin_final = 0.0;  // min_j <chi, X_j>/sqrt(N)
  double wall_ms = 0.0;
};

// chi_i = sign(theta_i) with probability (1+|theta_i|)/2, else -sign;
// sign(0) = +1. Entries more than 1e-10 outside [-1,1] raise PdiscError.
// Deterministic in the seed (dedicated rounding stream).
std::vector<double> randomized_round(const std::vector<double>& theta,
                                     std::uint64_t seed);

// Runs the full pipeline. Throws PdiscError for user/data-level failures
// (LP infeasible, schedule preconditions violated, regime not desk-feasible),
// always tagged with the round index where applicable. A round that exhausts
// its retries is NOT an error: the best attempt is kept, the failure is
// recorded in its RoundRecord, and the run continues.
PipelineTrace run_pipeline(const Instance& inst, double kappa,
                           const PipelineConfig& cfg);

// Full trace as JSON (round records, config echo, verification report).
std::string trace_to_json(const PipelineTrace& trace);

}  // namespace pdisc
