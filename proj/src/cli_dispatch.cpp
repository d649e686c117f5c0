#include "pdisc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pdisc/capacity.hpp"
#include "pdisc/instance.hpp"
#include "pdisc/lp_stage.hpp"
#include "pdisc/ogp.hpp"
#include "pdisc/order_params.hpp"
#include "pdisc/pipeline.hpp"
#include "pdisc/schedules.hpp"

namespace pdisc {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Error messages travel on one line so scripts can match the EPDISC: prefix.
std::string squash(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ';';
  return s;
}

// %.12g: enough digits that any value a test pins to 1e-6 survives the trip,
// short enough that tables stay readable. Deterministic for equal doubles,
// which is what the replay guarantees are about.
std::string dtos(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

// A CSV artifact: header row, data rows (RFC-4180 quoting), optional comment
// lines, then two mandatory provenance comments — the effective config as
// compact JSON and, always last, the version/seed trailer.
struct CsvDoc {
  std::string text;

  void header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) text += ',';
      text += c;
      first = false;
    }
    text += '\n';
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text += ',';
      text += csv_field(fields[i]);
    }
    text += '\n';
  }
  void comment(const std::string& line) { text += "# " + line + '\n'; }
  std::string finish(const json& effective, std::uint64_t seed) {
    comment("config=" + effective.dump());
    comment("pdisc-version=" + std::string(kPdiscVersion) +
            " seed=" + std::to_string(seed));
    return std::move(text);
  }
};

// Empty path (or "-") streams to the session's stdout.
void write_artifact(const std::string& path, const std::string& body,
                    std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PdiscError("cannot open output file '" + path + "'");
  f << body;
  f.flush();
  if (!f) throw PdiscError("short write to '" + path + "'");
}

// ---------------------------------------------------------------------------
// Config file: a flat JSON object whose keys mirror the long flags. Flags
// given on the command line win; everything else falls back to the file.

json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw PdiscError("cannot read config file '" + path + "'");
  json cfg;
  try {
    f >> cfg;
  } catch (const json::exception& e) {
    throw PdiscError("malformed config '" + path + "': " + squash(e.what()));
  }
  if (!cfg.is_object())
    throw PdiscError("malformed config '" + path +
                     "': top level must be a JSON object");
  static const char* const known[] = {
      "alpha",     "kappa",   "kappa0",    "n",       "m",
      "seed",      "seeds",   "direction_seed", "walk_seed", "delta",
      "gamma",     "regime",  "rounds",    "retries", "workers",
      "c0",        "beta0",   "ode_epsilon", "kp",    "out",
      "beta",      "eta",     "iota"};
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok)
      throw PdiscError("config key '" + it.key() + "' is not recognized");
  }
  return cfg;
}

template <typename T>
void fill(const json& cfg, const CLI::App* sub, const char* flag,
          const char* key, T& var) {
  if (sub->count(flag) > 0) return;  // explicit flag wins
  if (!cfg.contains(key)) return;
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw PdiscError(std::string("config key '") + key +
                     "' has the wrong type");
  }
}

bool given(const json& cfg, const CLI::App* sub, const char* flag,
           const char* key) {
  return sub->count(flag) > 0 || cfg.contains(key);
}

// "-3,-4,-5" or "lo:hi:step" (hi inclusive up to a 1e-9 step slack).
std::vector<double> parse_grid(const std::string& spec, const char* flag) {
  auto bad = [&](const std::string& why) -> std::vector<double> {
    throw PdiscError(std::string(flag) + ": " + why + " in '" + spec + "'");
  };
  std::vector<double> vals;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    char extra = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &extra) !=
        3)
      return bad("expected lo:hi:step");
    if (!(step > 0.0) || !(hi >= lo)) return bad("need step > 0 and hi >= lo");
    for (double v = lo; v <= hi + step * 1e-9; v += step) vals.push_back(v);
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        vals.push_back(v);
      } catch (const std::exception&) {
        return bad("'" + tok + "' is not a number");
      }
    }
    if (vals.empty()) return bad("empty grid");
  }
  return vals;
}

// ---------------------------------------------------------------------------
// Shared flag bundles.

struct InstanceOpts {
  std::int64_t n = 0;
  std::int64_t m = 0;  // 0 -> round(alpha * n)
  double alpha = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 1;
};

void add_instance_flags(CLI::App* sub, InstanceOpts& o) {
  sub->add_option("--n", o.n, "columns (variables)");
  sub->add_option("--m", o.m, "rows; default round(alpha*n)");
  sub->add_option("--alpha", o.alpha, "aspect ratio m/n");
  sub->add_option("--kappa", o.kappa, "target margin");
  sub->add_option("--seed", o.seed, "instance seed");
}

void fill_instance(const json& cfg, const CLI::App* sub, InstanceOpts& o) {
  fill(cfg, sub, "--n", "n", o.n);
  fill(cfg, sub, "--m", "m", o.m);
  fill(cfg, sub, "--alpha", "alpha", o.alpha);
  fill(cfg, sub, "--kappa", "kappa", o.kappa);
  fill(cfg, sub, "--seed", "seed", o.seed);
}

// Resolves m (and the reported alpha) once n is known.
void resolve_shape(InstanceOpts& o) {
  if (o.n <= 0) throw PdiscError("--n must be a positive integer");
  if (o.m < 0) throw PdiscError("--m must be nonnegative");
  if (o.m == 0) {
    if (!(o.alpha > 0.0))
      throw PdiscError("need --m or a positive --alpha to size the instance");
    o.m = std::llround(o.alpha * static_cast<double>(o.n));
    if (o.m <= 0)
      throw PdiscError("alpha*n rounds to zero rows; increase --alpha or --n");
  }
  if (o.alpha <= 0.0)
    o.alpha = static_cast<double>(o.m) / static_cast<double>(o.n);
}

struct PipeOpts {
  std::string regime = "zero005";
  double kappa0 = kNaN;
  double delta = 0.0;
  double gamma = 0.0;
  double c0 = 1.0;
  double beta0 = 0.1;
  double ode_epsilon = 0.05;
  std::int64_t rounds = 0;
  std::int64_t retries = 0;
  std::uint64_t direction_seed = 1;
  std::uint64_t walk_seed = 1;
};

void add_pipe_flags(CLI::App* sub, PipeOpts& p) {
  sub->add_option("--regime", p.regime,
                  "one of {neg, zero005, zero010, pos, proportional}");
  sub->add_option("--kappa0", p.kappa0, "stage-1 margin; default per regime");
  sub->add_option("--delta", p.delta, "freeze threshold; 0 = 0.05/log N");
  sub->add_option("--gamma", p.gamma, "walk step size; 0 = per-round default");
  sub->add_option("--rounds", p.rounds, "round budget; 0 = ceil(2 log N)");
  sub->add_option("--retries", p.retries,
                  "walk retries per round; 0 = ceil(10 log N_k)");
  sub->add_option("--direction-seed", p.direction_seed, "LP objective seed");
  sub->add_option("--walk-seed", p.walk_seed, "walk/rounding seed");
  sub->add_option("--c0", p.c0, "neg regime kappa0 offset scale");
  sub->add_option("--beta0", p.beta0, "proportional donation scale");
  sub->add_option("--ode-epsilon", p.ode_epsilon,
                  "success slack under the ODE forecast (zero010 tail)");
}

void fill_pipe(const json& cfg, const CLI::App* sub, PipeOpts& p) {
  fill(cfg, sub, "--regime", "regime", p.regime);
  fill(cfg, sub, "--kappa0", "kappa0", p.kappa0);
  fill(cfg, sub, "--delta", "delta", p.delta);
  fill(cfg, sub, "--gamma", "gamma", p.gamma);
  fill(cfg, sub, "--rounds", "rounds", p.rounds);
  fill(cfg, sub, "--retries", "retries", p.retries);
  fill(cfg, sub, "--direction-seed", "direction_seed", p.direction_seed);
  fill(cfg, sub, "--walk-seed", "walk_seed", p.walk_seed);
  fill(cfg, sub, "--c0", "c0", p.c0);
  fill(cfg, sub, "--beta0", "beta0", p.beta0);
  fill(cfg, sub, "--ode-epsilon", "ode_epsilon", p.ode_epsilon);
}

PipelineConfig make_pipeline_config(const PipeOpts& p) {
  if (p.rounds < 0) throw PdiscError("--rounds must be nonnegative");
  if (p.retries < 0) throw PdiscError("--retries must be nonnegative");
  PipelineConfig cfg;
  cfg.regime = regime_from_name(p.regime);
  cfg.kappa0 = p.kappa0;
  cfg.c0 = p.c0;
  cfg.beta0 = p.beta0;
  cfg.delta = p.delta;
  cfg.gamma = p.gamma;
  cfg.rounds = static_cast<int>(p.rounds);
  cfg.retries = static_cast<int>(p.retries);
  cfg.direction_seed = p.direction_seed;
  cfg.walk_seed = p.walk_seed;
  cfg.ode_epsilon = p.ode_epsilon;
  return cfg;
}

// The effective (defaults-resolved) run parameters, as echoed into artifacts.
json effective_run_config(const PipelineTrace& t, int retries) {
  return json{{"regime", regime_name(t.regime)},
              {"kappa", t.kappa},
              {"kappa0", t.kappa0},
              {"alpha", t.alpha},
              {"n", t.n},
              {"m", t.m},
              {"seed", t.instance_seed},
              {"direction_seed", t.direction_seed},
              {"walk_seed", t.walk_seed},
              {"delta", t.delta},
              {"gamma", t.gamma},
              {"rounds", t.rounds_budget},
              {"retries", retries},
              {"c0", t.c0},
              {"beta0", t.beta0},
              {"ode_epsilon", t.ode_epsilon}};
}

// ---------------------------------------------------------------------------
// gen: sample an instance and write the PDISC1 container.

void cmd_gen(const InstanceOpts& inst_in, const std::string& out_path,
             bool with_matrix) {
  InstanceOpts o = inst_in;
  resolve_shape(o);
  if (out_path.empty()) throw PdiscError("gen requires --out <path>");
  if (!std::isfinite(o.kappa)) throw PdiscError("--kappa must be finite");
  Instance inst = generate_instance(static_cast<std::size_t>(o.m),
                                    static_cast<std::size_t>(o.n), o.kappa,
                                    o.seed);
  write_instance_file(out_path, inst, with_matrix);
}

// ---------------------------------------------------------------------------
// solve: one end-to-end pipeline run. The JSON trace goes to --out (stdout
// when omitted); the one-line CSV summary goes to --summary (stdout when
// omitted). The trace carries no timing, so equal seeds give equal bytes.

void cmd_solve(const InstanceOpts& inst_in, const PipeOpts& pipe,
               const std::string& in_path, bool kappa_given,
               const std::string& out_path, const std::string& summary_path,
               std::ostream& out) {
  InstanceOpts o = inst_in;
  Instance inst;
  if (!in_path.empty()) {
    inst = read_instance_file(in_path);
    o.n = static_cast<std::int64_t>(inst.n);
    o.m = static_cast<std::int64_t>(inst.m);
    o.seed = inst.seed;
    o.alpha = static_cast<double>(inst.m) / static_cast<double>(inst.n);
    if (!kappa_given) o.kappa = inst.kappa;
  } else {
    resolve_shape(o);
    inst = generate_instance(static_cast<std::size_t>(o.m),
                             static_cast<std::size_t>(o.n), o.kappa, o.seed);
  }

  PipelineConfig cfg = make_pipeline_config(pipe);
  PipelineTrace tr = run_pipeline(inst, o.kappa, cfg);
  json effective = effective_run_config(tr, cfg.retries);

  json doc = json::parse(trace_to_json(tr));
  doc["pdisc_version"] = kPdiscVersion;
  doc["effective_config"] = effective;
  write_artifact(out_path, doc.dump(2) + "\n", out);

  CsvDoc csv;
  csv.header({"kappa", "alpha", "n", "seed", "feasible", "min_margin",
              "rounds_used", "wall_ms"});
  csv.row({dtos(tr.kappa), dtos(tr.alpha), std::to_string(tr.n),
           std::to_string(tr.instance_seed), tr.report.feasible ? "1" : "0",
           dtos(tr.min_margin_final), std::to_string(tr.rounds_used),
           dtos(tr.wall_ms)});
  write_artifact(summary_path, csv.finish(effective, tr.instance_seed), out);
}

// ---------------------------------------------------------------------------
// analyze: scalar fixed-point tables, or (with --n) one realized LP run's
// diagnostics against those predictions.

void cmd_analyze_table(const std::vector<double>& alphas,
                       const std::vector<double>& kappas, std::uint64_t seed,
                       const std::string& out_path, std::ostream& out) {
  CsvDoc csv;
  csv.header({"alpha", "kappa", "feasible", "rho", "t", "gamma", "objective",
              "tight_fraction", "atom_mass", "q05", "q25", "q50", "q75",
              "q95"});
  for (double kappa : kappas) {
    for (double alpha : alphas) {
      OrderParams op = solve_order_params(alpha, kappa);
      if (!op.feasible) {
        csv.row({dtos(alpha), dtos(kappa), "0", "", "", "", "", "", "", "",
                 "", "", "", ""});
        continue;
      }
      MarginLaw law{op.rho, kappa};
      csv.row({dtos(alpha), dtos(kappa), "1", dtos(op.rho), dtos(op.t),
               dtos(op.gamma), dtos(op.objective), dtos(op.tight_fraction),
               dtos(law.atom_mass()), dtos(law.quantile(0.05)),
               dtos(law.quantile(0.25)), dtos(law.quantile(0.50)),
               dtos(law.quantile(0.75)), dtos(law.quantile(0.95))});
    }
  }
  json effective{{"alpha", alphas}, {"kappa", kappas}, {"seed", seed}};
  write_artifact(out_path, csv.finish(effective, seed), out);
}

void cmd_analyze_lp(const InstanceOpts& inst_in, std::uint64_t direction_seed,
                    const std::string& out_path, std::ostream& out) {
  InstanceOpts o = inst_in;
  resolve_shape(o);
  Instance inst = generate_instance(static_cast<std::size_t>(o.m),
                                    static_cast<std::size_t>(o.n), o.kappa,
                                    o.seed);
  auto t0 = std::chrono::steady_clock::now();
  LPOutput lp = solve_lp(inst, o.kappa, direction_seed);
  LPDiagnostics diag = lp_diagnostics(lp, o.alpha, o.kappa);
  double wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  CsvDoc csv;
  csv.header({"m", "n", "alpha", "kappa0", "seed", "direction_seed",
              "tight_fraction", "w2", "min_margin", "objective", "wall_ms"});
  csv.row({std::to_string(o.m), std::to_string(o.n), dtos(o.alpha),
           dtos(o.kappa), std::to_string(o.seed),
           std::to_string(direction_seed), dtos(diag.tight_fraction),
           dtos(diag.w2_to_margin_law), dtos(diag.min_margin),
           dtos(lp.objective), dtos(wall_ms)});
  json effective{{"alpha", o.alpha}, {"kappa", o.kappa},   {"n", o.n},
                 {"m", o.m},         {"seed", o.seed},
                 {"direction_seed", direction_seed}};
  write_artifact(out_path, csv.finish(effective, o.seed), out);
}

// ---------------------------------------------------------------------------
// capacity: upper/lower storage bounds over a kappa grid.

void cmd_capacity(const std::vector<double>& kappas, std::uint64_t seed,
                  const std::string& out_path, std::ostream& out) {
  CsvDoc csv;
  csv.header({"kappa", "alpha_up", "alpha_low", "c_star"});
  for (double kappa : kappas) {
    CapacityReport rep = capacity_report(kappa);
    csv.row({dtos(rep.kappa), dtos(rep.alpha_up),
             rep.alpha_low ? dtos(*rep.alpha_low) : "",
             rep.c_star ? dtos(*rep.c_star) : ""});
  }
  json effective{{"kappa", kappas}, {"seed", seed}};
  write_artifact(out_path, csv.finish(effective, seed), out);
}

// ---------------------------------------------------------------------------
// schedule: desk-check a slack schedule before touching any matrix. The zero
// tables carry their own audits; neg/proportional run the four closed-form
// conditions at the given (alpha, kappa, kappa0, beta0).

json zero_table_doc(const ScalarSlackTable& table) {
  ZeroScheduleAudit audit = audit_zero_table(table);
  json rounds = json::array();
  for (std::size_t i = 0; i < audit.inequality_round.size(); ++i)
    rounds.push_back(json{{"k", audit.inequality_round[i]},
                          {"lhs", audit.inequality_lhs[i]},
                          {"rhs", audit.inequality_rhs[i]}});
  json doc{{"variant", table.name},
           {"kappa0", table.kappa0},
           {"constants", json{{"k1", table.k1},
                              {"k2", table.k2},
                              {"k3", table.k3}}},
           {"alpha_max", table.alpha_max},
           {"r_tight", table.r_tight},
           {"alpha0", table.alpha0},
           {"r0", table.r0},
           {"c", table.c},
           {"audit", json{{"alpha", audit.alpha},
                          {"drift", audit.drift},
                          {"inequalities_ok", audit.inequalities_ok},
                          {"rounds", std::move(rounds)}}}};
  if (!table.p1.empty()) {
    json preds = json::array();
    for (const OdePredictionAudit& a :
         audit_zero_010_predictions(static_cast<int>(table.p1.size()))) {
      preds.push_back(json{{"k", a.k},
                           {"alpha_k", a.alpha_k},
                           {"r0_k", a.r0_k},
                           {"p0_computed", a.p0_computed},
                           {"p1_computed", a.p1_computed},
                           {"p0_table", a.p0_table},
                           {"p1_table", a.p1_table}});
    }
    doc["prediction_audit"] = std::move(preds);
  }
  return doc;
}

void cmd_schedule(const std::string& regime_name_in, double alpha,
                  double kappa, double kappa0, double c0, double beta0,
                  std::int64_t rounds, std::int64_t kp,
                  const std::string& out_path, std::ostream& out) {
  Regime regime = regime_from_name(regime_name_in);
  json doc;
  json effective{{"regime", regime_name_in}};
  switch (regime) {
    case Regime::kZero005:
      doc = zero_table_doc(zero_margin_table_005());
      break;
    case Regime::kZero010:
      doc = zero_table_doc(zero_margin_table_010());
      break;
    case Regime::kPos:
      throw PdiscError(
          "the pos regime sizes its slack from the realized free set each "
          "round; there is no standalone schedule to verify");
    case Regime::kNeg:
    case Regime::kProportional: {
      if (!(alpha > 0.0)) throw PdiscError("--alpha must be positive");
      if (rounds <= 0) throw PdiscError("--rounds must be positive");
      if (regime == Regime::kNeg) {
        if (!(kappa < 0.0))
          throw PdiscError("neg regime needs kappa < 0");
        if (std::isnan(kappa0)) kappa0 = kappa + c0 / std::fabs(kappa);
      }
      if (std::isnan(kappa0))
        throw PdiscError("proportional schedule needs --kappa0");
      if (!(kappa0 > kappa))
        throw PdiscError("kappa0 must exceed kappa");
      std::vector<double> betas =
          geometric_betas(beta0, static_cast<int>(rounds));
      int k_p = kp > 0 ? static_cast<int>(kp) : default_kp(kappa);
      ProportionalCheck check = verify_proportional_conditions(
          alpha, kappa, kappa0, betas, k_p, static_cast<int>(rounds));
      json conditions = json::array();
      for (int c = 0; c < 4; ++c) {
        double wm = check.worst_margins[c];
        // +inf = condition quantifies over an empty range (trivially met),
        // NaN = not evaluable; JSON numbers carry neither, so spell them out.
        json margin = std::isfinite(wm) ? json(wm) : json(dtos(wm));
        conditions.push_back(json{{"worst_margin", std::move(margin)},
                                  {"worst_round", check.worst_round[c]}});
      }
      doc = json{{"variant", "proportional"},
                 {"alpha", alpha},
                 {"kappa", kappa},
                 {"kappa0", kappa0},
                 {"beta0", beta0},
                 {"betas", betas},
                 {"k_p", k_p},
                 {"rounds", rounds},
                 {"ok", check.ok},
                 {"conditions", std::move(conditions)}};
      effective = json{{"regime", regime_name_in}, {"alpha", alpha},
                       {"kappa", kappa},           {"kappa0", kappa0},
                       {"beta0", beta0},           {"rounds", rounds},
                       {"kp", k_p}};
      break;
    }
  }
  doc["pdisc_version"] = kPdiscVersion;
  doc["effective_config"] = effective;
  write_artifact(out_path, doc.dump(2) + "\n", out);
}

// ---------------------------------------------------------------------------
// ogp: first-moment exponent over a (kappa, alpha) grid at fixed window.

void cmd_ogp(const std::vector<double>& kappas,
             const std::vector<double>& alphas, std::int64_t m, double beta,
             double eta, double iota, std::uint64_t seed,
             const std::string& out_path, std::ostream& out) {
  if (m < 1) throw PdiscError("--m must be >= 1 replicas");
  CsvDoc csv;
  csv.header({"kappa", "alpha", "m", "beta", "eta", "iota", "exponent"});
  for (double kappa : kappas) {
    for (double alpha : alphas) {
      OgpQuery q;
      q.m = static_cast<int>(m);
      q.beta = beta;
      q.eta = eta;
      q.alpha = alpha;
      q.kappa = kappa;
      q.iota = iota;
      csv.row({dtos(kappa), dtos(alpha), std::to_string(m), dtos(beta),
               dtos(eta), dtos(iota), dtos(ogp_exponent(q))});
    }
  }
  json effective{{"kappa", kappas}, {"alpha", alphas}, {"m", m},
                 {"beta", beta},    {"eta", eta},      {"iota", iota},
                 {"seed", seed}};
  write_artifact(out_path, csv.finish(effective, seed), out);
}

// ---------------------------------------------------------------------------
// sweep: solve fanned out over seeds (and optionally an alpha grid) on a
// bounded worker pool. Rows come back in task order — alpha-major, seed-minor
// — regardless of thread scheduling, so the merge is deterministic. A task
// whose LP is infeasible (or whose schedule precondition fails) is a recorded
// outcome, not a command failure.

struct SweepRow {
  double kappa = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool feasible = false;
  double min_margin = kNaN;
  int rounds_used = 0;
  double wall_ms = 0.0;
  std::string error;
};

void cmd_sweep(const InstanceOpts& inst_in, const PipeOpts& pipe,
               const std::vector<double>& alphas, std::int64_t seeds,
               std::int64_t workers, bool dir_seed_fixed, bool walk_seed_fixed,
               const std::string& out_path, std::ostream& out) {
  InstanceOpts base = inst_in;
  if (base.n <= 0) throw PdiscError("--n must be a positive integer");
  if (seeds <= 0) throw PdiscError("--seeds must be a positive count");
  if (workers <= 0) throw PdiscError("--workers must be positive");
  PipelineConfig cfg_template = make_pipeline_config(pipe);

  struct Task {
    double alpha = 0.0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
  };
  std::vector<double> group_alphas;  // resolved, one per alpha grid point
  std::vector<Task> tasks;
  for (double alpha : alphas) {
    InstanceOpts o = base;
    o.alpha = alpha;
    if (alphas.size() > 1) o.m = 0;  // per-alpha shape, ignore a fixed --m
    resolve_shape(o);
    group_alphas.push_back(o.alpha);
    for (std::int64_t s = 0; s < seeds; ++s)
      tasks.push_back(Task{o.alpha, static_cast<std::size_t>(o.m),
                           base.seed + static_cast<std::uint64_t>(s)});
  }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::string internal_error;
  std::mutex internal_mu;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      SweepRow& row = rows[i];
      row.kappa = base.kappa;
      row.alpha = t.alpha;
      row.n = static_cast<std::size_t>(base.n);
      row.seed = t.seed;
      auto t0 = std::chrono::steady_clock::now();
      try {
        // Unless pinned by flag/config, the companion seeds follow the
        // instance seed so each row replays as
        //   solve --seed s --direction-seed s --walk-seed s ...
        PipelineConfig cfg = cfg_template;
        if (!dir_seed_fixed) cfg.direction_seed = t.seed;
        if (!walk_seed_fixed) cfg.walk_seed = t.seed;
        Instance inst = generate_instance(
            t.m, static_cast<std::size_t>(base.n), base.kappa, t.seed);
        PipelineTrace tr = run_pipeline(inst, base.kappa, cfg);
        row.feasible = tr.report.feasible;
        row.min_margin = tr.min_margin_final;
        row.rounds_used = tr.rounds_used;
        row.wall_ms = tr.wall_ms;
      } catch (const PdiscError& e) {
        row.error = squash(e.what());
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(internal_mu);
        if (internal_error.empty()) internal_error = e.what();
        return;
      }
    }
  };

  std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                           tasks.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w + 1 < pool; ++w) threads.emplace_back(worker);
  worker();  // this thread works too; pool == workers total
  for (auto& th : threads) th.join();
  if (!internal_error.empty()) throw std::runtime_error(internal_error);

  CsvDoc csv;
  csv.header({"kappa", "alpha", "n", "seed", "feasible", "min_margin",
              "rounds_used", "wall_ms", "error"});
  for (const SweepRow& r : rows)
    csv.row({dtos(r.kappa), dtos(r.alpha), std::to_string(r.n),
             std::to_string(r.seed), r.feasible ? "1" : "0",
             dtos(r.min_margin), std::to_string(r.rounds_used),
             dtos(r.wall_ms), r.error});
  // Aggregate success counts per alpha, in row order.
  std::size_t i = 0;
  for (double alpha : group_alphas) {
    std::size_t ok = 0;
    for (std::int64_t s = 0; s < seeds; ++s, ++i) ok += rows[i].feasible;
    csv.comment("aggregate alpha=" + dtos(alpha) + " feasible=" +
                std::to_string(ok) + "/" + std::to_string(seeds));
  }
  json effective{{"regime", pipe.regime},
                 {"kappa", base.kappa},
                 {"alpha", group_alphas},
                 {"n", base.n},
                 {"seed", base.seed},
                 {"seeds", seeds},
                 {"workers", workers},
                 {"direction_seed",
                  dir_seed_fixed ? json(pipe.direction_seed) : json("per-seed")},
                 {"walk_seed",
                  walk_seed_fixed ? json(pipe.walk_seed) : json("per-seed")},
                 {"rounds", pipe.rounds},
                 {"retries", pipe.retries},
                 {"delta", pipe.delta},
                 {"gamma", pipe.gamma}};
  if (!std::isnan(pipe.kappa0)) effective["kappa0"] = pipe.kappa0;
  write_artifact(out_path, csv.finish(effective, base.seed), out);
}

}  // namespace

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"two-stage binary perceptron solver and analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kPdiscVersion);

  // Every subcommand accepts --config (JSON object of long-flag keys) and
  // --out. Callbacks run after the whole parse, so flag counts are final.
  json cfg;  // loaded per subcommand below

  // --- gen ---------------------------------------------------------------
  InstanceOpts gen_inst;
  std::string gen_out, gen_config;
  bool gen_matrix = false;
  CLI::App* gen = app.add_subcommand("gen", "sample an instance to a file");
  add_instance_flags(gen, gen_inst);
  gen->add_option("--out", gen_out, "PDISC1 output path (required)");
  gen->add_option("--config", gen_config, "JSON config file");
  gen->add_flag("--matrix", gen_matrix,
                "embed the matrix payload (default: header only)");
  gen->callback([&] {
    cfg = gen_config.empty() ? json::object() : load_config_file(gen_config);
    fill_instance(cfg, gen, gen_inst);
    fill(cfg, gen, "--out", "out", gen_out);
    cmd_gen(gen_inst, gen_out, gen_matrix);
  });

  // --- solve ---------------------------------------------------------------
  InstanceOpts solve_inst;
  PipeOpts solve_pipe;
  std::string solve_in, solve_out, solve_summary, solve_config;
  CLI::App* solve = app.add_subcommand("solve", "run the two-stage pipeline");
  add_instance_flags(solve, solve_inst);
  add_pipe_flags(solve, solve_pipe);
  solve->add_option("--in", solve_in, "read a PDISC1 instance instead of sampling");
  solve->add_option("--out", solve_out, "JSON trace path (default: stdout)");
  solve->add_option("--summary", solve_summary,
                    "CSV summary path (default: stdout)");
  solve->add_option("--config", solve_config, "JSON config file");
  solve->callback([&] {
    cfg = solve_config.empty() ? json::object()
                               : load_config_file(solve_config);
    fill_instance(cfg, solve, solve_inst);
    fill_pipe(cfg, solve, solve_pipe);
    fill(cfg, solve, "--out", "out", solve_out);
    bool kappa_given = given(cfg, solve, "--kappa", "kappa");
    cmd_solve(solve_inst, solve_pipe, solve_in, kappa_given, solve_out,
              solve_summary, out);
  });

  // --- analyze -------------------------------------------------------------
  InstanceOpts an_inst;
  an_inst.kappa = kNaN;  // required, directly or via grid
  std::string an_alpha_grid, an_kappa_grid, an_out, an_config;
  std::uint64_t an_direction_seed = 1;
  CLI::App* analyze = app.add_subcommand(
      "analyze",
      "fixed-point tables (rho, t, tight fraction, margin-law quantiles); "
      "with --n, one realized LP run's diagnostics");
  add_instance_flags(analyze, an_inst);
  analyze->add_option("--direction-seed", an_direction_seed,
                      "LP objective seed (with --n)");
  analyze->add_option("--alpha-grid", an_alpha_grid,
                      "alpha grid: lo:hi:step or v1,v2,...");
  analyze->add_option("--kappa-grid", an_kappa_grid,
                      "kappa grid: lo:hi:step or v1,v2,...");
  analyze->add_option("--out", an_out, "CSV path (default: stdout)");
  analyze->add_option("--config", an_config, "JSON config file");
  analyze->callback([&] {
    cfg = an_config.empty() ? json::object() : load_config_file(an_config);
    fill_instance(cfg, analyze, an_inst);
    fill(cfg, analyze, "--direction-seed", "direction_seed",
         an_direction_seed);
    fill(cfg, analyze, "--out", "out", an_out);
    if (an_inst.n > 0) {
      if (std::isnan(an_inst.kappa))
        throw PdiscError("analyze --n needs --kappa (the stage-1 margin)");
      cmd_analyze_lp(an_inst, an_direction_seed, an_out, out);
      return;
    }
    std::vector<double> alphas =
        an_alpha_grid.empty()
            ? std::vector<double>{an_inst.alpha}
            : parse_grid(an_alpha_grid, "--alpha-grid");
    std::vector<double> kappas =
        an_kappa_grid.empty()
            ? std::vector<double>{an_inst.kappa}
            : parse_grid(an_kappa_grid, "--kappa-grid");
    if (alphas.size() == 1 && !(alphas[0] > 0.0))
      throw PdiscError("analyze needs --alpha > 0 or --alpha-grid");
    if (kappas.size() == 1 && std::isnan(kappas[0]))
      throw PdiscError("analyze needs --kappa or --kappa-grid");
    cmd_analyze_table(alphas, kappas, an_inst.seed, an_out, out);
  });

  // --- capacity ------------------------------------------------------------
  double cap_kappa = kNaN;
  std::string cap_grid, cap_out, cap_config;
  std::uint64_t cap_seed = 1;
  CLI::App* capacity =
      app.add_subcommand("capacity", "storage bounds over a kappa grid");
  capacity->add_option("--kappa", cap_kappa, "single kappa");
  capacity->add_option("--kappa-grid", cap_grid,
                       "kappa grid: lo:hi:step or v1,v2,...");
  capacity->add_option("--seed", cap_seed, "echoed into provenance");
  capacity->add_option("--out", cap_out, "CSV path (default: stdout)");
  capacity->add_option("--config", cap_config, "JSON config file");
  capacity->callback([&] {
    cfg = cap_config.empty() ? json::object() : load_config_file(cap_config);
    fill(cfg, capacity, "--kappa", "kappa", cap_kappa);
    fill(cfg, capacity, "--seed", "seed", cap_seed);
    fill(cfg, capacity, "--out", "out", cap_out);
    std::vector<double> kappas =
        cap_grid.empty() ? std::vector<double>{cap_kappa}
                         : parse_grid(cap_grid, "--kappa-grid");
    if (kappas.size() == 1 && std::isnan(kappas[0]))
      throw PdiscError("capacity needs --kappa or --kappa-grid");
    cmd_capacity(kappas, cap_seed, cap_out, out);
  });

  // --- schedule ------------------------------------------------------------
  std::string sch_regime, sch_out, sch_config;
  double sch_alpha = 0.0, sch_kappa = 0.0, sch_kappa0 = kNaN, sch_c0 = 1.0,
         sch_beta0 = 0.1;
  std::int64_t sch_rounds = 40, sch_kp = 0;
  CLI::App* schedule =
      app.add_subcommand("schedule", "desk-check a slack schedule");
  schedule->add_option("--regime", sch_regime,
                       "one of {neg, zero005, zero010, proportional}")
      ->required();
  schedule->add_option("--alpha", sch_alpha, "aspect ratio (proportional/neg)");
  schedule->add_option("--kappa", sch_kappa, "target margin");
  schedule->add_option("--kappa0", sch_kappa0, "stage-1 margin");
  schedule->add_option("--c0", sch_c0, "neg regime kappa0 offset scale");
  schedule->add_option("--beta0", sch_beta0, "proportional donation scale");
  schedule->add_option("--rounds", sch_rounds, "round budget to certify");
  schedule->add_option("--kp", sch_kp,
                       "early-round count; 0 = ceil(10 log log |kappa|)");
  schedule->add_option("--out", sch_out, "JSON path (default: stdout)");
  schedule->add_option("--config", sch_config, "JSON config file");
  schedule->callback([&] {
    cfg = sch_config.empty() ? json::object() : load_config_file(sch_config);
    fill(cfg, schedule, "--regime", "regime", sch_regime);
    fill(cfg, schedule, "--alpha", "alpha", sch_alpha);
    fill(cfg, schedule, "--kappa", "kappa", sch_kappa);
    fill(cfg, schedule, "--kappa0", "kappa0", sch_kappa0);
    fill(cfg, schedule, "--c0", "c0", sch_c0);
    fill(cfg, schedule, "--beta0", "beta0", sch_beta0);
    fill(cfg, schedule, "--rounds", "rounds", sch_rounds);
    fill(cfg, schedule, "--kp", "kp", sch_kp);
    fill(cfg, schedule, "--out", "out", sch_out);
    cmd_schedule(sch_regime, sch_alpha, sch_kappa, sch_kappa0, sch_c0,
                 sch_beta0, sch_rounds, sch_kp, sch_out, out);
  });

  // --- ogp -----------------------------------------------------------------
  double ogp_kappa = kNaN, ogp_alpha = kNaN, ogp_beta = 0.0, ogp_eta = 0.0,
         ogp_iota = 0.0;
  std::int64_t ogp_m = 1;
  std::uint64_t ogp_seed = 1;
  std::string ogp_kappa_grid, ogp_alpha_grid, ogp_out, ogp_config;
  CLI::App* ogp = app.add_subcommand(
      "ogp", "first-moment cluster exponent over a (kappa, alpha) grid");
  ogp->add_option("--kappa", ogp_kappa, "margin");
  ogp->add_option("--kappa-grid", ogp_kappa_grid,
                  "kappa grid: lo:hi:step or v1,v2,...");
  ogp->add_option("--alpha", ogp_alpha, "constraint density");
  ogp->add_option("--alpha-grid", ogp_alpha_grid,
                  "alpha grid: lo:hi:step or v1,v2,...");
  ogp->add_option("--m", ogp_m, "replica count (default 1)");
  ogp->add_option("--beta", ogp_beta, "overlap window upper edge (m > 1)");
  ogp->add_option("--eta", ogp_eta, "overlap window width (m > 1)");
  ogp->add_option("--iota", ogp_iota, "index-set entropy budget");
  ogp->add_option("--seed", ogp_seed, "echoed into provenance");
  ogp->add_option("--out", ogp_out, "CSV path (default: stdout)");
  ogp->add_option("--config", ogp_config, "JSON config file");
  ogp->callback([&] {
    cfg = ogp_config.empty() ? json::object() : load_config_file(ogp_config);
    fill(cfg, ogp, "--kappa", "kappa", ogp_kappa);
    fill(cfg, ogp, "--alpha", "alpha", ogp_alpha);
    fill(cfg, ogp, "--m", "m", ogp_m);
    fill(cfg, ogp, "--beta", "beta", ogp_beta);
    fill(cfg, ogp, "--eta", "eta", ogp_eta);
    fill(cfg, ogp, "--iota", "iota", ogp_iota);
    fill(cfg, ogp, "--seed", "seed", ogp_seed);
    fill(cfg, ogp, "--out", "out", ogp_out);
    std::vector<double> kappas =
        ogp_kappa_grid.empty() ? std::vector<double>{ogp_kappa}
                               : parse_grid(ogp_kappa_grid, "--kappa-grid");
    std::vector<double> alphas =
        ogp_alpha_grid.empty() ? std::vector<double>{ogp_alpha}
                               : parse_grid(ogp_alpha_grid, "--alpha-grid");
    if (kappas.size() == 1 && std::isnan(kappas[0]))
      throw PdiscError("ogp needs --kappa or --kappa-grid");
    if (alphas.size() == 1 && std::isnan(alphas[0]))
      throw PdiscError("ogp needs --alpha or --alpha-grid");
    cmd_ogp(kappas, alphas, ogp_m, ogp_beta, ogp_eta, ogp_iota, ogp_seed,
            ogp_out, out);
  });

  // --- sweep -----------------------------------------------------------
  InstanceOpts sw_inst;
  PipeOpts sw_pipe;
  std::string sw_alpha_grid, sw_out, sw_config;
  std::int64_t sw_seeds = 10, sw_workers = 1;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "solve across seeds (and an alpha grid) on a worker pool");
  add_instance_flags(sweep, sw_inst);
  add_pipe_flags(sweep, sw_pipe);
  sweep->add_option("--seeds", sw_seeds, "number of seeds, starting at --seed");
  sweep->add_option("--workers", sw_workers, "worker pool size");
  sweep->add_option("--alpha-grid", sw_alpha_grid,
                    "alpha grid: lo:hi:step or v1,v2,...");
  sweep->add_option("--out", sw_out, "CSV path (default: stdout)");
  sweep->add_option("--config", sw_config, "JSON config file");
  sweep->callback([&] {
    cfg = sw_config.empty() ? json::object() : load_config_file(sw_config);
    fill_instance(cfg, sweep, sw_inst);
    fill_pipe(cfg, sweep, sw_pipe);
    fill(cfg, sweep, "--seeds", "seeds", sw_seeds);
    fill(cfg, sweep, "--workers", "workers", sw_workers);
    fill(cfg, sweep, "--out", "out", sw_out);
    std::vector<double> alphas =
        sw_alpha_grid.empty() ? std::vector<double>{sw_inst.alpha}
                              : parse_grid(sw_alpha_grid, "--alpha-grid");
    bool dir_fixed = given(cfg, sweep, "--direction-seed", "direction_seed");
    bool walk_fixed = given(cfg, sweep, "--walk-seed", "walk_seed");
    cmd_sweep(sw_inst, sw_pipe, alphas, sw_seeds, sw_workers, dir_fixed,
              walk_fixed, sw_out, out);
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kPdiscVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "EPDISC: " << squash(e.what()) << "\n";
    return 2;
  } catch (const PdiscError& e) {
    err << "EPDISC: " << squash(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "EPDISC: internal: " << squash(e.what()) << "\n";
    return 1;
  }
}

}  // namespace pdisc
