#include "htp/runner.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "htp/event_dsl.hpp"
#include "htp/green_exit.hpp"
#include "htp/ladder_renewal.hpp"
#include "htp/mc_engine.hpp"
#include "htp/potential_kernel.hpp"
#include "htp/reports.hpp"
#include "htp/suites.hpp"
#include "htp/tail_functionals.hpp"

namespace htp {

namespace {

using ojson = nlohmann::ordered_json;

struct Context {
  const ExperimentConfig& cfg;
  std::shared_ptr<const StepLaw> law;
  std::string header;
  RunOutcome out;

  std::string path(const std::string& fallback) const { return cfg.output.empty() ? fallback : cfg.output; }
  void write(const std::string& p, const std::string& body) {
    write_artifact(p, header, body);
    out.artifacts.push_back(p);
  }
  void write_json(const std::string& p, ojson body) {
    ojson j;
    j["header"] = header.substr(2);
    for (auto& [k, v] : body.items()) j[k] = v;
    write_artifact(p, "", j.dump(2) + "\n");
    out.artifacts.push_back(p);
  }
};

std::int64_t int_param(const ExperimentConfig& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.param(key);
  if (v.empty()) return fallback;
  const auto g = parse_int_grid(v);
  if (g.size() != 1) throw ConfigError("expected one integer for " + key);
  return g[0];
}

bool has(const ExperimentConfig& c, const std::string& key) { return !c.param(key).empty(); }

double kernel_tol(const ExperimentConfig& c) {
  auto it = c.tolerance.find("abs");
  return it == c.tolerance.end() ? -1.0 : parse_real_grid(it->second).at(0);
}

std::string g6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void task_potential(Context& ctx) {
  const auto xs = parse_int_grid(ctx.cfg.param("x_grid"));
  if (xs.empty()) throw ConfigError("potential: empty x-grid");
  const std::string method = ctx.cfg.param("method", "fourier");
  PotentialTable t;
  if (method == "fourier") {
    t = build_table(ctx.law, xs, kernel_tol(ctx.cfg));
  } else if (method == "series_oracle") {
    SeriesOracle o(ctx.law);
    t.law = ctx.law;
    t.method = PkMethod::series_oracle;
    for (auto x : xs) {
      const auto r = o.eval(x, {});
      t.x.push_back(x);
      t.a.push_back(r.value);
      t.abar.push_back(NAN);
      t.b_plus.push_back(NAN);
      t.b_minus.push_back(NAN);
      t.err.push_back(r.err);
    }
    t.reindex();
  } else {
    throw ConfigError("potential: unknown method " + method);
  }
  double emax = 0;
  for (double e : t.err) emax = std::max(emax, e);
  const auto p = ctx.path("potential.csv");
  ctx.write(p, table_csv(t));
  ctx.out.summary = "potential: " + std::to_string(xs.size()) + " points on " + ctx.law->name() + " (" + method +
                    "), max err " + g6(emax) + " -> " + p;
}

void task_functionals(Context& ctx) {
  std::vector<double> xs;
  for (auto x : parse_int_grid(ctx.cfg.param("x_grid"))) xs.push_back(double(x));
  const auto ts = parse_real_grid(ctx.cfg.param("t_grid"));
  if (xs.empty() && ts.empty()) throw ConfigError("functionals: empty x-grid and t-grid");
  const double eps = has(ctx.cfg, "eps") ? parse_real_grid(ctx.cfg.param("eps")).at(0) : 1.0;
  FunctionalProfile prof(ctx.law, xs, ts);
  const auto p = ctx.path("functionals.csv");
  std::string body;
  if (!xs.empty()) {
    std::vector<BasicRecord> rows;
    for (double x : xs) {
      if (!(x > 0)) throw ConfigError("functionals: x must be positive");
      rows.push_back(prof.basic(x, eps));
    }
    body += basic_csv(rows);
  }
  if (!ts.empty()) {
    std::vector<FreqRecord> rows;
    for (double t : ts) rows.push_back(prof.freq(t));
    if (!body.empty()) body += "\n";
    body += freq_csv(rows);
  }
  ctx.write(p, body);
  ctx.out.summary = "functionals: " + std::to_string(xs.size()) + " x and " + std::to_string(ts.size()) +
                    " t points on " + ctx.law->name() + " -> " + p;
}

void task_conditions(Context& ctx) {
  const double x_max = has(ctx.cfg, "x_max") ? double(int_param(ctx.cfg, "x_max", 0)) : 16777216.0;
  const auto rep = check_conditions(*ctx.law, x_max);
  ojson j;
  j["law"] = ctx.law->name();
  j["delta_h"] = rep.delta_h;
  j["c_over_m_min"] = rep.c_over_m_min;
  j["c_over_m_max"] = rep.c_over_m_max;
  j["conditions"] = ojson::array();
  std::string line;
  for (const auto& e : rep.entries) {
    j["conditions"].push_back(
        {{"name", e.name}, {"verdict", verdict_name(e.verdict)}, {"proxy", e.proxy}, {"threshold", e.threshold}});
    line += " " + e.name + "=" + verdict_name(e.verdict);
  }
  const auto p = ctx.path("conditions.json");
  ctx.write_json(p, j);
  ctx.out.summary = "conditions on " + ctx.law->name() + ":" + line + ", c/m in [" + g6(rep.c_over_m_min) + ", " +
                    g6(rep.c_over_m_max) + "] -> " + p;
}

void task_exit(Context& ctx) {
  const auto& c = ctx.cfg;
  if (!has(c, "x")) throw ConfigError("exit-prob: x is required");
  const std::int64_t x = int_param(c, "x", 0);
  const std::uint64_t replicas = static_cast<std::uint64_t>(int_param(c, "replicas", 0));
  HittingModel m(ctx.law);
  ExitReport rep;
  rep.law = ctx.law->name();
  RaceSpec race;
  race.start = x;
  if (has(c, "y")) {
    const auto y = int_param(c, "y", 0);
    rep.query = "P[sigma_" + std::to_string(y) + " < sigma_0] from " + std::to_string(x);
    rep.exact = hit_before_zero(m, x, y).value;
    race.first = StopCondition::hit(y);
  } else if (has(c, "R") && has(c, "Q")) {
    const auto Q = int_param(c, "Q", 0), R = int_param(c, "R", 0);
    if (Q <= 0 || R <= 0 || x <= -Q || x >= R) throw ConfigError("exit-prob: need -Q < x < R with Q, R > 0");
    rep.query = "P[exit (-" + std::to_string(Q) + "," + std::to_string(R) + ") before 0] from " + std::to_string(x);
    if (x != 0 && Q + R <= 4097) rep.exact = interval_escape(*ctx.law, x, Q, R).value;
    rep.predictor = exit_predictors(m, x, Q, R).get("two_sided").value;
    race.first = StopCondition::exit(-Q, R);
  } else if (has(c, "R")) {
    const auto R = int_param(c, "R", 0);
    if (R <= 0 || x >= R) throw ConfigError("exit-prob: need x < R with R > 0");
    rep.query = "P[sigma_[" + std::to_string(R) + ",inf) < sigma_0] from " + std::to_string(x);
    rep.predictor = exit_predictors(m, x, R, R).get("one_sided").value;
    race.first = StopCondition::up(R);
  } else {
    throw ConfigError("exit-prob: give y, or R, or Q and R");
  }
  race.second = StopCondition::hit(0);
  if (has(c, "budget")) race.step_budget = static_cast<std::uint64_t>(int_param(c, "budget", 0));
  std::string mc;
  if (replicas > 0) {
    const auto e = estimate_event(*ctx.law, race, replicas, c.seed);
    const auto r = mc_report(*ctx.law, e, rep.exact ? rep.exact : rep.predictor);
    rep.mc_estimate = r.mc_estimate;
    rep.mc_se = r.mc_se;
    rep.verdict = r.verdict;
    if (!e.valid()) ctx.out.status = exit_flagged;
    mc = ", mc " + g6(e.estimate) + " se " + g6(e.se);
  } else {
    rep.verdict = "no simulation requested";
  }
  const auto p = ctx.path("exit.json");
  ctx.write_json(p, ojson::parse(rep.to_json()));
  ctx.out.summary = "exit-prob: " + rep.query + (rep.exact ? " exact " + g6(*rep.exact) : "") +
                    (rep.predictor ? " predictor " + g6(*rep.predictor) : "") + mc + " -> " + p;
}

void task_ladder(Context& ctx) {
  LadderOptions o;
  o.horizon = int_param(ctx.cfg, "horizon", o.horizon);
  o.mode = ladder_mode_from_name(ctx.cfg.param("mode", "exact"));
  o.replicas = static_cast<std::uint64_t>(int_param(ctx.cfg, "replicas", static_cast<std::int64_t>(o.replicas)));
  o.seed = ctx.cfg.seed;
  if (auto it = ctx.cfg.tolerance.find("ladder"); it != ctx.cfg.tolerance.end()) o.tol = parse_real_grid(it->second).at(0);
  const auto t = ladder_law(ctx.law, o);
  const auto p = ctx.path("ladder.csv");
  ctx.write(p, ladder_csv(t));
  ctx.out.summary = "ladder: " + ctx.law->name() + " horizon " + std::to_string(t.horizon) + " (" +
                    ladder_mode_name(t.method) + "), mass defect " + g6(t.mass_defect) + " -> " + p;
}

void task_simulate(Context& ctx) {
  auto spec = parse_event(ctx.cfg.param("event"));
  if (has(ctx.cfg, "budget")) spec.step_budget = static_cast<std::uint64_t>(int_param(ctx.cfg, "budget", 0));
  const auto replicas = static_cast<std::uint64_t>(int_param(ctx.cfg, "replicas", 100000));
  const auto e = estimate_event(*ctx.law, spec, replicas, ctx.cfg.seed);
  if (!e.valid()) ctx.out.status = exit_flagged;
  const auto p = ctx.path("simulate.json");
  ctx.write_json(p, ojson::parse(mc_report(*ctx.law, e).to_json()));
  ctx.out.summary = "simulate: " + e.spec + " = " + g6(e.estimate) + " se " + g6(e.se) + ", overflows " +
                    std::to_string(e.overflows) + (e.valid() ? "" : " (INVALID)") + " -> " + p;
}

void task_reproduce(Context& ctx, std::ostream& err) {
  const auto suite = ctx.cfg.param("suite");
  SuiteOptions o;
  o.seed = ctx.cfg.seed;
  const auto p = ctx.path("reproduce_" + suite + ".json");
  const auto dir = std::filesystem::path(p).parent_path().string();
  o.artifact_dir = dir.empty() ? "." : dir;
  int failed = 0;
  const auto res = reproduce_suite(suite, o, [&](const CriterionResult& r) {
    err << r.line() << '\n';
    failed += !r.pass;
  });
  ctx.write_json(p, ojson{{"suite", suite}, {"results", ojson::parse(results_json(res))}});
  if (failed) ctx.out.status = exit_flagged;
  ctx.out.summary = "reproduce " + suite + ": " + std::to_string(res.size() - failed) + "/" +
                    std::to_string(res.size()) + " criteria pass -> " + p;
}

}  // namespace

RunOutcome run(const ExperimentConfig& config, std::ostream& err) {
  try {
    config.validate();
    Context ctx{config, nullptr, "", {}};
    if (config.task != "reproduce") {
      ctx.law = law_from_config(config.law);
      ctx.law->validate();
    }
    ctx.header = header_line(ctx.law ? ctx.law->hash() : "", config.seed);
    if (config.task == "potential")
      task_potential(ctx);
    else if (config.task == "functionals")
      task_functionals(ctx);
    else if (config.task == "conditions")
      task_conditions(ctx);
    else if (config.task == "exit-prob")
      task_exit(ctx);
    else if (config.task == "ladder")
      task_ladder(ctx);
    else if (config.task == "simulate")
      task_simulate(ctx);
    else
      task_reproduce(ctx, err);
    return ctx.out;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    RunOutcome o;
    o.status = exit_error;
    o.summary = config.task + ": error: " + e.what();
    return o;
  }
}

int run_and_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const auto o = run(config, err);
  out << o.summary << '\n';
  return o.status;
}

}  // namespace htp
