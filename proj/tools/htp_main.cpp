// Command-line front end: every subcommand builds an ExperimentConfig and hands it to the runner.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "htp/config.hpp"
#include "htp/runner.hpp"
#include "htp/suites.hpp"

namespace {

struct LawArgs {
  std::string family = "simple_pm1", file;
  std::string alpha, p, n_max, tail_const, cutoff;
};

void add_law_options(CLI::App* sub, LawArgs& l) {
  sub->add_option("--law", l.family, "built-in family: simple_pm1, stable_attraction, sparse_spectrum, renewal_logheavy");
  sub->add_option("--law-file", l.file, "law JSON file (overrides --law)");
  sub->add_option("--alpha", l.alpha, "tail index in (1, 2)");
  sub->add_option("--p", l.p, "right-tail share for stable_attraction");
  sub->add_option("--n-max", l.n_max, "number of atoms for sparse_spectrum");
  sub->add_option("--tail-const", l.tail_const, "c in P[T > n] = c/(n+1) for renewal_logheavy");
  sub->add_option("--cutoff", l.cutoff, "largest jump of the stable tail");
}

std::map<std::string, std::string> law_map(const LawArgs& l) {
  if (!l.file.empty()) return {{"file", l.file}};
  std::map<std::string, std::string> m{{"family", l.family}};
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) m[k] = v;
  };
  put("alpha", l.alpha);
  put("p", l.p);
  put("n_max", l.n_max);
  put("tail_const", l.tail_const);
  put("cutoff", l.cutoff);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential kernel, hitting probabilities and ladder tables for 1-D random walks"};
  app.require_subcommand(1);

  htp::ExperimentConfig cfg;
  LawArgs law;
  std::string out, config_path, tol_abs;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> params;

  auto common = [&](CLI::App* sub, bool with_law = true) {
    if (with_law) add_law_options(sub, law);
    sub->add_option("-o,--out", out, "artifact path");
    sub->add_option("--seed", seed, "base seed for all random streams");
    sub->add_option("--tol", tol_abs, "absolute tolerance for the potential kernel");
  };
  auto param = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help = "") {
    sub->add_option(flag, params[key], help);
  };

  auto* potential = app.add_subcommand("potential", "a, abar, b_+, b_- on an x grid");
  common(potential);
  param(potential, "--x-grid", "x_grid", "a..b, a..b:step or a comma list");
  param(potential, "--method", "method", "fourier or series_oracle");

  auto* functionals = app.add_subcommand("functionals", "truncated tail functionals and alpha/beta/gamma");
  common(functionals);
  param(functionals, "--x-grid", "x_grid", "positive x values, same syntax as for potential");
  param(functionals, "--t-grid", "t_grid", "comma list in (0, pi]");
  param(functionals, "--eps", "eps", "epsilon for h_eps (default 1)");

  auto* conditions = app.add_subcommand("conditions", "asymptotic condition verdicts");
  common(conditions);
  param(conditions, "--x-max", "x_max", "largest x of the geometric grid (default 2^24)");

  auto* exitp = app.add_subcommand("exit-prob", "hitting and escape probabilities, with optional simulation");
  common(exitp);
  param(exitp, "--x", "x", "start point");
  param(exitp, "--y", "y", "target: P[hit y before 0]");
  param(exitp, "--Q", "Q", "with --R: exit (-Q, R) before 0");
  param(exitp, "--R", "R", "alone: reach [R, inf) before 0");
  param(exitp, "--replicas", "replicas", "Monte Carlo replicas, 0 for none");
  param(exitp, "--budget", "budget", "step budget per replica");

  auto* ladder = app.add_subcommand("ladder", "ladder height laws and renewal functions");
  common(ladder);
  param(ladder, "--horizon", "horizon", "table length (default 4096)");
  param(ladder, "--mode", "mode", "exact or sim");
  param(ladder, "--replicas", "replicas", "replicas in sim mode");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo race between two stopping conditions");
  common(simulate);
  param(simulate, "--event", "event", "e.g. \"race(hit:1000, hit:0) from 5\"");
  param(simulate, "--replicas", "replicas", "at least 1000 (default 100000)");
  param(simulate, "--budget", "budget", "step budget per replica");

  auto* reproduce = app.add_subcommand("reproduce", "run an acceptance suite");
  common(reproduce, false);
  std::string suite;
  reproduce->add_option("suite", suite, "identities, theorems, stable_family, sparse_example, ladder, appendixB or montecarlo")->required();

  auto* run = app.add_subcommand("run", "run an experiment config file");
  run->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : htp::exit_error;
  }

  try {
    if (*run) {
      cfg = htp::ExperimentConfig::load(config_path);
    } else {
      auto* sub = app.get_subcommands().front();
      cfg.task = sub->get_name();
      if (cfg.task != "reproduce") cfg.law = law_map(law);
      for (const auto& [k, v] : params)
        if (!v.empty()) cfg.params[k] = v;
      if (cfg.task == "reproduce") cfg.params["suite"] = suite;
      cfg.output = out;
      cfg.seed = seed;
      if (!tol_abs.empty()) cfg.tolerance["abs"] = tol_abs;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return htp::exit_error;
  }
  return htp::run_and_report(cfg, std::cout, std::cerr);
}
