#include "htp/suites.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "htp/absorbing_chain.hpp"
#include "htp/green_exit.hpp"
#include "htp/ladder_renewal.hpp"
#include "htp/mc_engine.hpp"
#include "htp/potential_kernel.hpp"
#include "htp/reports.hpp"
#include "htp/rng.hpp"
#include "htp/tail_functionals.hpp"

namespace htp {

namespace {

using LawPtr = std::shared_ptr<const StepLaw>;

LawPtr builtin(Family f, double alpha = 1.5, double p = 0.5, int n_max = 4) {
  BuiltinSpec s;
  s.family = f;
  s.alpha = alpha;
  s.p = p;
  s.n_max = n_max;
  return std::make_shared<const StepLaw>(make_builtin(s));
}

LawPtr left_heavy() { return builtin(Family::stable_attraction, 1.5, 0.0); }

std::string g4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string est(const McEstimate& e) { return g6(e.estimate) + "+-" + g4(e.se); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void note(const SuiteOptions& o, const std::string& s) {
  if (o.log) o.log(s);
}

void artifact(const SuiteOptions& o, const std::string& name, const std::string& body) {
  if (o.artifact_dir.empty()) return;
  write_artifact(o.artifact_dir + "/" + name, header_line("", o.seed), body);
}

std::uint64_t seed_for(const SuiteOptions& o, int id, int k) { return mix64(o.seed + 1000 * std::uint64_t(id) + k); }

// within 4 standard errors and free of budget overflow
bool agrees(const McEstimate& e, double target) { return e.valid() && std::abs(e.estimate - target) <= 4.0 * e.se; }

struct Outcome {
  std::ostringstream detail;
  std::vector<std::string> failed;
  void require(bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  }
};

std::vector<LawPtr> identity_laws() {
  return {builtin(Family::simple_pm1), builtin(Family::stable_attraction, 1.5, 0.5),
          builtin(Family::stable_attraction, 1.5, 0.25), left_heavy(), builtin(Family::sparse_spectrum, 1.5, 0.5, 4)};
}

void crit_identities(const SuiteOptions& o, Outcome& out) {
  std::vector<std::int64_t> xs;
  for (std::int64_t x = -32; x <= 32; ++x) xs.push_back(x);
  for (const auto& L : identity_laws()) {
    note(o, "identities: " + L->name());
    FourierKernel K(L);
    SeriesOracle O(L, 21);
    double d1 = 0, r1 = 0, d3 = 0, r3 = 0, d2 = 0, r2 = 0, d4 = 0;
    for (auto x : xs) {
      const auto kp = K.eval(x);
      const auto ov = O.eval(x, {});
      const double diff = std::abs(kp.a.value - ov.value);
      d1 = std::max(d1, diff);
      r1 = std::max(r1, diff / std::max(1e-3, 3.0 * (kp.a.err + ov.err)));
      const double split = std::abs(kp.a.value - (kp.abar.value + kp.b_minus.value - kp.b_plus.value));
      const double e3 = kp.a.err + kp.abar.err + kp.b_plus.err + kp.b_minus.err + 1e-15 * std::abs(kp.a.value);
      d3 = std::max(d3, split);
      r3 = std::max(r3, split / e3);
    }
    for (const auto& h : harmonic_check(L, xs)) {
      const double diff = std::abs(h.lhs - h.rhs);
      d2 = std::max(d2, diff);
      r2 = std::max(r2, diff / (5.0 * default_tolerance(h.x).abs));
    }
    HittingModel m(L, K.dense_table(64));
    for (auto y : xs) d4 = std::max(d4, std::abs(green_zero(m, 0, y).value - 1.0));
    out.detail << L->name() << ": (i) " << g4(d1) << " (ii) " << g4(d2) << " (iii) " << g4(d3) << " (iv) " << g4(d4)
               << "; ";
    out.require(r1 <= 1.0, "(i) fourier vs series oracle on " + L->name());
    out.require(r2 <= 1.0, "(ii) harmonic identity on " + L->name());
    out.require(r3 <= 1.0, "(iii) a = abar + b_- - b_+ on " + L->name());
    out.require(d4 <= 1e-8, "(iv) g(0,y) = 1 on " + L->name());
  }
}

void crit_simple_walk(const SuiteOptions& o, Outcome& out) {
  auto L = builtin(Family::simple_pm1);
  const auto T = FourierKernel(L).dense_table(1000);
  double da = 0;
  for (std::int64_t x = -1000; x <= 1000; ++x) da = std::max(da, std::abs(T.a_at(x) - std::abs(double(x))));
  HittingModel m(L, T);
  Rng rng(seed_for(o, 2, 0), 0);
  double dh = 0;
  out.detail << "pairs";
  for (int k = 0; k < 20; ++k) {
    const std::int64_t y = 2 + static_cast<std::int64_t>(rng.uniform() * 499);
    const std::int64_t x = 1 + static_cast<std::int64_t>(rng.uniform() * double(y - 1));
    const std::int64_t s = k % 2 ? -1 : 1;
    dh = std::max(dh, std::abs(hit_before_zero(m, s * x, s * y).value - double(x) / double(y)));
    if (k < 3) out.detail << " (" << s * x << "," << s * y << ")";
  }
  out.detail << " ...; max|a(x)-|x|| = " << g4(da) << ", max|h - x/y| = " << g4(dh);
  out.require(da <= 1e-8, "a(x) = |x|");
  out.require(dh <= 1e-8, "hit_before_zero = x/y");
}

void crit_sandwich(const SuiteOptions& o, Outcome& out) {
  std::vector<std::int64_t> xs;
  for (int k = 0; k <= 8; ++k) xs.push_back(std::llround(std::pow(2.0, 12.0 + 0.5 * k)));
  std::ostringstream csv;
  csv << "alpha,p,x,abar_m_over_x,inverse_kappa\n";
  for (double alpha : {1.3, 1.5, 1.8})
    for (double p : {0.0, 0.5}) {
      auto L = builtin(Family::stable_attraction, alpha, p);
      const auto T = build_table(L, xs);
      const double ik = 1.0 / kappa_alpha(alpha, p);
      double lo = INFINITY, hi = -INFINITY, last = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = double(xs[i]);
        const double r = T.abar[i] * eval_basic(*L, x).m / x;
        lo = std::min(lo, r / ik);
        hi = std::max(hi, r / ik);
        last = r;
        csv << alpha << ',' << p << ',' << xs[i] << ',' << fmt12(r) << ',' << fmt12(ik) << '\n';
      }
      out.detail << "a=" << alpha << ",p=" << p << ": band " << g4(lo) << ".." << g4(hi) << ", end "
                 << g4(last * kappa_alpha(alpha, p)) << "; ";
      out.require(lo >= 0.5 && hi <= 2.0, "band [0.5, 2]/kappa at alpha=" + g4(alpha) + " p=" + g4(p));
      out.require(std::abs(last / ik - 1.0) <= 0.15, "15% at 2^16, alpha=" + g4(alpha) + " p=" + g4(p));
    }
  artifact(o, "sandwich.csv", csv.str());
}

void crit_negative_side(const SuiteOptions&, Outcome& out) {
  const std::int64_t x = 65536;
  const auto T1 = build_table(builtin(Family::stable_attraction, 1.5, 0.25), {x, -x});
  const auto T0 = build_table(left_heavy(), {x, -x});
  const double r1 = T1.a_at(-x) / T1.a_at(x), r0 = T0.a_at(-x) / T0.a_at(x);
  out.detail << "p=0.25: a(-x)/a(x) = " << g6(r1) << " (target 1/3); p=0: " << g4(r0);
  out.require(std::abs(r1 - 1.0 / 3.0) <= 0.15, "p=0.25 ratio within 0.15 of 1/3");
  out.require(r0 < 0.05, "p=0 ratio below 0.05");
}

void crit_sparse(const SuiteOptions& o, Outcome& out) {
  auto L = builtin(Family::sparse_spectrum, 1.5, 0.5, 4);
  double cpu = 0, x4 = 0;
  {
    FourierKernel K(L);
    const std::clock_t c0 = std::clock();
    x4 = K.eval(65536).abar.value;
    cpu = double(std::clock() - c0) / CLOCKS_PER_SEC;
  }
  FourierKernel K(L);
  std::ostringstream csv;
  csv << "n,x_n,abar_half,abar_full,ratio\n";
  std::vector<double> ratio;
  out.detail << "growth ratios";
  for (int n = 1; n <= 4; ++n) {
    const std::int64_t xn = std::int64_t{1} << (n * n);
    const double full = K.eval(xn).abar.value, half = K.eval(xn / 2).abar.value;
    ratio.push_back(half / full);
    csv << n << ',' << xn << ',' << fmt12(half) << ',' << fmt12(full) << ',' << fmt12(half / full) << '\n';
    out.detail << " n=" << n << ":" << g4(half / full);
  }
  artifact(o, "sparse_growth.csv", csv.str());
  double cm_lo = INFINITY, cm_hi = -INFINITY;
  for (double x = 1.0; x <= 16777216.0; x *= 1.01) {
    const auto b = eval_basic(*L, x);
    cm_lo = std::min(cm_lo, b.c / b.m);
    cm_hi = std::max(cm_hi, b.c / b.m);
  }
  out.detail << "; c/m range " << g4(cm_lo) << ".." << g4(cm_hi) << "; abar(x_4) = " << g6(x4) << " in " << g4(cpu)
             << " s cpu";
  out.require(ratio[1] < ratio[2] && ratio[2] < ratio[3], "ratio increasing for n = 2, 3, 4");
  out.require(ratio[3] >= 2.0, "ratio >= 2 at n = 4");
  out.require(cm_lo <= 0.1, "c/m attains <= 0.1");
  out.require(cm_hi >= 0.5, "c/m attains >= 0.5");
  out.require(cpu < 60.0, "abar(x_4) under 60 s");
}

void crit_halfline(const SuiteOptions& o, Outcome& out) {
  for (const auto& L : {builtin(Family::simple_pm1), builtin(Family::sparse_spectrum, 1.5, 0.5, 2)}) {
    LadderOptions lo;
    lo.horizon = 4096;
    const auto T = ladder_law(L, lo);
    const auto block = chain::halfline_green_block(*L, 64, 4096);
    double d = 0;
    for (std::int64_t x = 1; x <= 64; ++x)
      for (std::int64_t y = 1; y <= 64; ++y) d = std::max(d, std::abs(halfline_green(T, x, y) - block[x - 1][y - 1]));
    out.detail << L->name() << ": max|g - vu| = " << g4(d) << "; ";
    out.require(d <= 1e-6, "product formula vs chain on " + L->name());
  }
  auto L = left_heavy();
  LadderOptions lo;
  lo.horizon = 4096;
  const auto T = ladder_law(L, lo);
  HittingModel m(L);
  int k = 0;
  for (auto [x, R] : {std::pair<std::int64_t, std::int64_t>{10, 1000}, {100, 1000}}) {
    note(o, "halfline: MC at x=" + std::to_string(x));
    const double pred = exit_predictors(m, x, R, R, &T.V_ds).get("halfline").value;
    RaceSpec spec{x, StopCondition::up(R), StopCondition::down(0)};
    const auto e = estimate_event(*L, spec, 1000000, seed_for(o, 6, k++));
    out.detail << "x=" << x << ",R=" << R << ": predictor " << g6(pred) << " mc " << est(e) << "; ";
    out.require(agrees(e, pred), "predictor within 4 SE at x=" + std::to_string(x));
  }
}

void crit_escape(const SuiteOptions& o, Outcome& out) {
  auto L = left_heavy();
  const std::int64_t Q = 1000, R = 1000;
  HittingModel m(L);
  const auto P = exit_predictors(m, 0, Q, R);
  const double one = P.get("one_sided").value, two = P.get("two_sided").value, top = P.get("top_given_exit").value;
  note(o, "escape: one-sided");
  const auto e1 = estimate_event(*L, {0, StopCondition::up(R), StopCondition::hit(0)}, 1000000, seed_for(o, 7, 0));
  note(o, "escape: two-sided");
  const RaceSpec two_spec{0, StopCondition::exit(-Q, R), StopCondition::hit(0)};
  const auto e2 = estimate_event(*L, two_spec, 1000000, seed_for(o, 7, 1));
  note(o, "escape: conditional top exit");
  const auto e3 = conditional_event(*L, two_spec, StopCondition::up(R), 1000000, seed_for(o, 7, 2));
  out.detail << "1/a(R) " << g6(one) << " mc " << est(e1) << "; two-sided " << g6(two) << " mc " << est(e2)
             << "; top|exit " << g6(top) << " mc " << est(e3);
  out.require(agrees(e1, one), "one-sided escape");
  out.require(agrees(e2, two), "two-sided escape");
  out.require(agrees(e3, top), "conditional top exit");
}

void crit_chain(const SuiteOptions& o, Outcome& out) {
  auto L = left_heavy();
  const double alpha = 1.5;
  std::vector<double> xs, ys;
  for (int k = 10; k <= 20; ++k) {
    xs.push_back(std::ldexp(1.0, k));
    ys.push_back(eval_basic(*L, xs.back()).m_minus);
  }
  const double s_m = loglog_slope(xs, ys);
  note(o, "chain: ladder tables");
  LadderOptions lo;
  lo.horizon = std::int64_t{1} << 16;
  const auto T = ladder_law(L, lo);
  xs.clear();
  ys.clear();
  for (int k = 8; k <= 16; ++k) {
    xs.push_back(std::ldexp(1.0, k));
    ys.push_back(T.V_ds[std::size_t{1} << k]);
  }
  const double s_v = loglog_slope(xs, ys);
  std::vector<std::int64_t> ax;
  for (int k = 10; k <= 16; ++k) ax.push_back(std::int64_t{1} << k);
  const auto A = build_table(L, ax);
  xs.assign(ax.begin(), ax.end());
  const double s_a = loglog_slope(xs, A.a);
  out.detail << "indices m_- " << g4(s_m) << ", V_ds " << g4(s_v) << ", a " << g4(s_a) << "; ";
  out.require(std::abs(s_m - (2.0 - alpha)) <= 0.1, "m_- index");
  out.require(std::abs(s_v - (alpha - 1.0)) <= 0.1, "V_ds index");
  out.require(std::abs(s_a - (alpha - 1.0)) <= 0.1, "a index");

  note(o, "chain: P[S_n > 0]");
  std::vector<std::int64_t> ns;
  for (int k = 10; k <= 14; ++k) ns.push_back(std::int64_t{1} << k);
  const auto sp = spitzer_estimate(*L, ns, 20000, seed_for(o, 8, 0));
  out.detail << "P[S_n>0]";
  for (const auto& s : sp) out.detail << " " << s.n << ":" << g4(s.positive);
  out.require(std::abs(sp.back().positive - 1.0 / alpha) <= 0.05, "P[S_n > 0] within 0.05 of 1/alpha at n = 2^14");

  note(o, "chain: exit through top at lambda = 0.5");
  const std::int64_t R = 1000, x = R / 2;
  const auto e = estimate_event(*L, {x, StopCondition::up(R), StopCondition::down(0)}, 100000, seed_for(o, 8, 1));
  const double target = std::pow(0.5, alpha - 1.0);
  out.detail << "; top exit " << est(e) << " vs " << g6(target);
  out.require(agrees(e, target), "exit through top within 4 SE of lambda^(alpha-1)");
}

void crit_renewal(const SuiteOptions& o, Outcome& out) {
  BuiltinSpec s;
  s.family = Family::renewal_logheavy;
  const auto L = make_builtin(s);
  const std::int64_t x_max = 20000;
  const auto rc = renewal_asymptotic_check(L, x_max, {50, 500, 5000});
  auto uG = [&](std::int64_t x) {
    double G = 0;
    for (std::int64_t k = 0; k < x; ++k) G += L.mu(Sign::plus, double(k));
    return rc.u[x] * G;
  };
  const double early = uG(100), late = uG(x_max);
  std::ostringstream csv;
  csv << "x,u,G,uG\n";
  for (const auto& r : rc.rows) csv << r.x << ',' << fmt12(r.u) << ',' << fmt12(r.G) << ',' << fmt12(r.uG) << '\n';
  artifact(o, "renewal.csv", csv.str());
  out.detail << "uG(100) = " << g6(early) << ", uG(20000) = " << g6(late) << "; sine vs recursion";
  for (std::size_t i = 0; i < rc.probe_x.size(); ++i)
    out.detail << " x=" << rc.probe_x[i] << ":" << g4(std::abs(rc.probe_sine[i] - rc.probe_recursion[i]));
  out.require(std::abs(late - 1.0) < std::abs(early - 1.0), "uG trend toward 1");
  out.require(late >= 0.7 && late <= 1.3, "final uG in [0.7, 1.3]");
  out.require(rc.probe_x.size() >= 3 && rc.max_probe_diff <= 1e-6, "sine inversion within 1e-6");
}

void crit_visits(const SuiteOptions& o, Outcome& out) {
  auto L = left_heavy();
  const std::int64_t R = 1000;
  HittingModel m(L);
  const double aR = m.a(R).value;
  const auto v = visit_count_law(*L, {0, 1}, 0, R, false, aR, {0.5, 1.0, 2.0}, 100000, seed_for(o, 10, 0));
  out.detail << "normalizer " << g6(v.normalizer) << ", mean count " << g6(v.mean_count) << ";";
  for (const auto& t : v.tails) out.detail << " t=" << t.t << ":" << g4(t.tail) << " vs " << g4(t.limit);
  out.detail << "; max deviation " << g4(v.max_deviation());
  out.require(double(v.overflows) < 1e-3 * double(v.replicas), "overflow below 1e-3");
  out.require(v.max_deviation() < 0.05, "max deviation below 0.05");
}

void crit_inequalities(const SuiteOptions& o, Outcome& out) {
  int li = 0;
  for (const auto& L : identity_laws()) {
    Rng rng(seed_for(o, 11, li++), 0);
    auto pick = [&](std::int64_t lo, std::int64_t hi) {
      return lo + static_cast<std::int64_t>(rng.uniform() * double(hi - lo + 1));
    };
    std::vector<InequalityTuple> tuples;
    while (tuples.size() < 1000) {
      InequalityTuple t;
      t.Q = pick(1, 200);
      t.R = pick(1, 200);
      t.x = pick(-t.Q + 1, t.R - 1);
      t.y = pick(-200, 200);
      if (t.y == 0 || t.y == t.x) continue;
      tuples.push_back(t);
    }
    HittingModel m(L, FourierKernel(L).dense_table(512));
    const auto a = audit_inequalities(m, tuples);
    std::vector<double> ts;
    std::vector<std::pair<double, double>> pairs;
    for (int k = 0; k < 1000; ++k) {
      const double t = std::numbers::pi * std::exp(-12.0 * rng.uniform());
      ts.push_back(t);
      pairs.emplace_back(t, t + (std::min(2.0 * t, std::numbers::pi) - t) * rng.uniform());
    }
    const auto b = audit_lemma_bounds(*L, ts, pairs);
    // the sandwich bounds presuppose infinite variance (x eta(x) -> infinity)
    bool heavy = false;
    for (Sign sg : {Sign::plus, Sign::minus})
      if (auto pt = L->pareto_tail(sg)) heavy = heavy || pt->second < 2.0;
    out.detail << L->name() << ": " << a.violations.size() << "/" << a.checked << " exit, " << b.violations.size()
               << "/" << b.checks << " sandwich" << (heavy ? "" : " (finite variance, not gated)") << "; ";
    for (const auto& v : a.violations)
      note(o, "violation " + v.name + " lhs=" + g6(v.lhs) + " rhs=" + g6(v.rhs) + " on " + L->name());
    if (heavy)
      for (const auto& v : b.violations)
        note(o, "violation " + v.bound + " t=" + g6(v.t) + " lhs=" + g6(v.lhs) + " rhs=" + g6(v.rhs) + " on " + L->name());
    out.require(a.violations.empty(), "exit inequalities on " + L->name());
    out.require(!heavy || b.violations.empty(), "sandwich bounds on " + L->name());
  }
}

struct CriterionDef {
  const char* name;
  double budget;
  void (*run)(const SuiteOptions&, Outcome&);
};

const std::map<int, CriterionDef>& criteria() {
  static const std::map<int, CriterionDef> c = {
      {1, {"identities", 60, crit_identities}},     {2, {"simple_walk", 30, crit_simple_walk}},
      {3, {"sandwich", 300, crit_sandwich}},        {4, {"negative_side", 300, crit_negative_side}},
      {5, {"sparse_example", 600, crit_sparse}},    {6, {"halfline", 300, crit_halfline}},
      {7, {"escape", 600, crit_escape}},            {8, {"chain_diagnostics", 600, crit_chain}},
      {9, {"renewal", 120, crit_renewal}},          {10, {"visit_count", 300, crit_visits}},
      {11, {"inequalities", 120, crit_inequalities}},
  };
  return c;
}

}  // namespace

std::string CriterionResult::line() const {
  char t[32];
  std::snprintf(t, sizeof t, "%.1f", seconds);
  return std::string(pass ? "[PASS] " : "[FAIL] ") + std::to_string(id) + " " + name + ": " + detail + " (" + t +
         " s)";
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"identities",     "theorems", "stable_family", "sparse_example",
                                                 "ladder",         "appendixB", "montecarlo"};
  return names;
}

const std::vector<int>& suite_criteria(const std::string& suite) {
  static const std::map<std::string, std::vector<int>> m = {
      {"identities", {1, 2}}, {"stable_family", {3, 4}}, {"sparse_example", {5}}, {"ladder", {6}},
      {"montecarlo", {7, 10}}, {"theorems", {8, 11}},     {"appendixB", {9}},
  };
  auto it = m.find(suite);
  if (it == m.end()) throw std::invalid_argument("unknown suite: " + suite);
  return it->second;
}

CriterionResult run_criterion(int id, const SuiteOptions& opt) {
  auto it = criteria().find(id);
  if (it == criteria().end()) throw std::invalid_argument("unknown criterion " + std::to_string(id));
  CriterionResult r;
  r.id = id;
  r.name = it->second.name;
  r.budget_seconds = it->second.budget;
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    it->second.run(opt, out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(r.seconds <= r.budget_seconds, "runtime budget " + g4(r.budget_seconds) + " s");
  r.pass = out.failed.empty();
  r.detail = out.detail.str();
  while (!r.detail.empty() && (r.detail.back() == ' ' || r.detail.back() == ';')) r.detail.pop_back();
  for (std::size_t i = 0; i < out.failed.size(); ++i) r.detail += (i ? "; " : " | failed: ") + out.failed[i];
  return r;
}

std::vector<CriterionResult> reproduce_suite(const std::string& suite, const SuiteOptions& opt,
                                             const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (int id : suite_criteria(suite)) {
    out.push_back(run_criterion(id, opt));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string results_json(const std::vector<CriterionResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json e;
    e["id"] = r.id;
    e["name"] = r.name;
    e["pass"] = r.pass;
    e["seconds"] = r.seconds;
    e["detail"] = r.detail;
    j.push_back(e);
  }
  return j.dump(2);
}

}  // namespace htp
