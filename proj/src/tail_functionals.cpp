#include "htp/tail_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace htp {

namespace {

constexpr double k_pi = std::numbers::pi;

// E[min(L, (X - b)^+)^2] over one side
double clipped_square(const StepLaw& law, Sign s, double b, double L) {
  const std::int64_t jl = static_cast<std::int64_t>(std::floor(b)) + 1;
  const std::int64_t jh = static_cast<std::int64_t>(std::floor(b + L));
  double v = 0.0;
  if (jh >= jl) {
    if (jh - jl <= 4096) {
      for (std::int64_t j = jl; j <= jh; ++j) {
        double p = law.pmf(s == Sign::plus ? j : -j);
        double d = static_cast<double>(j) - b;
        v += d * d * p;
      }
    } else {
      double m0 = law.moment(s, 0, jl, jh), m1 = law.moment(s, 1, jl, jh), m2 = law.moment(s, 2, jl, jh);
      v += m2 - 2.0 * b * m1 + b * b * m0;
    }
  }
  return v + L * L * law.mu(s, b + L);
}

}  // namespace

std::string fmt12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SideFunctionals side_functionals(const StepLaw& law, Sign s, double x) {
  if (!(x > 0.0)) throw std::domain_error("functionals: x must be positive");
  if (!(x < 9.0e18)) throw std::domain_error("functionals: x beyond representable range");
  const std::int64_t n = static_cast<std::int64_t>(std::floor(x)) + 1;
  SideFunctionals f{};
  f.mu = law.mass_ge(s, n);
  const double m1_hi = law.moment(s, 1, n, k_inf_index);
  const double m1_lo = law.moment(s, 1, 1, n - 1);
  const double m2_lo = law.moment(s, 2, 1, n - 1);
  const double m3_lo = law.moment(s, 3, 1, n - 1);
  f.eta = m1_hi - x * f.mu;
  f.c = 0.5 * (m2_lo + x * x * f.mu);
  f.m = f.c + x * f.eta;
  f.c_tilde = (m3_lo + x * x * x * f.mu) / (3.0 * x);
  f.m_tilde = (2.0 / x) * (m3_lo / 6.0 + 0.5 * x * x * m1_hi - x * x * x * f.mu / 3.0);
  f.first_moment_trunc = m1_lo + x * f.mu;
  return f;
}

BasicRecord eval_basic(const StepLaw& law, double x, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("eval_basic: eps must be positive");
  auto p = side_functionals(law, Sign::plus, x);
  auto q = side_functionals(law, Sign::minus, x);
  BasicRecord r;
  r.x = x;
  r.mu_plus = p.mu;
  r.mu_minus = q.mu;
  r.eta_plus = p.eta;
  r.eta_minus = q.eta;
  r.eta = p.eta + q.eta;
  r.c_plus = p.c;
  r.c_minus = q.c;
  r.c = p.c + q.c;
  r.m_plus = p.m;
  r.m_minus = q.m;
  r.m = p.m + q.m;
  r.c_tilde = p.c_tilde + q.c_tilde;
  r.m_tilde = p.m_tilde + q.m_tilde;
  r.A = p.first_moment_trunc - q.first_moment_trunc;
  r.eps = eps;
  const double L = eps * x, b = k_pi * x;
  double h = 0.0;
  for (Sign s : {Sign::plus, Sign::minus}) {
    auto lo = side_functionals(law, s, L);
    h += lo.c - 0.5 * clipped_square(law, s, b, L);
  }
  r.h_eps = h;
  return r;
}

FreqRecord eval_freq(const StepLaw& law, double t) {
  if (!(t > 0.0 && t <= k_pi)) throw std::domain_error("eval_freq: t must lie in (0, pi]");
  FreqRecord r;
  r.t = t;
  const auto fp = law.phi_side(Sign::plus, t);
  const auto fm = law.phi_side(Sign::minus, t);
  r.alpha_plus = fp.real() / t;
  r.beta_plus = fp.imag() / t;
  r.alpha_minus = fm.real() / t;
  r.beta_minus = fm.imag() / t;
  r.alpha = r.alpha_plus + r.alpha_minus;
  r.beta = r.beta_plus + r.beta_minus;
  r.gamma = r.beta_plus - r.beta_minus;
  r.one_minus_psi = fp + std::conj(fm);
  r.psi = 1.0 - r.one_minus_psi;
  const double m = side_functionals(law, Sign::plus, 1.0 / t).m + side_functionals(law, Sign::minus, 1.0 / t).m;
  r.f = 1.0 / (t * t * m * m);
  r.f_circ = 1.0 / (r.alpha * r.alpha + r.gamma * r.gamma);
  r.err = 4e-16 * (std::abs(fp) + std::abs(fm) + 1.0) / t;
  return r;
}

FunctionalProfile::FunctionalProfile(std::shared_ptr<const StepLaw> law, std::vector<double> grid_x,
                                     std::vector<double> grid_t)
    : law_(std::move(law)), grid_x_(std::move(grid_x)), grid_t_(std::move(grid_t)) {
  std::sort(grid_x_.begin(), grid_x_.end());
  std::sort(grid_t_.begin(), grid_t_.end());
}

BasicRecord FunctionalProfile::basic(double x, double eps) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = basic_cache_.find({x, eps});
    if (it != basic_cache_.end()) return it->second;
  }
  auto r = eval_basic(*law_, x, eps);
  std::lock_guard<std::mutex> lk(mu_);
  basic_cache_.emplace(std::make_pair(x, eps), r);
  return r;
}

FreqRecord FunctionalProfile::freq(double t) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = freq_cache_.find(t);
    if (it != freq_cache_.end()) return it->second;
  }
  auto r = eval_freq(*law_, t);
  std::lock_guard<std::mutex> lk(mu_);
  freq_cache_.emplace(t, r);
  return r;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const ConditionEntry& ConditionReport::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("no condition named " + name);
}

namespace {

// indices of xs lying in the final decade
std::vector<std::size_t> final_decade(const std::vector<double>& xs) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] >= xs.back() / 10.0) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> previous_decade(const std::vector<double>& xs) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] >= xs.back() / 100.0 && xs[i] < xs.back() / 10.0) idx.push_back(i);
  return idx;
}

double fold(const std::vector<double>& w, const std::vector<std::size_t>& idx, bool take_max) {
  double v = take_max ? -INFINITY : INFINITY;
  bool any = false;
  for (auto i : idx) {
    if (std::isnan(w[i])) continue;
    any = true;
    v = take_max ? std::max(v, w[i]) : std::min(v, w[i]);
  }
  return any ? v : std::numeric_limits<double>::quiet_NaN();
}

double ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? std::numeric_limits<double>::quiet_NaN() : INFINITY;
  return a / b;
}

// strict "limsup < thr"
ConditionEntry limsup_below(const std::string& name, std::vector<double> w, const std::vector<double>& xs,
                            double thr, double slack) {
  ConditionEntry e;
  e.name = name;
  e.threshold = thr;
  e.proxy = fold(w, final_decade(xs), true);
  if (std::isnan(e.proxy)) e.verdict = Verdict::inconclusive;
  else if (e.proxy <= thr * (1.0 - slack)) e.verdict = Verdict::holds;
  else if (e.proxy >= thr * (1.0 + slack)) e.verdict = Verdict::fails;
  else e.verdict = Verdict::inconclusive;
  e.witness = std::move(w);
  return e;
}

}  // namespace

ConditionReport check_conditions(const StepLaw& law, double x_max, double slack) {
  ConditionReport rep;
  for (double x = 1.0; x <= x_max * (1.0 + 1e-12); x *= 2.0) rep.xs.push_back(x);
  if (rep.xs.size() < 8) throw std::invalid_argument("check_conditions: sequence too short");
  const std::size_t n = rep.xs.size();
  std::vector<double> wh(n), wh2(n), wh0(n), wp(n), wm(n), wt(n), wmp(n), wcm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rep.xs[i];
    const auto b = eval_basic(law, x);
    const double t = 1.0 / x;
    const auto f = eval_freq(law, std::min(t, k_pi));
    wh[i] = ratio(f.alpha + std::abs(f.gamma), b.eta);
    wh2[i] = ratio(b.mu_plus, b.mu_minus);
    wh0[i] = ratio(x * std::min(b.eta_plus, b.eta_minus), std::max(b.m_plus, b.m_minus));
    wp[i] = ratio(x * b.eta_plus, b.m_plus);
    wm[i] = ratio(x * b.eta_minus, b.m_minus);
    wt[i] = ratio(x * b.eta, b.m);
    wmp[i] = ratio(b.m_plus, b.m);
    wcm[i] = ratio(b.c, b.m);
  }
  const auto last = final_decade(rep.xs);
  const auto prev = previous_decade(rep.xs);

  ConditionEntry h;
  h.name = "H";
  h.threshold = 0.0;
  h.proxy = fold(wh, last, false);
  const double prev_min = fold(wh, prev, false);
  if (std::isnan(h.proxy)) h.verdict = Verdict::inconclusive;
  else if (std::isinf(h.proxy) || (h.proxy > 0.0 && h.proxy >= (1.0 - slack) * prev_min)) h.verdict = Verdict::holds;
  else if (h.proxy <= 0.0 || h.proxy < 0.5 * prev_min) h.verdict = Verdict::fails;
  else h.verdict = Verdict::inconclusive;
  h.witness = wh;
  rep.delta_h = h.proxy;
  rep.entries.push_back(h);

  rep.entries.push_back(limsup_below("H2", wh2, rep.xs, 1.0, slack));
  rep.entries.push_back(limsup_below("H0", wh0, rep.xs, 0.25, slack));
  auto hp = limsup_below("H1_plus", wp, rep.xs, 1.0, slack);
  auto hm = limsup_below("H1_minus", wm, rep.xs, 1.0, slack);
  auto ht = limsup_below("H1_total", wt, rep.xs, 1.0, slack);
  ConditionEntry h1;
  h1.name = "H1";
  h1.threshold = 1.0;
  h1.proxy = INFINITY;
  for (auto* e : {&hp, &hm, &ht})
    if (!std::isnan(e->proxy)) h1.proxy = std::min(h1.proxy, e->proxy);
  if (hp.verdict == Verdict::holds || hm.verdict == Verdict::holds || ht.verdict == Verdict::holds)
    h1.verdict = Verdict::holds;
  else if (hp.verdict == Verdict::fails && hm.verdict == Verdict::fails && ht.verdict == Verdict::fails)
    h1.verdict = Verdict::fails;
  else
    h1.verdict = Verdict::inconclusive;
  h1.witness = wt;
  rep.entries.push_back(hp);
  rep.entries.push_back(hm);
  rep.entries.push_back(ht);
  rep.entries.push_back(h1);

  ConditionEntry mp;
  mp.name = "m_plus_over_m_to_zero";
  mp.threshold = 0.0;
  mp.proxy = fold(wmp, last, true);
  {
    const double first = wmp[last.front()], fin = wmp[last.back()];
    if (std::isnan(mp.proxy)) mp.verdict = Verdict::inconclusive;
    else if (mp.proxy <= slack && fin <= first * (1.0 + 1e-9)) mp.verdict = Verdict::holds;
    else if (mp.proxy > 2.0 * slack && fin > 0.9 * first) mp.verdict = Verdict::fails;
    else mp.verdict = Verdict::inconclusive;
  }
  mp.witness = wmp;
  rep.entries.push_back(mp);

  ConditionEntry cm;
  cm.name = "c_over_m";
  cm.witness = wcm;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  rep.c_over_m_min = fold(wcm, all, false);
  rep.c_over_m_max = fold(wcm, all, true);
  cm.proxy = rep.c_over_m_min;
  cm.verdict = Verdict::inconclusive;
  rep.entries.push_back(cm);
  return rep;
}

AuditReport audit_lemma_bounds(const StepLaw& law, const std::vector<double>& ts,
                               const std::vector<std::pair<double, double>>& pairs, double eps) {
  AuditReport rep;
  auto check = [&](const std::string& name, double t, double s, double lhs, double rhs, double err) {
    ++rep.checks;
    if (lhs > rhs + err + 1e-9 * (std::abs(lhs) + std::abs(rhs)))
      rep.violations.push_back({name, t, s, lhs, rhs});
  };
  const double sin_ratio = std::sin(eps) / eps;
  for (double t : ts) {
    const auto b = eval_basic(law, 1.0 / t, eps);
    const auto f = eval_freq(law, t);
    const double e = f.err / t;
    check("alpha_lower", t, t, sin_ratio * b.h_eps, f.alpha / t, e);
    check("alpha_upper", t, t, f.alpha / t, std::min(k_pi * k_pi * b.c, b.m), e);
    check("beta_lower", t, t, 0.5 * b.m_tilde * t, f.beta, f.err);
    check("beta_upper", t, t, f.beta, 2.0 * b.m_tilde * t, f.err);
    check("alpha_beta_lower", t, t, b.m * t / 3.0, f.alpha + f.beta, 2 * f.err);
    check("alpha_beta_upper", t, t, f.alpha + f.beta, 3.0 * b.m * t, 2 * f.err);
  }
  for (auto [t, s] : pairs) {
    if (!(t > 0.0 && t <= s && s <= k_pi)) throw std::invalid_argument("audit: need 0 < t <= s <= pi");
    const auto ft = eval_freq(law, t);
    const auto fs = eval_freq(law, s);
    const double lhs = std::max(std::abs(ft.alpha - fs.alpha), std::abs(ft.beta - fs.beta));
    const double err = 2.0 * (ft.err + fs.err);
    const auto bt = eval_basic(law, 1.0 / t);
    const double c_pi = side_functionals(law, Sign::plus, k_pi / t).c + side_functionals(law, Sign::minus, k_pi / t).c;
    check("modulus_c", t, s, lhs, (s - t) * c_pi + 8.0 * t * bt.c, err);
    check("modulus_m", t, s, lhs, 4.0 * std::sqrt(2.0) * std::sqrt((s - t) / t) * t * bt.m, err);
  }
  return rep;
}

std::string basic_csv(const std::vector<BasicRecord>& rows) {
  std::ostringstream os;
  os << "x,mu_plus,mu_minus,eta,c,m,c_over_m,x_eta_over_m\n";
  for (const auto& r : rows)
    os << fmt12(r.x) << ',' << fmt12(r.mu_plus) << ',' << fmt12(r.mu_minus) << ',' << fmt12(r.eta) << ','
       << fmt12(r.c) << ',' << fmt12(r.m) << ',' << fmt12(r.c / r.m) << ',' << fmt12(r.x * r.eta / r.m) << '\n';
  return os.str();
}

std::string freq_csv(const std::vector<FreqRecord>& rows) {
  std::ostringstream os;
  os << "t,re_psi,im_psi,alpha,beta,gamma\n";
  for (const auto& r : rows)
    os << fmt12(r.t) << ',' << fmt12(r.psi.real()) << ',' << fmt12(r.psi.imag()) << ',' << fmt12(r.alpha) << ','
       << fmt12(r.beta) << ',' << fmt12(r.gamma) << '\n';
  return os.str();
}

}  // namespace htp
