#include "htp/step_laws.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "htp/rng.hpp"

namespace htp {

namespace {

using Kind = TailDescriptor::Kind;

double digamma_diff(std::int64_t hi, std::int64_t lo) {
  // sum_{j=lo}^{hi-1} 1/j
  if (hi <= lo) return 0.0;
  if (hi - lo < 64) {
    double s = 0.0;
    for (std::int64_t j = hi - 1; j >= lo; --j) s += 1.0 / static_cast<double>(j);
    return s;
  }
  return boost::math::digamma(static_cast<double>(hi)) - boost::math::digamma(static_cast<double>(lo));
}

double tail_pmf(const TailDescriptor& d, std::int64_t j) {
  if (d.kind == Kind::zero || j < d.k0) return 0.0;
  double x = static_cast<double>(j);
  if (d.kind == Kind::power) return d.coef * std::pow(x, -d.s);
  return d.coef / (x * (x + 1.0));
}

// sum_{j=a}^{b} j^r p(j) over the closed-form part
double tail_moment(const TailDescriptor& d, int r, std::int64_t a, std::int64_t b) {
  if (d.kind == Kind::zero) return 0.0;
  a = std::max(a, d.k0);
  if (b < a) return 0.0;
  if (d.kind == Kind::power) return d.coef * power_sum(static_cast<double>(r) - d.s, a, b);
  const bool inf = (b == k_inf_index);
  const double c = d.coef;
  switch (r) {
    case 0:
      return c * (1.0 / static_cast<double>(a) - (inf ? 0.0 : 1.0 / (static_cast<double>(b) + 1.0)));
    case 1:
      if (inf) return std::numeric_limits<double>::infinity();
      return c * digamma_diff(b + 2, a + 1);
    case 2:
      if (inf) return std::numeric_limits<double>::infinity();
      return c * (static_cast<double>(b - a + 1) - digamma_diff(b + 2, a + 1));
    case 3: {
      if (inf) return std::numeric_limits<double>::infinity();
      double n = static_cast<double>(b - a + 1);
      double sj = 0.5 * (static_cast<double>(a) + static_cast<double>(b)) * n;
      return c * (sj - n + digamma_diff(b + 2, a + 1));
    }
    default:
      throw std::invalid_argument("tail_moment: order > 3");
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::zero: return "zero";
    case Kind::power: return "power";
    case Kind::harmonic: return "harmonic";
  }
  return "zero";
}

Kind kind_from(const std::string& s) {
  if (s == "zero") return Kind::zero;
  if (s == "power") return Kind::power;
  if (s == "harmonic") return Kind::harmonic;
  throw LawError("unknown tail kind: " + s);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::simple_pm1: return "simple_pm1";
    case Family::stable_attraction: return "stable_attraction";
    case Family::sparse_spectrum: return "sparse_spectrum";
    case Family::renewal_logheavy: return "renewal_logheavy";
    case Family::custom: return "custom";
  }
  return "custom";
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::simple_pm1, Family::stable_attraction, Family::sparse_spectrum,
                   Family::renewal_logheavy, Family::custom})
    if (family_name(f) == name) return f;
  throw LawError("unknown law family: " + name);
}

bool LawCheck::ok() const {
  return total_mass_error <= 1e-12 && (!finite_mean || std::abs(mean) <= 1e-10) && nonnegative &&
         monotone_tails && irreducible;
}

std::string LawCheck::describe() const {
  std::ostringstream os;
  os << "mass_err=" << total_mass_error << " mean=" << (finite_mean ? mean : INFINITY)
     << " nonneg=" << nonnegative << " irreducible=" << irreducible;
  return os.str();
}

StepLaw::StepLaw(std::string name, double p0, Side plus, Side minus, std::int64_t cutoff)
    : name_(std::move(name)), p0_(p0), plus_(std::move(plus)), minus_(std::move(minus)), cutoff_(cutoff) {
  for (Side* s : {&plus_, &minus_}) {
    std::sort(s->atoms.begin(), s->atoms.end());
    for (auto& [j, p] : s->atoms)
      if (j <= 0) throw LawError("side atoms must have positive magnitude");
    for (std::size_t i = 1; i < s->atoms.size(); ++i)
      if (s->atoms[i].first == s->atoms[i - 1].first) throw LawError("duplicate atom");
  }
  init_series();
}

void StepLaw::init_series() {
  series_plus_.reset();
  series_minus_.reset();
  if (plus_.tail.kind == Kind::power) series_plus_.emplace(plus_.tail.s);
  if (minus_.tail.kind == Kind::power) series_minus_.emplace(minus_.tail.s);
}

double StepLaw::pmf(std::int64_t k) const {
  if (k == 0) return p0_;
  const Side& s = k > 0 ? plus_ : minus_;
  std::int64_t j = k > 0 ? k : -k;
  double v = tail_pmf(s.tail, j);
  auto it = std::lower_bound(s.atoms.begin(), s.atoms.end(), std::pair<std::int64_t, double>(j, -INFINITY));
  if (it != s.atoms.end() && it->first == j) v += it->second;
  return v;
}

double StepLaw::moment(Sign sg, int r, std::int64_t a, std::int64_t b) const {
  const Side& s = side(sg);
  a = std::max<std::int64_t>(a, 1);
  double v = 0.0;
  for (auto& [j, p] : s.atoms)
    if (j >= a && j <= b) v += p * std::pow(static_cast<double>(j), r);
  return v + tail_moment(s.tail, r, a, b);
}

double StepLaw::mass_ge(Sign s, std::int64_t n) const { return moment(s, 0, n, k_inf_index); }

double StepLaw::mu(Sign s, double x) const {
  if (x < 0.0) throw std::domain_error("mu: x must be nonnegative");
  if (x >= 9.0e18) return 0.0;
  return mass_ge(s, static_cast<std::int64_t>(std::floor(x)) + 1);
}

bool StepLaw::finite_mean() const {
  return plus_.tail.kind != Kind::harmonic && minus_.tail.kind != Kind::harmonic;
}

double StepLaw::mean() const {
  if (!finite_mean()) return INFINITY;
  return moment(Sign::plus, 1, 1, k_inf_index) - moment(Sign::minus, 1, 1, k_inf_index);
}

double StepLaw::total_mass() const {
  return p0_ + mass_ge(Sign::plus, 1) + mass_ge(Sign::minus, 1);
}

std::int64_t StepLaw::max_jump(Sign sg) const {
  const Side& s = side(sg);
  if (s.tail.kind != Kind::zero) return k_inf_index;
  return s.atoms.empty() ? 0 : s.atoms.back().first;
}

std::int64_t StepLaw::atom_scale() const {
  std::int64_t m = 1;
  for (const Side* s : {&plus_, &minus_})
    if (!s->atoms.empty()) m = std::max(m, s->atoms.back().first);
  return m;
}

std::optional<std::pair<double, double>> StepLaw::pareto_tail(Sign sg) const {
  const auto& d = side(sg).tail;
  if (d.kind == Kind::power) return std::make_pair(d.coef / (d.s - 1.0), d.s - 1.0);
  if (d.kind == Kind::harmonic) return std::make_pair(d.coef, 1.0);
  return std::nullopt;
}

std::complex<double> StepLaw::phi_side(Sign sg, double t) const {
  const Side& s = side(sg);
  std::complex<double> acc = 0.0;
  for (auto& [j, p] : s.atoms) acc += p * atom_phi(static_cast<double>(j) * t);
  const auto& d = s.tail;
  if (d.kind == Kind::power) {
    const auto& ser = (sg == Sign::plus) ? *series_plus_ : *series_minus_;
    std::complex<double> head = 0.0;
    for (std::int64_t k = 1; k < d.k0; ++k)
      head += std::pow(static_cast<double>(k), -d.s) * atom_phi(static_cast<double>(k) * t);
    acc += d.coef * (-ser(t) - head);
  } else if (d.kind == Kind::harmonic) {
    throw LawError("phi_side: infinite mean");
  }
  return acc;
}

std::complex<double> StepLaw::one_minus_psi(double t) const {
  return phi_side(Sign::plus, t) + std::conj(phi_side(Sign::minus, t));
}

std::complex<double> StepLaw::char_fn(double t) const {
  std::complex<double> acc = p0_;
  for (Sign sg : {Sign::plus, Sign::minus}) {
    const Side& s = side(sg);
    std::complex<double> part = 0.0;
    for (auto& [j, p] : s.atoms) part += p * std::polar(1.0, static_cast<double>(j) * t);
    const auto& d = s.tail;
    if (d.kind == Kind::power) {
      const auto& ser = (sg == Sign::plus) ? *series_plus_ : *series_minus_;
      std::complex<double> li = boost::math::zeta(d.s) +
                                std::complex<double>(0.0, boost::math::zeta(d.s - 1.0) * t) + ser(t);
      for (std::int64_t k = 1; k < d.k0; ++k)
        li -= std::pow(static_cast<double>(k), -d.s) * std::polar(1.0, static_cast<double>(k) * t);
      part += d.coef * li;
    } else if (d.kind == Kind::harmonic) {
      std::complex<double> z = std::polar(1.0, t);
      std::complex<double> w = 1.0 - z;
      std::complex<double> full = 1.0 + w * std::log(w) / z;
      for (std::int64_t k = 1; k < d.k0; ++k)
        full -= std::pow(z, static_cast<int>(k)) / (static_cast<double>(k) * (k + 1.0));
      part += d.coef * full;
    }
    acc += (sg == Sign::plus) ? part : std::conj(part);
  }
  return acc;
}

LawCheck StepLaw::check() const {
  LawCheck c;
  c.total_mass_error = std::abs(total_mass() - 1.0);
  c.finite_mean = finite_mean();
  c.mean = c.finite_mean ? mean() : INFINITY;
  c.nonnegative = p0_ >= 0.0;
  std::int64_t g = 0;
  std::vector<std::int64_t> pts;
  if (p0_ > 0.0) pts.push_back(0);
  for (Sign sg : {Sign::plus, Sign::minus}) {
    const Side& s = side(sg);
    int sign = sg == Sign::plus ? 1 : -1;
    for (auto& [j, p] : s.atoms) {
      if (p < 0.0) c.nonnegative = false;
      if (p > 0.0) pts.push_back(sign * j);
    }
    if (s.tail.kind != Kind::zero) {
      if (s.tail.coef < 0.0) c.nonnegative = false;
      if (s.tail.coef > 0.0) {
        pts.push_back(sign * s.tail.k0);
        pts.push_back(sign * (s.tail.k0 + 1));
      }
    }
  }
  // Nonnegative pmf makes mu_+- nonincreasing.
  c.monotone_tails = c.nonnegative;
  // support must generate Z
  for (auto v : pts) g = std::gcd(g, v);
  c.irreducible = (g == 1);
  return c;
}

void StepLaw::validate() const {
  auto c = check();
  if (!c.ok()) throw LawError("law '" + name_ + "' fails invariants: " + c.describe());
}

std::string StepLaw::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name_;
  j["family"] = family_name(spec_.family);
  j["params"] = {{"alpha", fmt17(spec_.alpha)}, {"p", fmt17(spec_.p)}, {"n_max", spec_.n_max},
                 {"tail_const", fmt17(spec_.tail_const)}};
  nlohmann::ordered_json body = nlohmann::ordered_json::array();
  if (p0_ != 0.0) body.push_back({0, fmt17(p0_)});
  for (auto it = minus_.atoms.rbegin(); it != minus_.atoms.rend(); ++it)
    body.push_back({-it->first, fmt17(it->second)});
  for (auto& [k, p] : plus_.atoms) body.push_back({k, fmt17(p)});
  j["body"] = body;
  auto tail = [](const TailDescriptor& d) {
    return nlohmann::ordered_json{{"kind", kind_name(d.kind)}, {"coef", fmt17(d.coef)},
                                  {"s", fmt17(d.s)}, {"k0", d.k0}};
  };
  j["tail_plus"] = tail(plus_.tail);
  j["tail_minus"] = tail(minus_.tail);
  j["cutoff"] = cutoff_;
  return j.dump();
}

StepLaw StepLaw::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw LawError(std::string("law JSON parse error: ") + e.what());
  }
  auto num = [](const nlohmann::json& v) -> double {
    if (v.is_string()) return std::stod(v.get<std::string>());
    return v.get<double>();
  };
  Side plus, minus;
  double p0 = 0.0;
  for (const auto& e : j.at("body")) {
    std::int64_t k = e.at(0).get<std::int64_t>();
    double p = num(e.at(1));
    if (k == 0) p0 += p;
    else if (k > 0) plus.atoms.emplace_back(k, p);
    else minus.atoms.emplace_back(-k, p);
  }
  auto tail = [&](const nlohmann::json& t) {
    TailDescriptor d;
    d.kind = kind_from(t.at("kind").get<std::string>());
    d.coef = num(t.at("coef"));
    d.s = num(t.at("s"));
    d.k0 = t.at("k0").get<std::int64_t>();
    return d;
  };
  plus.tail = tail(j.at("tail_plus"));
  minus.tail = tail(j.at("tail_minus"));
  StepLaw law(j.value("name", std::string("custom")), p0, plus, minus, j.at("cutoff").get<std::int64_t>());
  BuiltinSpec sp;
  sp.family = j.contains("family") ? family_from_name(j["family"].get<std::string>()) : Family::custom;
  if (j.contains("params")) {
    const auto& p = j["params"];
    sp.alpha = num(p.at("alpha"));
    sp.p = num(p.at("p"));
    sp.n_max = p.at("n_max").get<int>();
    sp.tail_const = num(p.at("tail_const"));
  }
  sp.cutoff = law.cutoff();
  law.set_spec(sp);
  return law;
}

std::string StepLaw::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_json()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StepLaw make_builtin(const BuiltinSpec& spec) {
  Side plus, minus;
  double p0 = 0.0;
  std::string name = family_name(spec.family);
  std::int64_t cutoff = spec.cutoff;
  char buf[128];
  switch (spec.family) {
    case Family::simple_pm1:
      plus.atoms = {{1, 0.5}};
      minus.atoms = {{1, 0.5}};
      cutoff = 1;
      break;
    case Family::stable_attraction: {
      const double a = spec.alpha, p = spec.p, q = 1.0 - p;
      if (!(a > 1.0 && a <= 2.0)) throw LawError("stable_attraction: alpha must lie in (1, 2]");
      if (!(p >= 0.0 && p <= 1.0)) throw LawError("stable_attraction: p must lie in [0, 1]");
      const double s = a + 1.0;
      const double zs = boost::math::zeta(s), za = boost::math::zeta(a);
      // p(k) = A p k^{-s} (k >= 1), A q |k|^{-s} (k <= -1); mean fixed by extra mass at +-1
      const double A = 1.0 / (zs + std::abs(p - q) * za);
      const double M = A * (p - q) * za;
      plus.atoms = {{1, A * p + std::max(0.0, -M)}};
      minus.atoms = {{1, A * q + std::max(0.0, M)}};
      if (p > 0.0) plus.tail = {Kind::power, A * p, s, 2};
      if (q > 0.0) minus.tail = {Kind::power, A * q, s, 2};
      std::snprintf(buf, sizeof buf, "stable_attraction(alpha=%g,p=%g)", a, p);
      name = buf;
      break;
    }
    case Family::sparse_spectrum: {
      const double a = spec.alpha;
      if (spec.n_max < 1 || spec.n_max > 5) throw LawError("sparse_spectrum: n_max must lie in 1..5");
      if (!(a > 1.0 && a < 2.0)) throw LawError("sparse_spectrum: alpha must lie in (1, 2)");
      double total = 0.0;
      std::vector<std::pair<std::int64_t, double>> atoms;
      for (int n = 0; n <= spec.n_max; ++n) {
        std::int64_t x = std::int64_t{1} << (n * n);
        double lam = std::exp2(-a * n * n);
        atoms.emplace_back(x, lam);
        total += 2.0 * lam;
      }
      for (auto& [x, w] : atoms) w /= total;
      plus.atoms = atoms;
      minus.atoms = atoms;
      cutoff = atoms.back().first;
      std::snprintf(buf, sizeof buf, "sparse_spectrum(n_max=%d,alpha=%g)", spec.n_max, a);
      name = buf;
      break;
    }
    case Family::renewal_logheavy: {
      const double c = spec.tail_const;
      if (!(c > 0.0 && c <= 1.0)) throw LawError("renewal_logheavy: tail constant must lie in (0, 1]");
      if (c < 1.0) plus.atoms = {{1, 1.0 - c}};
      plus.tail = {Kind::harmonic, c, 0.0, 1};
      std::snprintf(buf, sizeof buf, "renewal_logheavy(c=%g)", c);
      name = buf;
      break;
    }
    case Family::custom:
      throw LawError("make_builtin: custom laws are loaded from JSON");
  }
  StepLaw law(name, p0, plus, minus, cutoff);
  law.set_spec(spec);
  auto chk = law.check();
  if (chk.total_mass_error > 1e-12 || !chk.nonnegative || !chk.irreducible ||
      (chk.finite_mean && std::abs(chk.mean) > 1e-10))
    throw LawError("built-in law fails invariants: " + chk.describe());
  return law;
}

CensorResult censor_transform(const StepLaw& law, std::int64_t n_bound) {
  if (!law.finite_mean()) throw LawError("censor_transform: E|X| must be finite");
  auto big = [&](std::int64_t n) {
    return law.moment(Sign::plus, 1, n + 1, k_inf_index) + law.moment(Sign::minus, 1, n + 1, k_inf_index);
  };
  auto small = [&](std::int64_t n) {
    return law.p0() + (law.mass_ge(Sign::plus, 1) - law.mass_ge(Sign::plus, n + 1)) +
           (law.mass_ge(Sign::minus, 1) - law.mass_ge(Sign::minus, n + 1));
  };
  auto ok = [&](std::int64_t n) { return big(n) <= small(n); };
  std::int64_t hi = 1;
  while (!ok(hi)) {
    if (hi >= n_bound) throw LawError("censor_transform: no admissible N below bound");
    hi = std::min(hi * 2, n_bound);
  }
  std::int64_t lo = hi / 2;  // ok(lo) false or lo == 0
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  const std::int64_t N = hi;
  const double p1 = big(N);
  if (!(p1 > 0.0)) throw LawError("censor_transform: degenerate (all mass within |X| <= N)");
  Side plus, minus;
  plus.atoms = {{1, p1}};
  std::vector<std::pair<std::int64_t, double>> merged;
  for (Sign sg : {Sign::plus, Sign::minus})
    for (auto& [j, p] : law.side(sg).atoms)
      if (j > N) merged.emplace_back(j, p);
  std::sort(merged.begin(), merged.end());
  for (auto& e : merged) {
    if (!minus.atoms.empty() && minus.atoms.back().first == e.first) minus.atoms.back().second += e.second;
    else minus.atoms.push_back(e);
  }
  const auto& tp = law.side(Sign::plus).tail;
  const auto& tm = law.side(Sign::minus).tail;
  TailDescriptor t;
  if (tp.kind != Kind::zero && tm.kind != Kind::zero) {
    if (tp.kind != tm.kind || tp.s != tm.s || tp.k0 != tm.k0)
      throw LawError("censor_transform: tails of different shape cannot be merged");
    t = tp;
    t.coef = tp.coef + tm.coef;
  } else if (tp.kind != Kind::zero) {
    t = tp;
  } else {
    t = tm;
  }
  // tail entries with magnitude <= N were folded into p_*(0)
  if (t.kind != Kind::zero) t.k0 = std::max(t.k0, N + 1);
  minus.tail = t;
  double p0 = small(N) - p1;
  StepLaw out(law.name() + "_censored", p0, plus, minus, std::max<std::int64_t>(law.cutoff(), N + 1));
  return {out, N};
}

Sampler::Sampler(const StepLaw& law, std::int64_t alias_span) {
  std::vector<double> w;
  auto add = [&](std::int64_t v, double p) {
    if (p > 0.0) {
      w.push_back(p);
      value_.push_back(v);
      tail_index_.push_back(-1);
    }
  };
  add(0, law.p0());
  for (Sign sg : {Sign::plus, Sign::minus}) {
    const Side& s = law.side(sg);
    int sign = sg == Sign::plus ? 1 : -1;
    for (auto& [j, p] : s.atoms) add(sign * j, p);
    if (s.tail.kind != Kind::zero) {
      std::int64_t end = s.tail.k0 + alias_span - 1;
      for (std::int64_t j = s.tail.k0; j <= end; ++j) add(sign * j, tail_pmf(s.tail, j));
      TailSampler ts;
      ts.sign = sign;
      ts.desc = s.tail;
      ts.start = end + 1;
      if (s.tail.kind == Kind::power) {
        auto r = [&](double k) {
          double cell = std::pow(k, 1.0 - ts.desc.s) * -std::expm1((1.0 - ts.desc.s) * std::log1p(1.0 / k)) /
                        (ts.desc.s - 1.0);
          return std::pow(k, -ts.desc.s) / cell;
        };
        ts.accept_norm = r(static_cast<double>(ts.start));
      }
      double mass = tail_moment(s.tail, 0, ts.start, k_inf_index);
      if (mass > 0.0) {
        w.push_back(mass);
        value_.push_back(0);
        tail_index_.push_back(static_cast<int>(tails_.size()));
        tails_.push_back(ts);
      }
    }
  }
  // Vose alias construction
  const std::size_t n = w.size();
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = w[i] * static_cast<double>(n) / total;
  table_.assign(n, {1.0, 0});
  std::vector<std::int32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::int32_t>(i));
  while (!small.empty() && !large.empty()) {
    auto s = small.back();
    small.pop_back();
    auto l = large.back();
    table_[s] = {scaled[s], l};
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) table_[i] = {1.0, i};
  for (auto i : small) table_[i] = {1.0, i};
}

std::int64_t Sampler::draw_tail(const TailSampler& ts, Rng& rng) const {
  constexpr double k_cap = 4.0e18;
  const double j0 = static_cast<double>(ts.start);
  if (ts.desc.kind == Kind::harmonic) {
    double k = std::floor(j0 / rng.uniform_pos());
    return ts.sign * static_cast<std::int64_t>(std::min(k, k_cap));
  }
  const double s = ts.desc.s;
  for (;;) {
    double y = j0 * std::pow(rng.uniform_pos(), -1.0 / (s - 1.0));
    double k = std::floor(std::min(y, k_cap));
    double cell = std::pow(k, 1.0 - s) * -std::expm1((1.0 - s) * std::log1p(1.0 / k)) / (s - 1.0);
    double ratio = std::pow(k, -s) / cell;
    if (rng.uniform() * ts.accept_norm <= ratio) return ts.sign * static_cast<std::int64_t>(k);
  }
}

std::int64_t Sampler::operator()(Rng& rng) const {
  const std::uint64_t u = rng.next_u64();
  const std::size_t col = static_cast<std::size_t>(((u >> 32) * table_.size()) >> 32);
  const double coin = (static_cast<double>(u & 0xFFFFFFFFULL) + 0.5) * 0x1.0p-32;
  const Entry& e = table_[col];
  const std::size_t pick = coin < e.prob ? col : static_cast<std::size_t>(e.alias);
  const int ti = tail_index_[pick];
  if (ti >= 0) return draw_tail(tails_[static_cast<std::size_t>(ti)], rng);
  return value_[pick];
}

std::vector<std::int64_t> Sampler::draw(Rng& rng, std::size_t n) const {
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = (*this)(rng);
  return out;
}

}  // namespace htp
