#include "htp/ladder_renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "htp/mc_engine.hpp"
#include "htp/parallel.hpp"
#include "htp/quadrature.hpp"
#include "htp/rng.hpp"

namespace htp {

std::string ladder_mode_name(LadderMode m) { return m == LadderMode::exact_recursion ? "exact_recursion" : "simulation"; }

LadderMode ladder_mode_from_name(const std::string& s) {
  if (s == "exact_recursion" || s == "exact") return LadderMode::exact_recursion;
  if (s == "simulation" || s == "sim") return LadderMode::simulation;
  throw std::invalid_argument("unknown ladder mode: " + s);
}

namespace {

constexpr std::int64_t k_max_exact_horizon = std::int64_t{1} << 16;

// sum_{j > n} (j - n) p(+-j) = sum_{w >= n} P[+-X > w]
double excess(const StepLaw& law, Sign s, std::int64_t n) {
  if (law.max_jump(s) <= n) return 0.0;
  return law.moment(s, 1, n + 1, k_inf_index) - static_cast<double>(n) * law.mass_ge(s, n + 1);
}

// u(0) = 1/(1 - f(0)), u(x) = sum_{k=1}^x f(k) u(x-k) / (1 - f(0)); only the support of f is visited
std::vector<double> renewal(const std::vector<double>& f, std::size_t n) {
  std::vector<std::size_t> sup;
  for (std::size_t k = 1; k < f.size() && k < n; ++k)
    if (f[k] != 0.0) sup.push_back(k);
  const double d = 1.0 - f[0];
  std::vector<double> u(n, 0.0);
  u[0] = 1.0 / d;
  for (std::size_t x = 1; x < n; ++x) {
    double s = 0.0;
    for (std::size_t k : sup) {
      if (k > x) break;
      s += f[k] * u[x - k];
    }
    u[x] = s / d;
  }
  return u;
}

std::vector<double> cumsum(const std::vector<double>& v) {
  std::vector<double> c(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = (s += v[i]);
  return c;
}

// integral over [0, x] of a right-continuous step function given on integers
std::vector<double> step_integral(const std::vector<double>& gt) {
  std::vector<double> out(gt.size(), 0.0);
  for (std::size_t x = 1; x < gt.size(); ++x) out[x] = out[x - 1] + gt[x - 1];
  return out;
}

void finish(LadderTables& t, const std::vector<double>& ge_minus) {
  const auto n = static_cast<std::size_t>(t.horizon + 1);
  t.u_as = renewal(t.f_Z, n);
  t.v_ds = renewal(t.f_Hw, n);
  t.U_as = cumsum(t.u_as);
  t.V_ds = cumsum(t.v_ds);
  t.ell_plus = step_integral(t.P_Z_gt);
  // strict descending height: P[-Zhat > s] = P[-H_w >= s+1] / (1 - P[H_w = 0])
  std::vector<double> gt(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) gt[s] = ge_minus[s + 1] / (1.0 - t.f_Hw[0]);
  t.ell_minus = step_integral(gt);
  double res = 0.0;
  std::vector<std::size_t> sup;
  for (std::size_t k = 1; k < n; ++k)
    if (t.f_Z[k] != 0.0) sup.push_back(k);
  for (std::size_t x = 0; x < n; ++x) {
    double s = x == 0 ? 1.0 : 0.0;
    for (std::size_t k : sup) {
      if (k > x) break;
      s += t.f_Z[k] * t.u_as[x - k];
    }
    res = std::max(res, std::abs(t.u_as[x] - s));
  }
  t.renewal_residual = res;
}

void exact_skip_free(const StepLaw& law, LadderTables& t) {
  const auto n = static_cast<std::size_t>(t.horizon + 1);
  t.f_Z.assign(n, 0.0);
  t.P_Z_gt.assign(n, 0.0);
  if (n > 1) t.f_Z[1] = 1.0;
  t.P_Z_gt[0] = 1.0;
  // u = 1 on [0, inf), so P[-H_w >= x] = P[X <= -x] summed against u reduces to sum_{w >= x} P[X <= -w]
  std::vector<double> ge(n + 1, 0.0);
  for (std::size_t x = 0; x <= n; ++x)
    ge[x] = x == 0 ? 1.0 : excess(law, Sign::minus, static_cast<std::int64_t>(x) - 1);
  t.f_Hw.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) t.f_Hw[x] = ge[x] - ge[x + 1];
  t.mass_defect = 0.0;  // both ladder laws are proper by construction
  finish(t, ge);
}

// Coupled duality iteration: P[Z > y] = sum_z v(z) P[X > y+z] and P[-H_w >= x] = sum_y u(y) P[X <= -x-y],
// with both ladder laws renormalized to total mass one every sweep.
void exact_general(const StepLaw& law, LadderTables& t, const LadderOptions& opt) {
  const bool bounded =
      law.side(Sign::plus).tail.kind == TailDescriptor::Kind::zero &&
      law.side(Sign::minus).tail.kind == TailDescriptor::Kind::zero;
  const std::int64_t Mp = law.max_jump(Sign::plus), Mm = law.max_jump(Sign::minus);
  const std::int64_t W = bounded ? std::max<std::int64_t>({Mp, Mm, 1}) : t.horizon;
  const auto w = static_cast<std::size_t>(W + 1);

  std::vector<double> gt_plus(2 * w + 1), le_minus(2 * w + 1);  // P[X > k], P[X <= -k]
  for (std::size_t k = 0; k < gt_plus.size(); ++k) {
    gt_plus[k] = law.mu(Sign::plus, static_cast<double>(k));
    le_minus[k] = k == 0 ? 1.0 - law.mass_ge(Sign::plus, 1) : law.mass_ge(Sign::minus, static_cast<std::int64_t>(k));
  }
  std::vector<double> tail_plus(w + 1), tail_minus(w + 2);
  for (std::size_t y = 0; y <= w; ++y) tail_plus[y] = bounded ? 0.0 : excess(law, Sign::plus, static_cast<std::int64_t>(y) + W + 1);
  for (std::size_t x = 0; x <= w; ++x) tail_minus[x] = bounded ? 0.0 : excess(law, Sign::minus, static_cast<std::int64_t>(x) + W);

  std::vector<double> v(w, 1.0), u(w, 1.0), pz(w + 1), fz(w + 1, 0.0), ge(w + 2), fh(w + 1, 0.0);
  double c1 = 1.0, c2 = 1.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    for (std::size_t y = 0; y <= w; ++y) {
      double s = 0.0;
      for (std::size_t z = 0; z < w; ++z) s += v[z] * gt_plus[y + z];
      pz[y] = s + v[w - 1] * tail_plus[std::min(y, w)];
    }
    c1 = pz[0];
    for (auto& p : pz) p /= c1;
    for (std::size_t y = 1; y <= w; ++y) fz[y] = pz[y - 1] - pz[y];
    u = renewal(fz, w);
    for (std::size_t x = 0; x <= w + 1; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < w && x + y < le_minus.size(); ++y) s += u[y] * le_minus[x + y];
      ge[x] = s + u[w - 1] * tail_minus[std::min(x, w)];
    }
    c2 = ge[0];
    for (auto& g : ge) g /= c2;
    for (std::size_t x = 0; x <= w; ++x) fh[x] = ge[x] - ge[x + 1];
    auto vn = renewal(fh, w);
    double diff = 0.0, scale = 0.0;
    for (std::size_t z = 0; z < w; ++z) {
      diff = std::max(diff, std::abs(vn[z] - v[z]));
      scale = std::max(scale, std::abs(vn[z]));
    }
    v.swap(vn);
    if (opt.progress && it % 1000 == 0) opt.progress("ladder iteration " + std::to_string(it) + " change " + std::to_string(diff));
    if (diff <= opt.tol * scale) break;
  }
  if (it >= opt.max_iterations) throw std::runtime_error("ladder_law: duality iteration did not converge");
  t.iterations = it + 1;
  t.mass_defect = std::abs(1.0 - c1) + std::abs(1.0 - c2);

  const auto n = static_cast<std::size_t>(t.horizon + 1);
  t.f_Z.assign(n, 0.0);
  t.f_Hw.assign(n, 0.0);
  t.P_Z_gt.assign(n, 0.0);
  std::vector<double> gem(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (k <= w) {
      t.f_Z[k] = k == 0 ? 0.0 : fz[k];
      t.f_Hw[k] = fh[k];
      t.P_Z_gt[k] = pz[k];
    }
  }
  for (std::size_t k = 0; k <= n; ++k) gem[k] = k <= w + 1 ? ge[k] : 0.0;
  finish(t, gem);
}

void simulate(const StepLaw& law, LadderTables& t, const LadderOptions& opt) {
  const auto n = static_cast<std::size_t>(t.horizon + 1);
  const Sampler draw(law);
  const auto nc = (opt.replicas + k_chunk_replicas - 1) / k_chunk_replicas;
  struct Acc {
    std::vector<std::uint64_t> z, h;  // histograms, last cell collects values beyond the horizon
    std::uint64_t overflows = 0;
  };
  std::vector<Acc> acc(nc);
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(opt.seed, c);
    Acc& a = acc[c];
    a.z.assign(n + 1, 0);
    a.h.assign(n + 1, 0);
    const auto m = std::min(k_chunk_replicas, opt.replicas - c * k_chunk_replicas);
    for (std::uint64_t i = 0; i < m; ++i) {
      for (int pass = 0; pass < 2; ++pass) {
        std::int64_t s = 0;
        bool done = false;
        for (std::uint64_t k = 0; k < opt.step_budget; ++k) {
          s += draw(rng);
          if (pass == 0 ? s > 0 : s <= 0) {
            done = true;
            break;
          }
        }
        if (!done) {
          ++a.overflows;
          continue;
        }
        auto v = static_cast<std::uint64_t>(pass == 0 ? s : -s);
        (pass == 0 ? a.z : a.h)[std::min<std::uint64_t>(v, n)]++;
      }
    }
  });
  std::vector<double> hz(n + 1, 0.0), hh(n + 1, 0.0);
  double nz = 0, nh = 0;
  for (const auto& a : acc) {
    t.overflows += a.overflows;
    for (std::size_t k = 0; k <= n; ++k) {
      hz[k] += static_cast<double>(a.z[k]);
      hh[k] += static_cast<double>(a.h[k]);
    }
  }
  for (std::size_t k = 0; k <= n; ++k) {
    nz += hz[k];
    nh += hh[k];
  }
  if (static_cast<double>(t.overflows) > 1e-3 * 2.0 * static_cast<double>(opt.replicas))
    throw std::runtime_error("ladder_law: simulation step budget exceeded on more than 1e-3 of the paths");
  t.f_Z.assign(n, 0.0);
  t.f_Hw.assign(n, 0.0);
  t.P_Z_gt.assign(n, 0.0);
  std::vector<double> ge(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    t.f_Z[k] = hz[k] / nz;
    t.f_Hw[k] = hh[k] / nh;
  }
  double above = 1.0;
  for (std::size_t k = 0; k < n; ++k) t.P_Z_gt[k] = (above -= t.f_Z[k]);
  double g = 1.0;
  for (std::size_t k = 0; k <= n; ++k) {
    ge[k] = std::max(g, 0.0);
    if (k < n) g -= t.f_Hw[k];
  }
  finish(t, ge);
}

}  // namespace

LadderTables ladder_law(std::shared_ptr<const StepLaw> law, const LadderOptions& opt) {
  if (opt.horizon < 1) throw std::invalid_argument("ladder_law: horizon must be positive");
  auto c = law->check();
  if (!c.irreducible || !c.finite_mean || std::abs(c.mean) > 1e-10)
    throw LawError("ladder_law: needs an irreducible zero-mean law");
  LadderTables t;
  t.law = law;
  t.method = opt.mode;
  t.horizon = opt.horizon;
  if (opt.mode == LadderMode::exact_recursion) {
    if (opt.horizon > k_max_exact_horizon) throw std::invalid_argument("ladder_law: horizon too large for exact mode");
    if (skip_free_up(*law))
      exact_skip_free(*law, t);
    else
      exact_general(*law, t, opt);
  } else {
    simulate(*law, t, opt);
  }
  return t;
}

double halfline_green(const LadderTables& t, std::int64_t x, std::int64_t y) {
  if (x < 1 || y < 1) throw std::invalid_argument("halfline_green: x, y must be positive");
  if (x - 1 > t.horizon || y - 1 > t.horizon) throw std::out_of_range("halfline_green: horizon exceeded");
  double s = 0.0;
  for (std::int64_t k = 1; k <= std::min(x, y); ++k) s += t.v_ds[x - k] * t.u_as[y - k];
  return s;
}

std::string ladder_csv(const LadderTables& t) {
  std::ostringstream os;
  os << "x,P_Z_gt,u_as,V_ds,ell_plus,ell_minus\n";
  for (std::int64_t x = 0; x <= t.horizon; ++x)
    os << x << ',' << fmt12(t.P_Z_gt[x]) << ',' << fmt12(t.u_as[x]) << ',' << fmt12(t.V_ds[x]) << ','
       << fmt12(t.ell_plus[x]) << ',' << fmt12(t.ell_minus[x]) << '\n';
  return os.str();
}

RenewalCheck renewal_asymptotic_check(const StepLaw& T, std::int64_t x_max, std::vector<std::int64_t> probes) {
  const Side& neg = T.side(Sign::minus);
  if (!neg.atoms.empty() || neg.tail.kind != TailDescriptor::Kind::zero)
    throw std::invalid_argument("renewal check: T must be supported on {0, 1, 2, ...}");
  if (!T.check().irreducible) throw std::invalid_argument("renewal check: periodic T");
  if (x_max < 1) throw std::invalid_argument("renewal check: x_max must be positive");
  const auto n = static_cast<std::size_t>(x_max + 1);
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = T.pmf(static_cast<std::int64_t>(k));
  RenewalCheck r;
  r.u = renewal(f, n);
  std::vector<double> G(n, 0.0);
  for (std::size_t x = 1; x < n; ++x) G[x] = G[x - 1] + T.mu(Sign::plus, static_cast<double>(x - 1));
  std::vector<std::int64_t> xs;
  for (double b = 1; b <= static_cast<double>(x_max); b *= 10)
    for (double m : {1.0, 2.0, 5.0})
      if (b * m < static_cast<double>(x_max)) xs.push_back(static_cast<std::int64_t>(b * m));
  xs.push_back(x_max);
  for (auto x : xs) r.rows.push_back({x, r.u[x], G[x], r.u[x] * G[x]});

  constexpr double pi = std::numbers::pi;
  auto S = [&](double th) { return (1.0 / (1.0 - T.char_fn(th))).imag(); };
  for (auto x : probes) {
    if (x < 1 || x > x_max) continue;
    const double h = pi / static_cast<double>(x);
    std::vector<QuadResult> parts(static_cast<std::size_t>(x));
    parallel_for(parts.size(), [&](std::size_t k) {
      parts[k] = integrate([&](double th) { return S(th) * std::sin(static_cast<double>(x) * th); },
                           h * static_cast<double>(k), h * static_cast<double>(k + 1), 1e-13, 1e-12, 400);
    });
    double v = 0.0, e = 0.0;
    for (const auto& p : parts) {
      v += p.value;
      e += p.err;
    }
    r.probe_x.push_back(x);
    r.probe_recursion.push_back(r.u[x]);
    r.probe_sine.push_back(2.0 / pi * v);
    r.probe_err.push_back(2.0 / pi * e);
    r.max_probe_diff = std::max(r.max_probe_diff, std::abs(2.0 / pi * v - r.u[x]));
  }
  return r;
}

std::string StabilityReport::summary() const {
  std::ostringstream os;
  const char* names[] = {"C1", "C2", "overshoot"};
  os << names[static_cast<int>(mode)] << ": " << verdict_name(verdict);
  if (!series.empty()) os << " final ratio " << fmt12(series.back().second) << " at x=" << fmt12(series.back().first);
  for (const auto& o : overshoot)
    os << "; R=" << o.R << " eps=" << o.eps << " P=" << fmt12(o.estimate) << " se=" << fmt12(o.se);
  return os.str();
}

StabilityReport stability_check(std::shared_ptr<const StepLaw> law, StabilityMode mode, std::uint64_t replicas,
                                std::uint64_t seed, std::vector<std::int64_t> Rs, std::vector<double> eps) {
  StabilityReport r;
  r.mode = mode;
  if (mode == StabilityMode::overshoot) {
    for (auto R : Rs) {
      auto o = overshoot_law(*law, R, Conditioning::none, eps, replicas, seed);
      for (std::size_t k = 0; k < eps.size(); ++k)
        r.overshoot.push_back({R, eps[k], 1.0 - o.points[k].cdf, o.points[k].se, o.accepted, o.overflows});
    }
    bool ok = true, any_overflow = false;
    for (const auto& o : r.overshoot) {
      if (o.R == Rs.back() && o.estimate - 4.0 * o.se > 0.05) ok = false;
      if (static_cast<double>(o.overflows) > 1e-3 * static_cast<double>(replicas)) any_overflow = true;
    }
    r.verdict = any_overflow ? Verdict::inconclusive : ok ? Verdict::holds : Verdict::fails;
    return r;
  }
  for (int k = 4; k <= 24; ++k) {
    const double x = std::ldexp(1.0, k);
    const auto b = eval_basic(*law, x);
    double ratio;
    if (mode == StabilityMode::C1) {
      const double mu = b.mu_plus + b.mu_minus;
      ratio = mu > 0.0 ? b.A / (x * mu) : INFINITY;
    } else {
      ratio = b.m > 0.0 ? x * b.eta_plus / b.m : 0.0;
    }
    r.series.emplace_back(x, ratio);
  }
  const double last = r.series.back().second;
  const double prev = r.series[r.series.size() - 4].second;  // one decade (2^3 + ~) earlier
  if (mode == StabilityMode::C1) {
    if (std::isinf(last) || (last > 10.0 && last > prev))
      r.verdict = Verdict::holds;
    else if (last < 10.0 && last <= 1.05 * prev)
      r.verdict = Verdict::fails;
  } else {
    if (last < 0.05 || last < 0.5 * prev)
      r.verdict = Verdict::holds;
    else if (last >= 0.1 && last >= 0.95 * prev)
      r.verdict = Verdict::fails;
  }
  return r;
}

}  // namespace htp
