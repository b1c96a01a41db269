#include "htp/potential_kernel.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "htp/parallel.hpp"
#include "htp/quadrature.hpp"

namespace htp {

namespace {

constexpr double k_pi = std::numbers::pi;
constexpr std::int64_t k_cache_nodes = std::int64_t{1} << 23;
constexpr std::int64_t k_max_panels = std::int64_t{1} << 22;

std::mutex fftw_planner_mu;

std::int64_t pow2_at_least(std::int64_t v) {
  std::int64_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

// smallest power-tail index over both sides; 2 when both tails are light
double tail_index(const StepLaw& law) {
  double a = 2.0;
  for (Sign s : {Sign::plus, Sign::minus})
    if (auto pt = law.pareto_tail(s)) a = std::min(a, pt->second);
  return a;
}

bool is_symmetric(const StepLaw& law) {
  const Side& p = law.side(Sign::plus);
  const Side& m = law.side(Sign::minus);
  return p.atoms == m.atoms && p.tail.kind == m.tail.kind && p.tail.coef == m.tail.coef &&
         p.tail.s == m.tail.s && p.tail.k0 == m.tail.k0;
}

void require_recurrent(const StepLaw& law) {
  auto c = law.check();
  if (!c.irreducible) throw LawError("potential kernel: law is not irreducible");
  if (!c.finite_mean || std::abs(c.mean) > 1e-10) throw LawError("potential kernel: law must have zero mean");
}

inline double omc_from(double s, double c) { return c > 0.0 ? s * s / (1.0 + c) : 1.0 - c; }

struct PanelSums {
  double k[4] = {0, 0, 0, 0};
  double e[4] = {0, 0, 0, 0};
  double abs[4] = {0, 0, 0, 0};
};

// integrands: 0 = a, 1 = abar, 2 = b_+, 3 = b_-
PanelSums panel_sums(double x, const double* t, const double* wk, const double* wg, const double* ca,
                     const double* cp, const double* cm) {
  double f[4][15];
  double width = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double s = std::sin(x * t[i]), c = std::cos(x * t[i]);
    f[1][i] = ca[i] * omc_from(s, c);
    f[2][i] = cp[i] * s;
    f[3][i] = cm[i] * s;
    f[0][i] = f[1][i] - f[2][i] + f[3][i];
    width += wk[i];
  }
  PanelSums r;
  for (int q = 0; q < 4; ++q) {
    double K = 0.0, G = 0.0, A = 0.0;
    for (int i = 0; i < 15; ++i) {
      K += wk[i] * f[q][i];
      G += wg[i] * f[q][i];
      A += wk[i] * std::abs(f[q][i]);
    }
    const double mean = K / width;
    double asc = 0.0;
    for (int i = 0; i < 15; ++i) asc += wk[i] * std::abs(f[q][i] - mean);
    r.k[q] = K;
    r.e[q] = gk15_error(K, G, asc, A);
    r.abs[q] = A;
  }
  return r;
}

// geometric extrapolation of the graded panels below the smallest level
void graded_tail(double last, double prev, double& value, double& err) {
  if (prev != 0.0) {
    const double r = last / prev;
    if (r > 0.0 && r < 0.9) {
      const double tail = last * r / (1.0 - r);
      value += tail;
      err += 0.5 * std::abs(tail);
      return;
    }
  }
  err += 10.0 * std::abs(last);
}

}  // namespace

std::string pk_method_name(PkMethod m) { return m == PkMethod::fourier ? "fourier" : "series_oracle"; }

void PotentialTable::reindex() {
  pos_.clear();
  for (std::size_t i = 0; i < x.size(); ++i) pos_[x[i]] = i;
}

bool PotentialTable::has(std::int64_t y) const { return pos_.count(y) > 0; }

std::size_t PotentialTable::index(std::int64_t y) const {
  auto it = pos_.find(y);
  if (it == pos_.end()) throw std::out_of_range("potential table has no entry at x=" + std::to_string(y));
  return it->second;
}

Tolerance default_tolerance(std::int64_t x) {
  const double ax = std::abs(static_cast<double>(x));
  Tolerance t;
  if (ax > 1e3) t.rel = std::min(1e-5, 1e-8 * std::pow(ax / 1e3, 1.5));
  return t;
}

FourierKernel::FourierKernel(std::shared_ptr<const StepLaw> law) : law_(std::move(law)) {
  require_recurrent(*law_);
  const double a = tail_index(*law_);
  levels_ = a < 2.0 ? static_cast<int>(std::clamp(std::ceil(52.0 / (2.0 - a)), 40.0, 400.0)) : 40;
}

void FourierKernel::node_coeffs(double t, double& ca, double& cp, double& cm) const {
  const auto fp = law_->phi_side(Sign::plus, t);
  const auto fm = law_->phi_side(Sign::minus, t);
  const double alpha = (fp.real() + fm.real()) / t;
  const double bp = fp.imag() / t, bm = fm.imag() / t;
  const double gamma = bp - bm;
  // (alpha^2 + gamma^2) t underflows on the deepest graded panels, so divide in stages
  const double g = gamma / alpha;
  const double d = alpha * t * (1.0 + g * g);
  ca = 1.0 / d;
  cp = (bp / alpha) / d;
  cm = (bm / alpha) / d;
}

std::int64_t FourierKernel::min_panels(std::int64_t x) const {
  return pow2_at_least(std::max<std::int64_t>({std::abs(x), law_->atom_scale(), 16}));
}

FourierKernel::Grid FourierKernel::build_grid(std::int64_t P) const {
  Grid g;
  g.P = P;
  g.graded_panels = static_cast<std::size_t>(levels_);
  const std::size_t panels = static_cast<std::size_t>(levels_) + static_cast<std::size_t>(P - 1);
  const std::size_t n = 15 * panels;
  for (auto* v : {&g.t, &g.wk, &g.wg, &g.ca, &g.cp, &g.cm}) v->resize(n);
  const auto& L = gk15_layout();
  const double h = k_pi / static_cast<double>(P);
  const std::size_t chunk = 4096;
  const std::size_t nchunks = (panels + chunk - 1) / chunk;
  parallel_for(nchunks, [&](std::size_t c) {
    for (std::size_t q = c * chunk; q < std::min(panels, (c + 1) * chunk); ++q) {
      double a, b;
      if (q < g.graded_panels) {
        b = std::ldexp(h, -static_cast<int>(q));
        a = 0.5 * b;
      } else {
        const double p = static_cast<double>(q - g.graded_panels + 1);
        a = p * h;
        b = (p + 1.0) * h;
      }
      const double w = b - a;
      for (int i = 0; i < 15; ++i) {
        const std::size_t k = 15 * q + i;
        g.t[k] = a + L.u[i] * w;
        g.wk[k] = L.wk[i] * w;
        g.wg[k] = L.wg[i] * w;
        node_coeffs(g.t[k], g.ca[k], g.cp[k], g.cm[k]);
      }
    }
  });
  return g;
}

std::shared_ptr<const FourierKernel::Grid> FourierKernel::grid(std::int64_t P) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = grids_.find(P);
    if (it != grids_.end()) return it->second;
  }
  auto g = std::make_shared<const Grid>(build_grid(P));
  std::lock_guard<std::mutex> lk(mu_);
  std::int64_t held = 0;
  for (auto& [p, gr] : grids_) held += static_cast<std::int64_t>(gr->t.size());
  if (held + static_cast<std::int64_t>(g->t.size()) > k_cache_nodes) grids_.clear();
  grids_.emplace(P, g);
  return g;
}

KernelPoint FourierKernel::integrate_on(std::int64_t P, std::int64_t x) const {
  double val[4] = {0, 0, 0, 0}, err[4] = {0, 0, 0, 0}, abs_sum[4] = {0, 0, 0, 0};
  double last[4] = {0, 0, 0, 0}, prev[4] = {0, 0, 0, 0};
  const double xd = static_cast<double>(x);
  const std::size_t levels = static_cast<std::size_t>(levels_);
  auto absorb = [&](std::size_t q, const PanelSums& ps) {
    for (int k = 0; k < 4; ++k) {
      val[k] += ps.k[k];
      err[k] += ps.e[k];
      abs_sum[k] += ps.abs[k];
      if (q + 1 == levels) last[k] = ps.k[k];
      if (q + 2 == levels) prev[k] = ps.k[k];
    }
  };
  if (15 * (P + levels_) <= k_cache_nodes) {
    auto g = grid(P);
    const std::size_t panels = g->t.size() / 15;
    for (std::size_t q = 0; q < panels; ++q) {
      const std::size_t o = 15 * q;
      absorb(q, panel_sums(xd, &g->t[o], &g->wk[o], &g->wg[o], &g->ca[o], &g->cp[o], &g->cm[o]));
    }
  } else {
    // too large to cache: stream panels
    const auto& L = gk15_layout();
    const double h = k_pi / static_cast<double>(P);
    const std::size_t panels = levels + static_cast<std::size_t>(P - 1);
    double t[15], wk[15], wg[15], ca[15], cp[15], cm[15];
    for (std::size_t q = 0; q < panels; ++q) {
      double a, b;
      if (q < levels) {
        b = std::ldexp(h, -static_cast<int>(q));
        a = 0.5 * b;
      } else {
        const double p = static_cast<double>(q - levels + 1);
        a = p * h;
        b = (p + 1.0) * h;
      }
      for (int i = 0; i < 15; ++i) {
        t[i] = a + L.u[i] * (b - a);
        wk[i] = L.wk[i] * (b - a);
        wg[i] = L.wg[i] * (b - a);
        node_coeffs(t[i], ca[i], cp[i], cm[i]);
      }
      absorb(q, panel_sums(xd, t, wk, wg, ca, cp, cm));
    }
  }
  KernelPoint kp;
  kp.x = x;
  kp.panels = P;
  KernelValue* out[4] = {&kp.a, &kp.abar, &kp.b_plus, &kp.b_minus};
  for (int k = 0; k < 4; ++k) {
    graded_tail(last[k], prev[k], val[k], err[k]);
    err[k] += 1e-15 * abs_sum[k];
    out[k]->value = val[k] / k_pi;
    out[k]->err = err[k] / k_pi;
  }
  return kp;
}

KernelPoint FourierKernel::eval(std::int64_t x, double tol) const {
  KernelPoint kp;
  kp.x = x;
  if (x == 0) return kp;
  Tolerance tl = tol < 0.0 ? default_tolerance(x) : Tolerance{tol, 0.0};
  auto ok = [&](const KernelValue& v) { return v.err <= std::max(tl.abs, tl.rel * std::abs(v.value)); };
  auto worst = [](const KernelPoint& p) {
    return std::max({p.a.err, p.abar.err, p.b_plus.err, p.b_minus.err});
  };
  const std::int64_t P0 = min_panels(x);
  const std::int64_t cap = std::min(k_max_panels, std::max(P0 * 256, std::int64_t{1} << 12));
  KernelPoint best;
  bool have = false;
  for (std::int64_t P = P0; P <= cap; P *= 2) {
    auto cur = integrate_on(P, x);
    if (ok(cur.a) && ok(cur.abar) && ok(cur.b_plus) && ok(cur.b_minus)) return cur;
    if (!have || worst(cur) < worst(best)) {
      best = cur;
      have = true;
    }
  }
  for (auto* v : {&best.a, &best.abar, &best.b_plus, &best.b_minus}) v->converged = false;
  return best;
}

void FourierKernel::fft_half_table(std::int64_t P, std::int64_t J, std::vector<double>& abar,
                                   std::vector<double>& bp, std::vector<double>& bm) const {
  if (J > P) throw std::invalid_argument("fft table: J exceeds panel count");
  const auto& L = gk15_layout();
  const double h = k_pi / static_cast<double>(P);
  const std::int64_t N = 2 * P;
  abar.assign(J + 1, 0.0);
  bp.assign(J + 1, 0.0);
  bm.assign(J + 1, 0.0);

  double* in = fftw_alloc_real(N);
  fftw_complex* out = fftw_alloc_complex(P + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mu);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(N), in, out, FFTW_ESTIMATE);
  }
  std::vector<double> ca(P), cp(P), cm(P);
  std::vector<std::complex<double>> phase(J + 1);
  for (int k = 0; k < 15; ++k) {
    const std::size_t chunk = 8192;
    const std::size_t nchunks = (static_cast<std::size_t>(P) + chunk - 1) / chunk;
    parallel_for(nchunks, [&](std::size_t c) {
      for (std::size_t p = std::max<std::size_t>(1, c * chunk); p < std::min<std::size_t>(P, (c + 1) * chunk); ++p)
        node_coeffs((static_cast<double>(p) + L.u[k]) * h, ca[p], cp[p], cm[p]);
    });
    for (std::int64_t x = 0; x <= J; ++x) phase[x] = std::polar(1.0, static_cast<double>(x) * L.u[k] * h);
    const double w = L.wk[k] * h;
    for (int which = 0; which < 3; ++which) {
      const std::vector<double>& c = which == 0 ? ca : (which == 1 ? cp : cm);
      double total = 0.0;
      in[0] = 0.0;
      for (std::int64_t p = 1; p < P; ++p) {
        in[p] = w * c[p];
        total += in[p];
      }
      std::fill(in + P, in + N, 0.0);
      fftw_execute(plan);
      std::vector<double>& acc = which == 0 ? abar : (which == 1 ? bp : bm);
      for (std::int64_t x = 0; x <= J; ++x) {
        const std::complex<double> S = phase[x] * std::complex<double>(out[x][0], -out[x][1]);
        acc[x] += which == 0 ? total - S.real() : S.imag();
      }
    }
  }
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mu);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  // graded first panel, phases advanced by rotation
  const std::size_t levels = static_cast<std::size_t>(levels_);
  std::vector<double> last(3 * (J + 1), 0.0), prev(3 * (J + 1), 0.0);
  for (std::size_t q = 0; q < levels; ++q) {
    const double b = std::ldexp(h, -static_cast<int>(q)), a = 0.5 * b;
    for (int i = 0; i < 15; ++i) {
      const double t = a + L.u[i] * (b - a), w = L.wk[i] * (b - a);
      double c0, c1, c2;
      node_coeffs(t, c0, c1, c2);
      const std::complex<double> step = std::polar(1.0, t);
      std::complex<double> z = 1.0;
      for (std::int64_t x = 0; x <= J; ++x) {
        if ((x & 511) == 0) z = std::polar(1.0, static_cast<double>(x) * t);
        const double s = z.imag(), co = z.real();
        const double va = w * c0 * omc_from(s, co), vp = w * c1 * s, vm = w * c2 * s;
        abar[x] += va;
        bp[x] += vp;
        bm[x] += vm;
        if (q + 1 == levels) {
          last[3 * x] += va;
          last[3 * x + 1] += vp;
          last[3 * x + 2] += vm;
        } else if (q + 2 == levels) {
          prev[3 * x] += va;
          prev[3 * x + 1] += vp;
          prev[3 * x + 2] += vm;
        }
        z *= step;
      }
    }
  }
  for (std::int64_t x = 0; x <= J; ++x) {
    double dummy = 0.0;
    graded_tail(last[3 * x], prev[3 * x], abar[x], dummy);
    graded_tail(last[3 * x + 1], prev[3 * x + 1], bp[x], dummy);
    graded_tail(last[3 * x + 2], prev[3 * x + 2], bm[x], dummy);
    abar[x] /= k_pi;
    bp[x] /= k_pi;
    bm[x] /= k_pi;
  }
  abar[0] = bp[0] = bm[0] = 0.0;
}

PotentialTable FourierKernel::dense_table(std::int64_t J) const {
  if (J < 1) throw std::invalid_argument("dense_table: J must be positive");
  const std::int64_t P1 = pow2_at_least(std::max<std::int64_t>({J, law_->atom_scale(), 16}));
  std::vector<double> a1, p1, m1, a2, p2, m2;
  fft_half_table(P1, J, a1, p1, m1);
  fft_half_table(2 * P1, J, a2, p2, m2);
  PotentialTable tab;
  tab.law = law_;
  tab.method = PkMethod::fourier;
  for (std::int64_t x = -J; x <= J; ++x) {
    const std::int64_t ax = std::abs(x);
    const double sg = x < 0 ? -1.0 : 1.0;
    const double abar = a2[ax], bpv = sg * p2[ax], bmv = sg * m2[ax];
    const double e = std::abs(a2[ax] - a1[ax]) + std::abs(p2[ax] - p1[ax]) + std::abs(m2[ax] - m1[ax]) +
                     1e-14 * (1.0 + std::abs(abar));
    tab.x.push_back(x);
    tab.abar.push_back(abar);
    tab.b_plus.push_back(bpv);
    tab.b_minus.push_back(bmv);
    tab.a.push_back(abar + bmv - bpv);
    tab.err.push_back(x == 0 ? 0.0 : e);
  }
  tab.reindex();
  return tab;
}

KernelValue a_fourier(const StepLaw& law, std::int64_t x, double tol) {
  FourierKernel k(std::make_shared<const StepLaw>(law));
  return k.eval(x, tol).a;
}

std::pair<KernelValue, KernelValue> b_pm(const StepLaw& law, std::int64_t x, double tol) {
  FourierKernel k(std::make_shared<const StepLaw>(law));
  auto kp = k.eval(x, tol);
  return {kp.b_plus, kp.b_minus};
}

PotentialTable build_table(std::shared_ptr<const StepLaw> law, const std::vector<std::int64_t>& xs, double tol) {
  if (xs.empty()) throw std::invalid_argument("build_table: empty x-grid");
  FourierKernel k(law);
  std::vector<KernelPoint> pts(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { pts[i] = k.eval(xs[i], tol); });
  PotentialTable tab;
  tab.law = law;
  for (const auto& p : pts) {
    tab.x.push_back(p.x);
    tab.a.push_back(p.a.value);
    tab.abar.push_back(p.abar.value);
    tab.b_plus.push_back(p.b_plus.value);
    tab.b_minus.push_back(p.b_minus.value);
    tab.err.push_back(std::max({p.a.err, p.abar.err, p.b_plus.err, p.b_minus.err}));
  }
  tab.reindex();
  return tab;
}

SeriesOracle::SeriesOracle(std::shared_ptr<const StepLaw> law, int log2_n_max, int levels)
    : law_(std::move(law)), log2_n_max_(log2_n_max), levels_(levels) {
  require_recurrent(*law_);
  if (log2_n_max_ < 8 || log2_n_max_ > 26) throw std::invalid_argument("series oracle: window out of range");
  if (levels_ < 2 || levels_ > log2_n_max_ - 4) throw std::invalid_argument("series oracle: bad level count");
  const std::int64_t N = std::int64_t{1} << log2_n_max_;
  const std::int64_t half = N / 2;
  inv_.assign(half + 1, 0.0);
  psi_.assign(half + 1, 1.0);
  const std::size_t chunk = 8192;
  parallel_for((static_cast<std::size_t>(half) + chunk - 1) / chunk, [&](std::size_t c) {
    for (std::int64_t j = std::max<std::int64_t>(1, c * chunk); j <= std::min<std::int64_t>(half, (c + 1) * chunk);
         ++j) {
      const auto om = law_->one_minus_psi(2.0 * k_pi * static_cast<double>(j) / static_cast<double>(N));
      inv_[j] = 1.0 / om;
      psi_[j] = 1.0 - om;
    }
  });
  const double a = tail_index(*law_);
  finite_var_ = a >= 2.0 && !law_->pareto_tail(Sign::plus) && !law_->pareto_tail(Sign::minus);
  if (finite_var_) {
    double s2 = 0.0, m3 = 0.0;
    for (Sign s : {Sign::plus, Sign::minus}) {
      s2 += law_->moment(s, 2, 1, k_inf_index);
      m3 += (s == Sign::plus ? 1.0 : -1.0) * law_->moment(s, 3, 1, k_inf_index);
    }
    f0_ = 1.0 / s2;
    f0_lin_ = -2.0 * m3 / (3.0 * s2 * s2);
  } else {
    // error exponents of the periodic Riemann sum around the |t|^nu singularity
    const double d = 2.0 - a;
    const double base = is_symmetric(*law_) ? 3.0 - a : 2.0 - a;
    std::vector<double> e;
    for (int m = 0; m < 12; ++m)
      for (int l = 0; l < 6; ++l) e.push_back(base + m * d + l);
    std::sort(e.begin(), e.end());
    for (double v : e)
      if (exps_.empty() || v - exps_.back() > 1e-9) exps_.push_back(v);
    exps_.resize(static_cast<std::size_t>(levels_ - 1));
  }
}

SeriesOracleResult SeriesOracle::eval(std::int64_t x, const std::vector<double>& abel_r) const {
  SeriesOracleResult res;
  if (x == 0) {
    for (double r : abel_r) res.abel.emplace_back(r, 0.0);
    return res;
  }
  const std::int64_t N = std::int64_t{1} << log2_n_max_;
  const std::uint64_t mask = static_cast<std::uint64_t>(N - 1);
  const std::uint64_t xm = static_cast<std::uint64_t>(((x % N) + N) % N);
  const double w0 = 2.0 * k_pi / static_cast<double>(N);
  auto root = [&](std::uint64_t j) { return std::polar(1.0, w0 * static_cast<double>((xm * j) & mask)); };

  std::vector<double> vals;
  for (int l = 0; l < levels_; ++l) {
    const std::int64_t stride = std::int64_t{1} << l;
    const std::int64_t Nl = N / stride;
    double sum = 0.0;
    for (std::int64_t jp = 1; jp < Nl / 2; ++jp) {
      const std::uint64_t j = static_cast<std::uint64_t>(jp * stride);
      sum += 2.0 * ((1.0 - root(j)) * inv_[j]).real();
    }
    sum += ((1.0 - root(static_cast<std::uint64_t>(N / 2))) * inv_[N / 2]).real();
    double v = sum / static_cast<double>(Nl);
    if (finite_var_) {
      const double xd = static_cast<double>(x);
      v += (f0_ * xd * xd + f0_lin_ * xd) / static_cast<double>(Nl);
    }
    vals.push_back(v);
    res.window_values.emplace_back(Nl, v);
  }
  if (finite_var_) {
    res.value = vals[0];
    res.err = std::abs(vals[0] - vals[1]) + 1e-12 * (1.0 + std::abs(vals[0]));
  } else {
    auto extrapolate = [&](int first, int nexp) {
      const int n = nexp + 1;
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd rhs(n);
      for (int r = 0; r < n; ++r) {
        const double h = std::ldexp(1.0, first + r);
        M(r, 0) = 1.0;
        for (int c = 1; c < n; ++c) M(r, c) = std::pow(h / std::ldexp(1.0, first), exps_[c - 1]);
        rhs(r) = vals[first + r];
      }
      return Eigen::VectorXd(M.colPivHouseholderQr().solve(rhs))(0);
    };
    const int ne = levels_ - 1;
    const double full = extrapolate(0, ne);
    const double coarse = extrapolate(0, ne - 1);
    res.value = full;
    res.err = std::abs(full - coarse) + 1e-12 * (1.0 + std::abs(full));
  }
  for (double r : abel_r) {
    double sum = 0.0;
    for (std::int64_t j = 1; j < N / 2; ++j)
      sum += 2.0 * ((1.0 - root(static_cast<std::uint64_t>(j))) / (1.0 - r * psi_[j])).real();
    sum += ((1.0 - root(static_cast<std::uint64_t>(N / 2))) / (1.0 - r * psi_[N / 2])).real();
    res.abel.emplace_back(r, sum / static_cast<double>(N));
  }
  return res;
}

SeriesOracleResult a_series_oracle(std::shared_ptr<const StepLaw> law, std::int64_t x,
                                   const std::vector<double>& abel_r) {
  if (std::abs(x) > 64) throw std::invalid_argument("series oracle is limited to |x| <= 64");
  SeriesOracle o(std::move(law));
  return o.eval(x, abel_r);
}

double a_series_direct(const StepLaw& law, std::int64_t x, int n_steps, std::int64_t window) {
  if (law.max_jump(Sign::plus) == k_inf_index || law.max_jump(Sign::minus) == k_inf_index)
    throw std::invalid_argument("direct series needs a finitely supported law");
  std::vector<std::pair<std::int64_t, double>> atoms;
  if (law.p0() > 0.0) atoms.emplace_back(0, law.p0());
  for (Sign s : {Sign::plus, Sign::minus})
    for (auto& [j, p] : law.side(s).atoms) atoms.emplace_back(s == Sign::plus ? j : -j, p);
  const std::int64_t W = window;
  if (std::abs(x) > W) throw std::invalid_argument("direct series: x outside window");
  std::vector<double> cur(2 * W + 1, 0.0), nxt(2 * W + 1, 0.0);
  cur[W] = 1.0;
  double sum = 0.0, leaked = 0.0;
  for (int n = 0; n < n_steps; ++n) {
    sum += cur[W] - cur[W - x];
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::int64_t i = 0; i <= 2 * W; ++i) {
      if (cur[i] == 0.0) continue;
      for (auto& [d, p] : atoms) {
        const std::int64_t k = i + d;
        if (k < 0 || k > 2 * W) leaked += cur[i] * p;
        else nxt[k] += cur[i] * p;
      }
    }
    cur.swap(nxt);
  }
  if (leaked > 1e-8) throw std::runtime_error("direct series: window overflow");
  return sum;
}

double kappa_alpha(double alpha, double p) {
  const double q = 1.0 - p;
  const double c = std::cos(0.5 * k_pi * alpha), s = std::sin(0.5 * k_pi * alpha);
  return 2.0 * (c * c + (p - q) * (p - q) * s * s) * std::tgamma(alpha) * std::tgamma(3.0 - alpha);
}

std::string BoundReport::summary() const {
  std::ostringstream os;
  os << "abar*m/x in [" << abar_m_over_x_min << ", " << abar_m_over_x_max << "]";
  if (std::isfinite(kappa_inverse)) os << " vs 1/kappa=" << kappa_inverse;
  if (!neg_pos_ratio.empty()) os << "; a(-x)/a(x) at x=" << neg_pos_ratio.back().first << ": " << neg_pos_ratio.back().second;
  os << "; holder ratio " << holder_ratio;
  for (auto& [n, r] : growth) os << "; growth n=" << n << ": " << r;
  return os.str();
}

BoundReport verify_bounds(const PotentialTable& table, const FunctionalProfile& profile) {
  BoundReport rep;
  std::int64_t xmax = 0;
  for (auto x : table.x) xmax = std::max(xmax, x);
  if (xmax < 1) throw std::invalid_argument("verify_bounds: table has no positive x");
  rep.abar_m_over_x_min = INFINITY;
  rep.abar_m_over_x_max = -INFINITY;
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    const auto x = table.x[i];
    if (x <= 0 || 10 * x < xmax) continue;
    const double v = table.abar[i] * profile.basic(static_cast<double>(x)).m / static_cast<double>(x);
    rep.abar_m_over_x_min = std::min(rep.abar_m_over_x_min, v);
    rep.abar_m_over_x_max = std::max(rep.abar_m_over_x_max, v);
  }
  const auto& sp = profile.law().spec();
  rep.kappa_inverse =
      sp.family == Family::stable_attraction ? 1.0 / kappa_alpha(sp.alpha, sp.p) : std::numeric_limits<double>::quiet_NaN();
  std::vector<std::int64_t> pos;
  for (auto x : table.x)
    if (x > 0) pos.push_back(x);
  std::sort(pos.begin(), pos.end());
  for (auto x : pos)
    if (table.has(-x) && table.a_at(x) != 0.0) rep.neg_pos_ratio.emplace_back(x, table.a_at(-x) / table.a_at(x));
  for (auto R : pos)
    for (auto x : pos) {
      if (!(2 * x > R && x < R)) continue;
      const double r = std::abs(1.0 - table.abar_at(x) / table.abar_at(R)) /
                       std::pow(1.0 - static_cast<double>(x) / static_cast<double>(R), 0.25);
      rep.holder_ratio = std::max(rep.holder_ratio, r);
    }
  if (sp.family == Family::sparse_spectrum)
    for (int n = 1; n <= sp.n_max; ++n) {
      const std::int64_t xn = std::int64_t{1} << (n * n);
      if (table.has(xn) && table.has(xn / 2)) rep.growth.emplace_back(n, table.abar_at(xn / 2) / table.abar_at(xn));
    }
  return rep;
}

std::string table_csv(const PotentialTable& t) {
  std::ostringstream os;
  os << "x,a,abar,b_plus,b_minus,err\n";
  for (std::size_t i = 0; i < t.x.size(); ++i)
    os << t.x[i] << ',' << fmt12(t.a[i]) << ',' << fmt12(t.abar[i]) << ',' << fmt12(t.b_plus[i]) << ','
       << fmt12(t.b_minus[i]) << ',' << fmt12(t.err[i]) << '\n';
  return os.str();
}


namespace {

// Least-squares fit of a(sign * y) on y in [J/8, J] with exponents e_i, returned as coefficients.
Eigen::VectorXd fit_asymptotic(const PotentialTable& t, int sign, std::int64_t J, const std::vector<double>& e) {
  const std::int64_t n = 64;
  Eigen::MatrixXd M(n, static_cast<Eigen::Index>(e.size()));
  Eigen::VectorXd b(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t y = J / 8 + (J - J / 8) * i / (n - 1);
    for (std::size_t k = 0; k < e.size(); ++k) M(i, static_cast<Eigen::Index>(k)) = std::pow(double(y) / double(J), e[k]);
    b(i) = t.a_at(sign * y);
  }
  return M.colPivHouseholderQr().solve(b);
}

// sum_{j > J} coef j^{-s} f(j + delta) with f(y) = sum_k c_k (y/J)^{e_k}, second order in delta
double tail_against_fit(double coef, double s, std::int64_t J, double delta, const std::vector<double>& e,
                        const Eigen::VectorXd& c) {
  const double a = double(J + 1), Jd = double(J);
  double v = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double r = e[k], ck = c(static_cast<Eigen::Index>(k)) * std::pow(Jd, -r);
    v += ck * hurwitz_zeta(s - r, a);
    if (r != 0.0) {
      v += ck * delta * r * hurwitz_zeta(s - r + 1.0, a);
      v += ck * 0.5 * delta * delta * r * (r - 1.0) * hurwitz_zeta(s - r + 2.0, a);
    }
  }
  return coef * v;
}

}  // namespace

std::vector<HarmonicResidual> harmonic_check(std::shared_ptr<const StepLaw> law, const std::vector<std::int64_t>& xs,
                                             std::int64_t J) {
  require_recurrent(*law);
  std::int64_t xmax = 0;
  for (auto x : xs) xmax = std::max<std::int64_t>(xmax, x < 0 ? -x : x);
  if (J < 64 || xmax > J / 16) throw std::invalid_argument("harmonic_check: need J >= 64 and |x| <= J/16");
  FourierKernel K(law);
  const PotentialTable T = K.dense_table(std::max(J, law->atom_scale()) + xmax);
  const double alpha = std::min(2.0, tail_index(*law));

  // exponents of the large-y expansion of a: (alpha-1) - n(2-alpha), plus 0 and -1
  auto exponents = [&](int variant) {
    std::vector<double> e;
    auto push = [&](double r) {
      for (double q : e)
        if (std::abs(q - r) < 1e-9) return;
      e.push_back(r);
    };
    const int terms = variant == 0 ? 6 : 4;
    for (int n = 0; n < terms && alpha < 2.0; ++n) {
      const double r = (alpha - 1.0) - n * (2.0 - alpha);
      if (r > -1.6) push(r);
    }
    push(1.0);  // finite variance: linear growth
    push(0.0);
    push(-1.0);
    return e;
  };

  std::map<std::int64_t, double> far;  // a(y) for atoms beyond the table
  auto a_at = [&](std::int64_t y) {
    if (T.has(y)) return std::make_pair(T.a_at(y), T.err_at(y));
    auto it = far.find(y);
    if (it == far.end()) it = far.emplace(y, K.eval(y).a.value).first;
    return std::make_pair(it->second, default_tolerance(y).abs);
  };

  std::vector<HarmonicResidual> out;
  for (auto x : xs) {
    HarmonicResidual r;
    r.x = x;
    r.rhs = (x == 0 ? 1.0 : 0.0) + T.a_at(x);
    double sum = law->p0() * T.a_at(x), err = law->p0() * T.err_at(x);
    for (Sign sg : {Sign::plus, Sign::minus}) {
      const int sign = sg == Sign::plus ? 1 : -1;
      const Side& side = law->side(sg);
      for (auto& [j, p] : side.atoms) {
        auto [v, e] = a_at(x + sign * j);
        sum += p * v;
        err += p * e;
      }
      if (side.tail.kind == TailDescriptor::Kind::zero) continue;
      if (side.tail.kind != TailDescriptor::Kind::power) throw std::invalid_argument("harmonic_check: unsupported tail");
      for (std::int64_t j = side.tail.k0; j <= J; ++j) {
        const double p = side.tail.coef * std::pow(double(j), -side.tail.s);
        sum += p * T.a_at(x + sign * j);
        err += p * T.err_at(x + sign * j);
      }
      double tails[2];
      for (int variant = 0; variant < 2; ++variant) {
        const auto e = exponents(variant);
        const auto c = fit_asymptotic(T, sign, J, e);
        tails[variant] = tail_against_fit(side.tail.coef, side.tail.s, J, double(sign * x), e, c);
      }
      sum += tails[0];
      err += std::abs(tails[0] - tails[1]);
    }
    r.lhs = sum;
    r.err = err;
    out.push_back(r);
  }
  return out;
}

}  // namespace htp
