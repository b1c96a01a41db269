#include <doctest.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "htp/step_laws.hpp"
#include "htp/tail_functionals.hpp"

using namespace htp;

namespace {

StepLaw stable(double alpha, double p) {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = alpha;
  s.p = p;
  return make_builtin(s);
}

// per-atom contributions of the truncated integrals
struct Oracle {
  double mu = 0, eta = 0, c = 0, m = 0, m_tilde = 0;
};

void add_atom(Oracle& o, double j, double p, double x) {
  if (j > x) {
    o.mu += p;
    o.eta += p * (j - x);
    o.c += p * x * x / 2;
    o.m += p * (j * x - x * x / 2);
    o.m_tilde += p * (j * x * x / 2 - x * x * x / 3) * 2 / x;
  } else {
    o.c += p * j * j / 2;
    o.m += p * j * j / 2;
    o.m_tilde += p * (j * j * j / 6) * 2 / x;
  }
}

// stable side: atom at 1 plus coef j^{-s} for j >= 2; tail beyond x via Hurwitz zeta
Oracle stable_side(const StepLaw& law, Sign sg, double x) {
  Oracle o;
  const auto& side = law.side(sg);
  for (auto [j, p] : side.atoms) add_atom(o, double(j), p, x);
  const auto& t = side.tail;
  if (t.kind == TailDescriptor::Kind::zero) return o;
  const auto n = std::max<std::int64_t>(t.k0, std::int64_t(std::floor(x)) + 1);
  for (std::int64_t j = t.k0; j < n; ++j) add_atom(o, double(j), t.coef * std::pow(double(j), -t.s), x);
  const double z0 = gsl_sf_hzeta(t.s, double(n)), z1 = gsl_sf_hzeta(t.s - 1, double(n));
  o.mu += t.coef * z0;
  o.eta += t.coef * (z1 - x * z0);
  o.c += t.coef * z0 * x * x / 2;
  o.m += t.coef * (x * z1 - x * x / 2 * z0);
  o.m_tilde += t.coef * (z1 * x * x / 2 - z0 * x * x * x / 3) * 2 / x;
  return o;
}

}  // namespace

TEST_CASE("simple walk functionals") {
  const auto law = make_builtin({Family::simple_pm1});
  const auto b = eval_basic(law, 1.0);
  CHECK(b.c == doctest::Approx(0.5));
  CHECK(b.m == doctest::Approx(0.5));
  CHECK(b.eta == 0.0);
  CHECK(b.mu_plus == 0.0);
  const auto h = eval_basic(law, 0.5);
  CHECK(h.mu_plus == 0.5);
  CHECK(h.eta_plus == doctest::Approx(0.25));
  CHECK(h.c_plus == doctest::Approx(0.0625));
  CHECK(h.m == doctest::Approx(2 * (0.0625 + 0.5 * 0.25)));
  // finite variance: c and m saturate at sigma^2 / 2
  const auto far = eval_basic(law, 1e6);
  CHECK(far.m == doctest::Approx(0.5));
  CHECK(far.A == 0.0);
}

TEST_CASE("truncated functionals against zeta sums") {
  for (auto law : {stable(1.5, 0.3), stable(1.2, 1.0), stable(1.9, 0.0)}) {
    CAPTURE(law.name());
    for (double x : {0.5, 1.0, 2.5, 37.0, 1e3, 123456.7}) {
      for (Sign sg : {Sign::plus, Sign::minus}) {
        const auto o = stable_side(law, sg, x);
        const auto f = side_functionals(law, sg, x);
        CHECK(f.mu == doctest::Approx(o.mu).epsilon(1e-11));
        CHECK(f.eta == doctest::Approx(o.eta).epsilon(1e-10));
        CHECK(f.c == doctest::Approx(o.c).epsilon(1e-11));
        CHECK(f.m == doctest::Approx(o.m).epsilon(1e-10));
        CHECK(f.m_tilde == doctest::Approx(o.m_tilde).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("functionals are monotone with the expected shape") {
  for (auto law : {stable(1.5, 0.3), make_builtin({Family::sparse_spectrum}), make_builtin({Family::simple_pm1})}) {
    CAPTURE(law.name());
    BasicRecord prev = eval_basic(law, 0.25);
    for (double x = 0.5; x < 1e7; x *= 1.37) {
      const auto b = eval_basic(law, x);
      CHECK(b.mu_plus + b.mu_minus <= prev.mu_plus + prev.mu_minus + 1e-15);
      CHECK(b.eta <= prev.eta + 1e-12);
      CHECK(b.c >= prev.c - 1e-12);
      CHECK(b.m >= prev.m - 1e-12);
      // m is concave: the chord slope lies between the end derivatives eta
      const double slope = (b.m - prev.m) / (x - prev.x);
      CHECK(slope <= prev.eta * (1 + 1e-9) + 1e-12);
      CHECK(slope >= b.eta * (1 - 1e-9) - 1e-12);
      CHECK(b.c <= b.m * (1 + 1e-12));
      prev = b;
    }
  }
}

TEST_CASE("one minus psi splits into alpha and gamma") {
  for (auto law : {stable(1.5, 0.3), stable(1.8, 0.0), make_builtin({Family::sparse_spectrum})}) {
    for (double t : {1e-5, 1e-3, 0.1, 1.0, 3.14159}) {
      const auto f = eval_freq(law, t);
      const auto direct = 1.0 - law.char_fn(t);
      CHECK(std::abs(f.one_minus_psi - std::complex<double>(t * f.alpha, t * f.gamma)) < 1e-14);
      CHECK(std::abs(f.one_minus_psi - direct) < 1e-10);
      CHECK(std::abs(f.psi + f.one_minus_psi - 1.0) < 1e-15);
      CHECK(f.alpha > 0.0);
      CHECK(f.f_circ == doctest::Approx(1.0 / (f.alpha * f.alpha + f.gamma * f.gamma)));
    }
  }
  CHECK_THROWS(eval_freq(stable(1.5, 0.3), 0.0));
  CHECK_THROWS(eval_freq(stable(1.5, 0.3), 4.0));
  CHECK_THROWS(eval_basic(stable(1.5, 0.3), -1.0));
}

TEST_CASE("profile caches agree with direct evaluation") {
  auto law = std::make_shared<const StepLaw>(stable(1.5, 0.3));
  FunctionalProfile prof(law, {10.0, 1.0}, {0.5});
  CHECK(prof.grid_x().front() == 1.0);
  const auto a = prof.basic(10.0), b = prof.basic(10.0);
  CHECK(a.m == b.m);
  CHECK(a.m == eval_basic(*law, 10.0).m);
  CHECK(prof.freq(0.5).alpha == eval_freq(*law, 0.5).alpha);
}

TEST_CASE("regularity conditions") {
  SUBCASE("one-sided heavy tail to the left") {
    const auto rep = check_conditions(stable(1.5, 0.0));
    CHECK(rep.get("m_plus_over_m_to_zero").verdict == Verdict::holds);
    CHECK(rep.get("H1").verdict == Verdict::holds);
    CHECK(rep.get("H").verdict == Verdict::holds);
  }
  SUBCASE("balanced tails") {
    const auto rep = check_conditions(stable(1.5, 0.5));
    CHECK(rep.get("m_plus_over_m_to_zero").verdict == Verdict::fails);
    // x eta / m tends to 2 - alpha
    CHECK(rep.get("H1_total").proxy == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.get("H2").proxy == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("sparse spectrum") {
    const auto rep = check_conditions(make_builtin({Family::sparse_spectrum}));
    CHECK(rep.c_over_m_min < 0.5);
    CHECK(rep.c_over_m_max == doctest::Approx(1.0));
  }
  CHECK_THROWS(check_conditions(stable(1.5, 0.5), 16.0));
  CHECK_THROWS(check_conditions(stable(1.5, 0.5)).get("nonexistent"));
}

TEST_CASE("sandwich bounds hold for heavy-tailed laws") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(std::log(1e-6), std::log(3.14159));
  std::vector<double> ts;
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 300; ++i) {
    const double t = std::exp(u(gen));
    ts.push_back(t);
    const double s = std::min(t * (1.0 + std::uniform_real_distribution<double>(0, 1)(gen)), 3.14159);
    pairs.emplace_back(t, s);
  }
  for (auto law : {stable(1.5, 0.3), stable(1.2, 0.0), stable(1.9, 1.0)}) {
    CAPTURE(law.name());
    const auto rep = audit_lemma_bounds(law, ts, pairs);
    CHECK(rep.checks > 0);
    CHECK(rep.violations.empty());
  }
  CHECK_THROWS(audit_lemma_bounds(stable(1.5, 0.3), {}, {{0.5, 0.2}}));
}

TEST_CASE("csv output") {
  const auto law = make_builtin({Family::simple_pm1});
  const auto csv = basic_csv({eval_basic(law, 1.0), eval_basic(law, 2.0)});
  CHECK(csv.rfind("x,mu_plus", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
