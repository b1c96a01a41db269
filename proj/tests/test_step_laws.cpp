#include <doctest.h>
#include <gsl/gsl_sf_zeta.h>

#include <cmath>
#include <map>

#include "htp/rng.hpp"
#include "htp/step_laws.hpp"

using namespace htp;

namespace {

std::vector<BuiltinSpec> zero_mean_specs() {
  std::vector<BuiltinSpec> v;
  v.push_back({Family::simple_pm1});
  for (double a : {1.2, 1.5, 1.9})
    for (double p : {0.0, 0.3, 0.5, 1.0}) {
      BuiltinSpec s{Family::stable_attraction};
      s.alpha = a;
      s.p = p;
      v.push_back(s);
    }
  for (int n = 1; n <= 5; ++n) {
    BuiltinSpec s{Family::sparse_spectrum};
    s.n_max = n;
    v.push_back(s);
  }
  return v;
}

}  // namespace

TEST_CASE("builtin laws satisfy the law invariants") {
  for (const auto& spec : zero_mean_specs()) {
    const auto law = make_builtin(spec);
    CAPTURE(law.name());
    const auto chk = law.check();
    CHECK(chk.ok());
    CHECK(chk.total_mass_error < 1e-12);
    CHECK(std::abs(law.mean()) < 1e-10);
    CHECK(law.mu(Sign::plus, 0.0) + law.mu(Sign::minus, 0.0) + law.p0() == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 1.0;
    for (double x : {0.0, 0.5, 1.0, 3.0, 17.0, 1000.0, 1e6}) {
      const double m = law.mu_total(x);
      CHECK(m <= prev + 1e-15);
      prev = m;
    }
  }
  const auto r = make_builtin({Family::renewal_logheavy});
  CHECK(r.check().nonnegative);
  CHECK_FALSE(r.finite_mean());
  CHECK(r.mass_ge(Sign::plus, 10) == doctest::Approx(1.0 / 10.0));
}

TEST_CASE("sparse spectrum atoms") {
  BuiltinSpec s{Family::sparse_spectrum};
  s.n_max = 3;
  const auto law = make_builtin(s);
  const std::int64_t xs[] = {1, 2, 16, 512};
  double total = 0;
  for (int n = 0; n <= 3; ++n) total += 2 * std::exp2(-1.5 * n * n);
  for (int n = 0; n <= 3; ++n) {
    CHECK(law.pmf(xs[n]) == doctest::Approx(std::exp2(-1.5 * n * n) / total).epsilon(1e-14));
    CHECK(law.pmf(-xs[n]) == law.pmf(xs[n]));
  }
  CHECK(law.pmf(3) == 0.0);
  CHECK(law.pmf(0) == 0.0);
  CHECK(law.atom_scale() == 512);
  CHECK(law.max_jump(Sign::plus) == 512);
}

TEST_CASE("stable family tails and moments") {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = 1.5;
  s.p = 0.3;
  const auto law = make_builtin(s);
  // direct partial sum against the closed-form tail
  double direct = 0;
  for (std::int64_t j = 50; j < 2000000; ++j) direct += law.pmf(j);
  const double tail_rest = law.mass_ge(Sign::plus, 2000000);
  CHECK(law.mass_ge(Sign::plus, 50) == doctest::Approx(direct + tail_rest).epsilon(1e-12));
  CHECK(law.moment(Sign::minus, 1, 1, 100) == doctest::Approx([&] {
          double m = 0;
          for (int j = 1; j <= 100; ++j) m += j * law.pmf(-j);
          return m;
        }()).epsilon(1e-13));
  const auto pt = law.pareto_tail(Sign::plus);
  REQUIRE(pt.has_value());
  CHECK(pt->second == doctest::Approx(1.5));
  CHECK(law.mu(Sign::plus, 1e6) / (pt->first * std::pow(1e6, -1.5)) == doctest::Approx(1.0).epsilon(1e-5));
  // mu is right-continuous in x: mu(k) = P[X > k]
  CHECK(law.mu(Sign::plus, 5.0) == doctest::Approx(law.mass_ge(Sign::plus, 6)));
  CHECK(law.mu(Sign::plus, 5.5) == doctest::Approx(law.mass_ge(Sign::plus, 6)));
}

TEST_CASE("characteristic function matches the direct sum") {
  BuiltinSpec s{Family::sparse_spectrum};
  s.n_max = 2;
  const auto law = make_builtin(s);
  for (double t : {0.01, 0.4, 2.9}) {
    std::complex<double> direct = 0;
    for (std::int64_t k = -16; k <= 16; ++k) direct += law.pmf(k) * std::exp(std::complex<double>(0, k * t));
    CHECK(std::abs(law.char_fn(t) - direct) < 1e-14);
    CHECK(std::abs(law.one_minus_psi(t) - (1.0 - direct)) < 1e-14);
  }
  BuiltinSpec st{Family::stable_attraction};
  st.alpha = 1.7;
  st.p = 0.8;
  const auto sl = make_builtin(st);
  for (double t : {1e-4, 0.3, 3.0}) {
    // small-t cancellation check: 1 - psi must stay in the right half plane
    CHECK(sl.one_minus_psi(t).real() > 0.0);
    CHECK(std::abs(sl.one_minus_psi(t) - (1.0 - sl.char_fn(t))) < 1e-9);
  }
}

TEST_CASE("invalid builtin parameters are rejected") {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = 0.9;
  CHECK_THROWS_AS(make_builtin(s), LawError);
  s.alpha = 1.5;
  s.p = 1.2;
  CHECK_THROWS_AS(make_builtin(s), LawError);
  BuiltinSpec sp{Family::sparse_spectrum};
  sp.n_max = 6;
  CHECK_THROWS_AS(make_builtin(sp), LawError);
  CHECK_THROWS_AS(make_builtin({Family::custom}), LawError);
  CHECK_THROWS(family_from_name("cauchy"));
}

TEST_CASE("censor transform") {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = 1.5;
  s.p = 0.5;
  const auto law = make_builtin(s);
  const auto c = censor_transform(law);
  const auto& out = c.law;
  CHECK(c.n_used >= 1);
  for (std::int64_t k = 2; k < 100; ++k) CHECK(out.pmf(k) == 0.0);
  CHECK(out.mass_ge(Sign::plus, 2) == 0.0);
  CHECK(out.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(out.mean()) < 1e-10);
  CHECK(out.check().ok());
  // |X| <= N collapses onto {0, 1}; beyond N both tails fold onto the left
  const std::int64_t N = c.n_used;
  double body = 0.0, big = 0.0;
  for (std::int64_t k = -N; k <= N; ++k) body += law.pmf(k);
  const std::int64_t M = 4000000;
  for (std::int64_t k = N + 1; k < M; ++k) big += double(k) * (law.pmf(k) + law.pmf(-k));
  // pure power tail beyond M: k p(k) = C k^{-alpha}
  big += (law.pmf(M) + law.pmf(-M)) * std::pow(double(M), 2.5) * gsl_sf_hzeta(1.5, double(M));
  CHECK(out.pmf(1) == doctest::Approx(big).epsilon(1e-6));
  CHECK(out.pmf(0) == doctest::Approx(body - out.pmf(1)).epsilon(1e-6));
  for (std::int64_t k = -N; k < 0; ++k) CHECK(out.pmf(k) == 0.0);
  for (std::int64_t k : {N + 1, N + 2, 10 * N, 1000 * N})
    CHECK(out.pmf(-k) == doctest::Approx(law.pmf(k) + law.pmf(-k)).epsilon(1e-12));
  CHECK(out.mass_ge(Sign::minus, N + 1) ==
        doctest::Approx(law.mass_ge(Sign::minus, N + 1) + law.mass_ge(Sign::plus, N + 1)).epsilon(1e-12));

  CHECK_THROWS_AS(censor_transform(make_builtin({Family::simple_pm1})), LawError);
  CHECK_THROWS_AS(censor_transform(make_builtin({Family::renewal_logheavy})), LawError);
}

TEST_CASE("json round trip preserves the law and its hash") {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = 1.3;
  s.p = 0.25;
  for (const auto& law : {make_builtin(s), make_builtin({Family::sparse_spectrum}), make_builtin({Family::simple_pm1})}) {
    const auto text = law.to_json();
    const auto back = StepLaw::from_json(text);
    CHECK(back.to_json() == text);
    CHECK(back.hash() == law.hash());
    for (std::int64_t k : {-1000, -3, -1, 0, 1, 2, 16, 5000}) CHECK(back.pmf(k) == law.pmf(k));
  }
  CHECK(make_builtin(s).hash() != make_builtin({Family::simple_pm1}).hash());
  CHECK_THROWS(StepLaw::from_json("{\"p0\": 2.0}"));
  CHECK_THROWS(StepLaw::from_json("not json"));
}

TEST_CASE("custom law with a nonzero mean fails validation") {
  Side plus, minus;
  plus.atoms = {{1, 0.6}};
  minus.atoms = {{1, 0.4}};
  StepLaw law("drift", 0.0, plus, minus, 1);
  CHECK_FALSE(law.check().ok());
  CHECK_THROWS_AS(law.validate(), LawError);
}

TEST_CASE("sampler reproduces the law") {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = 1.5;
  s.p = 0.3;
  const auto law = make_builtin(s);
  Sampler smp(law);
  Rng rng(7, 0);
  const std::size_t n = 2000000;
  const auto xs = smp.draw(rng, n);
  std::map<std::int64_t, std::size_t> counts;
  std::size_t big = 0;
  for (auto x : xs) {
    if (std::abs(x) <= 5) ++counts[x];
    if (x > 1000) ++big;
  }
  // chi-square on {-5..5} plus the rest
  double chi2 = 0, rest_p = 1.0;
  std::size_t rest_n = n;
  for (std::int64_t k = -5; k <= 5; ++k) {
    const double p = law.pmf(k);
    if (p == 0) continue;
    const double e = p * n;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
    rest_p -= p;
    rest_n -= counts[k];
  }
  chi2 += (rest_n - rest_p * n) * (rest_n - rest_p * n) / (rest_p * n);
  CHECK(chi2 < 35.0);  // 10 degrees of freedom, far in the tail
  const double p_big = law.mu(Sign::plus, 1000.0);
  CHECK(std::abs(double(big) - p_big * n) < 5.0 * std::sqrt(p_big * n));

  BuiltinSpec r{Family::renewal_logheavy};
  Sampler rs(make_builtin(r));
  Rng rng2(9, 3);
  std::size_t over = 0;
  const std::size_t m = 400000;
  for (std::size_t i = 0; i < m; ++i)
    if (rs(rng2) > 100) ++over;
  CHECK(std::abs(double(over) / m - 1.0 / 101.0) < 5.0 * std::sqrt(1.0 / 101.0 / m));

  CHECK(smp.draw(rng, 0).empty());
}

TEST_CASE("sampler is deterministic per stream") {
  const auto law = make_builtin({Family::sparse_spectrum});
  Sampler smp(law);
  Rng a(11, 5), b(11, 5), c(11, 6);
  const auto xa = smp.draw(a, 100), xb = smp.draw(b, 100), xc = smp.draw(c, 100);
  CHECK(xa == xb);
  CHECK(xa != xc);
}
