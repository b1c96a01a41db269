#include <doctest.h>

#include <cmath>
#include <memory>

#include "htp/potential_kernel.hpp"
#include "oracles.hpp"

using namespace htp;

namespace {

std::shared_ptr<const StepLaw> shared(const BuiltinSpec& s) { return std::make_shared<const StepLaw>(make_builtin(s)); }

std::shared_ptr<const StepLaw> stable(double alpha, double p) {
  BuiltinSpec s{Family::stable_attraction};
  s.alpha = alpha;
  s.p = p;
  return shared(s);
}

std::shared_ptr<const StepLaw> sparse(int n_max) {
  BuiltinSpec s{Family::sparse_spectrum};
  s.n_max = n_max;
  return shared(s);
}

// g_{{0}}(x, x) on [-W, W], the walk killed at 0 and on leaving the window
double killed_diagonal(const StepLaw& law, std::int64_t x, std::int64_t W) {
  const std::int64_t J = oracle::jump_range(law), n = 2 * W + 1;
  oracle::BandedSystem sys(n, J);
  for (std::int64_t i = 0; i < n; ++i) {
    sys.at(i, i) = 1.0;
    if (i == W) continue;
    for (std::int64_t d = -J; d <= J; ++d)
      if (i + d >= 0 && i + d < n) sys.at(i, i + d) -= law.pmf(d);
  }
  sys.factor();
  std::vector<double> e(n, 0.0);
  e[x + W] = 1.0;
  return sys.solve(e)[x + W];
}

}  // namespace

TEST_CASE("simple walk potential kernel is |x|") {
  FourierKernel K(shared({Family::simple_pm1}));
  for (std::int64_t x : {-40, -5, -1, 0, 1, 5, 40, 1000}) {
    const auto kp = K.eval(x);
    CHECK(kp.a.value == doctest::Approx(double(std::abs(x))).epsilon(1e-9));
    CHECK(kp.b_plus.value == doctest::Approx(kp.b_minus.value).epsilon(1e-9));
  }
  CHECK(K.eval(0).a.value == doctest::Approx(0.0).epsilon(1e-12));
  const auto t = K.dense_table(64);
  for (std::int64_t x = -64; x <= 64; ++x) CHECK(std::abs(t.a_at(x) - std::abs(x)) < 1e-8);
}

TEST_CASE("kernel against the killed-chain diagonal") {
  const auto law = sparse(2);
  FourierKernel K(law);
  for (std::int64_t x : {1, 3, 16, 40}) {
    const double v = oracle::richardson3(killed_diagonal(*law, x, 4096), killed_diagonal(*law, x, 8192),
                                         killed_diagonal(*law, x, 16384));
    const auto kp = K.eval(x);
    CAPTURE(x);
    CHECK(2.0 * kp.abar.value == doctest::Approx(v).epsilon(1e-6));
  }
}

TEST_CASE("symmetric laws have a symmetric kernel") {
  for (auto law : {stable(1.5, 0.5), sparse(3)}) {
    FourierKernel K(law);
    for (std::int64_t x : {2, 17, 300}) {
      const auto p = K.eval(x), m = K.eval(-x);
      CHECK(p.a.value == doctest::Approx(m.a.value).epsilon(1e-8));
      CHECK(std::abs(p.b_plus.value - p.b_minus.value) < 1e-8 * std::max(1.0, p.a.value));
    }
  }
}

TEST_CASE("pointwise quadrature and the dense table agree") {
  const auto law = stable(1.9, 0.3);
  FourierKernel K(law);
  const auto t = K.dense_table(2048);
  for (std::int64_t x : {-1000, -37, 1, 250, 1000}) {
    const auto kp = K.eval(x);
    CAPTURE(x);
    const double tol = default_tolerance(x).abs + default_tolerance(x).rel * std::abs(kp.a.value);
    CHECK(std::abs(kp.a.value - t.a_at(x)) <= 4 * tol + kp.a.err + t.err_at(x));
    CHECK(kp.abar.value == doctest::Approx(t.abar_at(x)).epsilon(1e-7));
  }
  const auto tab = build_table(law, {3, -3, 1000});
  CHECK(tab.a_at(1000) == doctest::Approx(t.a_at(1000)).epsilon(1e-7));
  CHECK_THROWS_AS(tab.a_at(4), std::out_of_range);
  CHECK(tab.a_dagger(3) == tab.a_at(3));
}

TEST_CASE("kernel is subadditive and nonnegative") {
  for (auto law : {stable(1.5, 0.3), stable(1.3, 0.0), sparse(3)}) {
    const auto t = FourierKernel(law).dense_table(600);
    CAPTURE(law->name());
    for (std::int64_t x = -300; x <= 300; x += 7) {
      CHECK(t.a_at(x) >= -1e-9);
      for (std::int64_t y = -300; y <= 300; y += 13) CHECK(t.a_at(x + y) <= t.a_at(x) + t.a_at(y) + 1e-7);
    }
  }
}

TEST_CASE("harmonicity residuals") {
  for (auto law : {stable(1.5, 0.3), stable(1.8, 0.0), sparse(2), shared({Family::simple_pm1})}) {
    CAPTURE(law->name());
    const auto res = harmonic_check(law, {-30, -1, 0, 1, 7, 30}, 1 << 12);
    for (const auto& r : res) {
      CAPTURE(r.x);
      CHECK(std::abs(r.lhs - r.rhs) <= 5e-8 + r.err);
    }
  }
  CHECK_THROWS(harmonic_check(stable(1.5, 0.3), {1000}, 1 << 12));
}

TEST_CASE("series oracle agrees with the Fourier kernel") {
  const auto law = stable(1.5, 0.3);
  SeriesOracle so(law, 18);
  FourierKernel K(law);
  for (std::int64_t x : {-8, 3, 20}) {
    const auto o = so.eval(x);
    const auto kp = K.eval(x);
    CAPTURE(x);
    CHECK(std::abs(o.value - kp.a.value) <= std::max(1e-3, 3 * (o.err + kp.a.err)));
    CHECK_FALSE(o.window_values.empty());
  }
  // truncated direct convolution on a small law
  const auto sp = sparse(1);
  const double direct = a_series_direct(*sp, 2, 20000, 4096);
  CHECK(direct == doctest::Approx(FourierKernel(sp).eval(2).a.value).epsilon(1e-2));
}

TEST_CASE("bounds report") {
  auto law = shared({Family::simple_pm1});
  std::vector<std::int64_t> xs;
  for (std::int64_t x = -200; x <= 200; x += 10) xs.push_back(x);
  const auto t = build_table(law, xs);
  FunctionalProfile prof(law);
  const auto rep = verify_bounds(t, prof);
  CHECK(rep.abar_m_over_x_min == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(rep.abar_m_over_x_max == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::isnan(rep.kappa_inverse));
  CHECK(rep.neg_pos_ratio.back().second == doctest::Approx(1.0));
  CHECK_FALSE(rep.summary().empty());
  // kappa at alpha = 2 collapses to 2 Gamma(2) Gamma(1) = 2
  CHECK(kappa_alpha(2.0, 0.3) == doctest::Approx(2.0));
  CHECK(kappa_alpha(1.5, 1.0) > kappa_alpha(1.5, 0.5));
}

TEST_CASE("csv table format") {
  const auto t = build_table(shared({Family::simple_pm1}), {1, 2});
  const auto csv = table_csv(t);
  CHECK(csv.rfind("x,a,abar,b_plus,b_minus,err\n1,", 0) == 0);
}
