#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "htp/ladder_renewal.hpp"
#include "htp/potential_kernel.hpp"
#include "htp/rng.hpp"
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

LadderTables tables(std::shared_ptr<const StepLaw> law, std::int64_t horizon) {
  LadderOptions opt;
  opt.horizon = horizon;
  return ladder_law(std::move(law), opt);
}

void check_invariants(const LadderTables& t) {
  CHECK(t.u_as[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.f_Z[0] == 0.0);
  CHECK(t.renewal_residual < 1e-9);
  double fz = 0;
  for (std::int64_t x = 0; x <= t.horizon; ++x) {
    fz += t.f_Z[x];
    CHECK(t.u_as[x] >= 0.0);
    CHECK(t.v_ds[x] >= 0.0);
    if (x > 0) {
      CHECK(t.U_as[x] >= t.U_as[x - 1]);
      CHECK(t.V_ds[x] >= t.V_ds[x - 1]);
      CHECK(t.P_Z_gt[x] <= t.P_Z_gt[x - 1] + 1e-15);
      CHECK(t.ell_plus[x] >= t.ell_plus[x - 1]);
      CHECK(t.ell_minus[x] >= t.ell_minus[x - 1]);
    }
    if (x > 1) {
      // concave: increments are nonincreasing
      CHECK(t.ell_plus[x] - t.ell_plus[x - 1] <= t.ell_plus[x - 1] - t.ell_plus[x - 2] + 1e-15);
    }
  }
  CHECK(fz <= 1.0 + 1e-12);
  CHECK(fz + t.P_Z_gt[t.horizon] == doctest::Approx(1.0).epsilon(1e-9));
}

}  // namespace

TEST_CASE("simple walk ladder tables") {
  const auto t = tables(shared({Family::simple_pm1}), 256);
  CHECK(t.f_Z[1] == doctest::Approx(1.0));
  CHECK(t.P_Z_gt[0] == 1.0);
  CHECK(t.P_Z_gt[1] == 0.0);
  CHECK(t.f_Hw[0] == doctest::Approx(0.5));
  CHECK(t.f_Hw[1] == doctest::Approx(0.5));
  for (std::int64_t x = 0; x <= 256; ++x) {
    CHECK(t.u_as[x] == doctest::Approx(1.0));
    CHECK(t.v_ds[x] == doctest::Approx(2.0));
    CHECK(t.ell_plus[x] == doctest::Approx(std::min<double>(x, 1)));
    if (x >= 1) CHECK(t.u_as[x] * t.ell_plus[x] == doctest::Approx(1.0));
  }
  CHECK(halfline_green(t, 3, 5) == doctest::Approx(6.0));
  CHECK(std::abs(halfline_green(t, 3, 5) - oracle::halfline_green(*t.law, 3, 5)) < 1e-9);
  CHECK(halfline_green(t, 1, 9) == doctest::Approx(t.v_ds[0] * t.u_as[8]));
  CHECK_THROWS_AS(halfline_green(t, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(halfline_green(t, 3, 400), std::out_of_range);
}

TEST_CASE("ladder tables satisfy their invariants") {
  for (auto law : {stable(1.5, 0.3), stable(1.5, 0.0), stable(1.2, 1.0), sparse(3), shared({Family::simple_pm1})}) {
    CAPTURE(law->name());
    check_invariants(tables(law, 2048));
  }
  LadderOptions big;
  big.horizon = std::int64_t{1} << 17;
  CHECK_THROWS(ladder_law(stable(1.5, 0.3), big));
}

TEST_CASE("half-line Green function against the killed chain") {
  const auto law = sparse(2);
  const auto t = tables(law, 512);
  const auto block = oracle::halfline_green_block(*law, 12);
  for (std::int64_t x = 1; x <= 12; ++x)
    for (std::int64_t y = 1; y <= 12; ++y) {
      CAPTURE(x);
      CAPTURE(y);
      CHECK(std::abs(halfline_green(t, x, y) - block[x - 1][y - 1]) < 1e-7);
    }
}

TEST_CASE("half-line Green function against occupation counts") {
  // left-tail-only law: mean visits to 40 from 40 before entering (-inf, 0].
  // Exit times have an n^{-1/3} tail, so paths are cut at 10^4; the visits lost
  // after reaching that level are orders of magnitude below the standard error.
  const auto law = stable(1.5, 0.0);
  const auto t = tables(law, 256);
  const double g = halfline_green(t, 40, 40);
  Sampler draw(*law);
  Rng rng(21, 0);
  const int n = 40000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t s = 40;
    double c = 0;
    while (s > 0 && s < 10000) {
      if (s == 40) c += 1;
      s += draw(rng);
    }
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  CAPTURE(mean);
  CAPTURE(se);
  CHECK(std::abs(mean - g) < 4 * se);
}

TEST_CASE("left-tail-only law has a skip-free ascending ladder") {
  const auto t = tables(stable(1.5, 0.0), 10000);
  // Z = 1, so u_as tends to 1/EZ = 1
  CHECK(t.u_as[10000] == doctest::Approx(1.0 / t.ell_plus[10000]).epsilon(0.05));
  CHECK(t.u_as[10000] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trend bands for a left-tail-dominant law") {
  const auto law = stable(1.5, 0.0);
  const std::int64_t H = std::int64_t{1} << 16;
  const auto t = tables(law, H);
  FourierKernel K(law);
  const std::int64_t x = H / 2;
  const double a = K.eval(x).a.value;
  const double r1 = a * t.ell_plus[x] / t.V_ds[x];
  const double r2 = halfline_green(t, x / 2, x) / K.eval(x / 2).a.value;
  CAPTURE(r1);
  CAPTURE(r2);
  CHECK(r1 >= 0.7);
  CHECK(r1 <= 1.3);
  CHECK(r2 >= 0.7);
  CHECK(r2 <= 1.3);
  CHECK(t.u_as[H] * t.ell_plus[H] == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("renewal asymptotics") {
  SUBCASE("deterministic renewal") {
    Side plus;
    plus.atoms = {{1, 1.0}};
    const StepLaw one("unit", 0.0, plus, Side{}, 1);
    const auto r = renewal_asymptotic_check(one, 100, {});
    for (const auto& row : r.rows) {
      CHECK(row.u == doctest::Approx(1.0));
      CHECK(row.uG == doctest::Approx(1.0));
    }
  }
  SUBCASE("log-heavy renewal") {
    const auto T = make_builtin({Family::renewal_logheavy});
    const auto r = renewal_asymptotic_check(T, 20000);
    const auto at = [&](std::int64_t x) {
      for (const auto& row : r.rows)
        if (row.x == x) return row.uG;
      FAIL("missing row");
      return 0.0;
    };
    CHECK(std::abs(at(20000) - 1.0) < std::abs(at(100) - 1.0));
    CHECK(at(20000) >= 0.7);
    CHECK(at(20000) <= 1.3);
    REQUIRE(r.probe_x.size() == 3);
    CHECK(r.max_probe_diff < 1e-6);
  }
  SUBCASE("errors") {
    Side plus;
    plus.atoms = {{2, 1.0}};
    CHECK_THROWS(renewal_asymptotic_check(StepLaw("even", 0.0, plus, Side{}, 2), 100));
    CHECK_THROWS(renewal_asymptotic_check(make_builtin({Family::simple_pm1}), 100));
  }
}

TEST_CASE("relative stability conditions") {
  const auto c2 = stability_check(stable(1.5, 0.0), StabilityMode::C2);
  CHECK(c2.verdict == Verdict::holds);
  const auto c2b = stability_check(stable(1.5, 0.5), StabilityMode::C2);
  CHECK(c2b.verdict == Verdict::fails);
  CHECK(c2b.series.back().second == doctest::Approx(0.25).epsilon(0.02));
  // A(x) / (x mu(x)) = eta_-(x) / (x mu(x)) settles at 1 / (alpha - 1)
  const auto c1 = stability_check(stable(1.5, 0.0), StabilityMode::C1);
  CHECK(c1.verdict == Verdict::fails);
  CHECK(c1.series.back().second == doctest::Approx(2.0).epsilon(0.02));
  const auto ov = stability_check(stable(1.5, 0.0), StabilityMode::overshoot, 10000, 3, {1000, 10000}, {0.1, 0.5});
  for (const auto& o : ov.overshoot)
    if (o.R == 10000 && o.eps == 0.1) CHECK(o.estimate < 0.05);
  CHECK(ov.verdict == Verdict::holds);
  CHECK_FALSE(ov.summary().empty());
}

TEST_CASE("ladder csv columns") {
  const auto t = tables(shared({Family::simple_pm1}), 4);
  const auto csv = ladder_csv(t);
  CHECK(csv.rfind("x,P_Z_gt,u_as,V_ds,ell_plus,ell_minus\n", 0) == 0);
  CHECK(ladder_mode_from_name("simulation") == LadderMode::simulation);
  CHECK_THROWS(ladder_mode_from_name("guess"));
}

TEST_CASE("overshoot over a high level follows its scaling limit") {
  // P[O_R > y] = sum_{k <= R} u_as(k) P[Z > R - k + y]; O_R / R has density prop. to x^{-3/4} / (1 + x)
  const auto t = tables(stable(1.5, 0.5), 16384);
  const std::int64_t R = 1024;
  double mass = 0.0;
  for (std::int64_t k = 0; k <= R; ++k) mass += t.u_as[k] * t.P_Z_gt[R - k];
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  for (double x : {0.5, 1.0, 2.0}) {
    const auto y = static_cast<std::int64_t>(x * R);
    double tail = 0.0;
    for (std::int64_t k = 0; k <= R; ++k) tail += t.u_as[k] * t.P_Z_gt[R - k + y];
    CAPTURE(x);
    CHECK(std::abs(1.0 - tail - boost::math::ibeta(0.25, 0.75, x / (1.0 + x))) < 0.02);
  }
}
