#include <doctest.h>

#include <cmath>
#include <random>

#include "htp/event_dsl.hpp"
#include "htp/green_exit.hpp"
#include "htp/ladder_renewal.hpp"
#include "htp/mc_engine.hpp"

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

RaceSpec race(std::int64_t x, StopCondition a, StopCondition b, std::uint64_t budget = std::uint64_t{1} << 26) {
  RaceSpec s;
  s.start = x;
  s.first = std::move(a);
  s.second = std::move(b);
  s.step_budget = budget;
  return s;
}

bool within(const McEstimate& e, double exact, double k = 4.0) { return std::abs(e.estimate - exact) <= k * e.se; }

}  // namespace

TEST_CASE("gambler's ruin and symmetry") {
  const auto simple = shared({Family::simple_pm1});
  const auto e = estimate_event(*simple, race(3, StopCondition::hit(10), StopCondition::hit(0)), 20000, 1);
  CHECK(within(e, 0.3));
  CHECK(e.valid());
  CHECK(e.se == doctest::Approx(std::sqrt(e.estimate * (1 - e.estimate) / 20000)));

  const auto sym = estimate_event(*sparse(2), race(0, StopCondition::hit(1), StopCondition::hit(-1), 1 << 24), 10000, 2);
  CHECK(within(sym, 0.5));
  CHECK(sym.valid());
  CHECK_THROWS_AS(estimate_event(*simple, race(3, StopCondition::hit(10), StopCondition::hit(0)), 999, 1),
                  std::invalid_argument);
}

TEST_CASE("seed determinism and accounting") {
  const auto law = stable(1.5, 0.0);
  const auto spec = race(5, StopCondition::up(200), StopCondition::hit(0));
  const auto a = estimate_event(*law, spec, 9000, 42), b = estimate_event(*law, spec, 9000, 42);
  const auto c = estimate_event(*law, spec, 9000, 43);
  CHECK(a.wins == b.wins);
  CHECK(a.estimate == b.estimate);
  CHECK(a.se == b.se);
  CHECK(a.wins != c.wins);
  CHECK(a.wins + a.losses + a.overflows == a.replicas);

  // a tiny budget forces overflows, which are counted and invalidate the estimate
  const auto sp = sparse(2);
  const auto o = estimate_event(*sp, race(1, StopCondition::hit(500), StopCondition::hit(0), 50), 2000, 1);
  CHECK(o.overflows > 0);
  CHECK(o.wins + o.losses + o.overflows == o.replicas);
  CHECK_FALSE(o.valid());
}

TEST_CASE("regression battery against exact values") {
  std::mt19937_64 gen(99);
  const auto simple = shared({Family::simple_pm1});
  const auto sp = sparse(2);
  const auto left = stable(1.5, 0.0);
  HittingModel m_simple(simple), m_sparse(sp), m_left(left);
  int agree = 0, total = 0;
  // point hits of a finite-variance walk have an n^{-1/2} time tail, so a few replicas may outlast the budget;
  // exact must then lie within 4 SE of the bracket spanned by scoring them all as losses or all as wins
  auto run = [&](const StepLaw& law, const RaceSpec& s, double exact, std::uint64_t seed) {
    const auto e = estimate_event(law, s, 4000, seed);
    INFO(law.name(), " ", s.describe(), " overflows ", e.overflows);
    REQUIRE(e.overflow_fraction() < 0.01);
    ++total;
    const double n = double(e.replicas);
    const double lo = double(e.wins) / n, hi = double(e.wins + e.overflows) / n;
    const double se = std::sqrt(std::max(lo * (1.0 - lo), hi * (1.0 - hi)) / n);
    if (exact >= lo - 4.0 * se && exact <= hi + 4.0 * se) ++agree;
  };
  for (int i = 0; i < 10; ++i) {
    const std::int64_t y = std::uniform_int_distribution<std::int64_t>(2, 60)(gen);
    const std::int64_t x = std::uniform_int_distribution<std::int64_t>(1, y - 1)(gen);
    run(*simple, race(x, StopCondition::hit(y), StopCondition::hit(0)), hit_before_zero(m_simple, x, y).value, 100 + i);
  }
  for (int i = 0; i < 15; ++i) {
    std::int64_t x = 0, y = 0;
    while (x == 0 || y == 0 || x == y) {
      x = std::uniform_int_distribution<std::int64_t>(-30, 30)(gen);
      y = std::uniform_int_distribution<std::int64_t>(-30, 30)(gen);
    }
    run(*sp, race(x, StopCondition::hit(y), StopCondition::hit(0), 1 << 24), hit_before_zero(m_sparse, x, y).value,
        200 + i);
  }
  for (int i = 0; i < 15; ++i) {
    const std::int64_t R = std::uniform_int_distribution<std::int64_t>(20, 400)(gen);
    const std::int64_t x = std::uniform_int_distribution<std::int64_t>(0, R / 2)(gen);
    const double exact = exit_predictors(m_left, x, 1, R).get("one_sided").value;
    run(*left, race(x, StopCondition::up(R), StopCondition::hit(0)), exact, 300 + i);
  }
  CHECK(total == 40);
  CHECK(agree >= 38);
}

TEST_CASE("conditional events") {
  const auto simple = shared({Family::simple_pm1});
  // exit (-5, 10) from 0 before returning: the top share is 5/15
  const auto e = conditional_event(*simple, race(0, StopCondition::exit(-5, 10), StopCondition::hit(0)),
                                   StopCondition::up(10), 40000, 5);
  CHECK(within(e, 1.0 / 3.0));
}

TEST_CASE("overshoot of a skip-free walk is zero") {
  const auto simple = shared({Family::simple_pm1});
  const auto o = overshoot_law(*simple, 50, Conditioning::none, {0.0, 0.5}, 2000, 3);
  CHECK(o.accepted == 2000);
  CHECK(o.points[0].cdf == 1.0);
  CHECK(o.band > 0.0);
  const auto c = overshoot_law(*stable(1.5, 0.0), 10000, Conditioning::avoid_zero, {0.5}, 20000, 4);
  CHECK(1.0 - c.points[0].cdf < 0.05);
  CHECK(c.acceptance() > 1e-4);
}

TEST_CASE("tau excursion against the ladder height law") {
  // skip-free downward: entering (-inf, -R] hits -R exactly, so S_tau + R is a strict ladder height
  Side plus, minus;
  plus.atoms = {{2, 1.0 / 3.0}};
  minus.atoms = {{1, 2.0 / 3.0}};
  auto law = std::make_shared<const StepLaw>("down1_up2", 0.0, plus, minus, 2);
  LadderOptions opt;
  opt.horizon = 8;
  const auto t = ladder_law(law, opt);
  const auto r = tau_excursion(*law, 1, 1.5, 20000, 8);
  CHECK(within(r.unconditioned, t.P_Z_gt[1]));
  // the exit position does not depend on whether 0 was revisited first
  CHECK(std::abs(r.conditioned.estimate - r.unconditioned.estimate) <=
        4 * std::hypot(r.conditioned.se, r.unconditioned.se));
  const auto half = tau_excursion(*law, 1, 0.5, 20000, 8);
  CHECK(half.unconditioned.estimate == doctest::Approx(1.0));
  CHECK(r.unconditioned.estimate <= half.unconditioned.estimate);
  CHECK_THROWS(tau_excursion(*law, 0, 0.5, 2000, 1));
}

TEST_CASE("visit counts of the simple walk are geometric") {
  // from 0, escape to 2 before returning has probability 1/4: P[N >= k] = (3/4)^{k-1}
  const auto simple = shared({Family::simple_pm1});
  const auto r = visit_count_law(*simple, {0}, 0, 2, false, 2.0, {0.0, 0.5, 1.0, 2.0}, 40000, 6);
  CHECK(r.normalizer == 2.0);
  CHECK(r.tails[0].tail == 1.0);
  CHECK(r.tails[1].tail == 1.0);
  CHECK(std::abs(r.tails[2].tail - 0.75) <= 4 * r.tails[2].se);
  CHECK(std::abs(r.tails[3].tail - 0.421875) <= 4 * r.tails[3].se);
  CHECK(r.mean_count == doctest::Approx(4.0).epsilon(0.03));
  CHECK(r.tails[2].limit == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS(visit_count_law(*simple, {5}, 0, 2, false, 2.0, {1.0}, 2000, 6));
}

TEST_CASE("spitzer estimate for a symmetric walk") {
  const auto simple = shared({Family::simple_pm1});
  const auto pts = spitzer_estimate(*simple, {100, 10}, 20000, 7);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].n == 10);
  // P[S_100 = 0] = C(100, 50) / 2^100
  const double p0 = std::exp(std::lgamma(101.0) - 2 * std::lgamma(51.0) - 100 * std::log(2.0));
  CHECK(std::abs(pts[1].at_zero - p0) < 4 * std::sqrt(p0 * (1 - p0) / 20000));
  CHECK(std::abs(pts[1].positive - (1 - p0) / 2) <= 4 * pts[1].se);
  CHECK_THROWS(spitzer_estimate(*simple, {}, 2000, 1));
}

TEST_CASE("event dsl") {
  const auto s = parse_event("race(hit:1000, hit:0) from 5");
  CHECK(s.start == 5);
  CHECK(s.first.kind == StopCondition::Kind::hit_point);
  CHECK(s.first.level == 1000);
  CHECK(s.second.level == 0);
  const auto t = parse_event("race( out:-10:20 , set:3|-4 ) from -2");
  CHECK(t.start == -2);
  CHECK(t.first.kind == StopCondition::Kind::exit_interval);
  CHECK(t.first.met(-10));
  CHECK(t.first.met(20));
  CHECK_FALSE(t.first.met(19));
  CHECK(t.second.points == std::vector<std::int64_t>{3, -4});
  CHECK(parse_stop("up:7").met(8));
  CHECK_FALSE(parse_stop("down:-7").met(-6));
  for (const char* bad : {"race(hit:1) from 0", "race(jump:1, hit:0) from 0", "race(hit:x, hit:0) from 0",
                          "race(out:5:5, hit:0) from 0", "hit:1 vs hit:0", ""})
    CHECK_THROWS_AS(parse_event(bad), std::invalid_argument);
}
