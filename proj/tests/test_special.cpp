#include <doctest.h>
#include <gsl/gsl_sf_zeta.h>

#include <cmath>
#include <complex>

#include "htp/quadrature.hpp"
#include "htp/special.hpp"

using namespace htp;

TEST_CASE("hurwitz zeta matches gsl for s > 1") {
  for (double s : {1.3, 2.5, 3.0, 4.75})
    for (double a : {0.5, 1.0, 7.0, 1000.0}) {
      const double ref = gsl_sf_hzeta(s, a);
      CHECK(hurwitz_zeta(s, a) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("hurwitz zeta continuation agrees with partial sums plus tail") {
  // zeta(s, a) - zeta(s, a + n) = sum_{k<n} (a+k)^{-s} holds for s < 1 as well
  for (double s : {0.5, -0.5, -1.5}) {
    const double a = 3.0;
    double direct = 0;
    for (int k = 0; k < 50; ++k) direct += std::pow(a + k, -s);
    CHECK(hurwitz_zeta(s, a) - hurwitz_zeta(s, a + 50) == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("power sums over finite and infinite ranges") {
  double direct = 0;
  for (int k = 3; k <= 400; ++k) direct += std::pow(k, -1.5);
  CHECK(power_sum(-1.5, 3, 400) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(power_sum(-2.5, 1, k_inf_index) == doctest::Approx(gsl_sf_zeta(2.5)).epsilon(1e-13));
  CHECK(power_sum(2.0, 1, 10) == doctest::Approx(385.0));
}

TEST_CASE("cancellation-free trig helpers") {
  for (double u : {1e-9, 1e-4, 0.3, 2.0}) {
    CHECK(one_minus_cos(u) == doctest::Approx(2.0 * std::sin(u / 2) * std::sin(u / 2)).epsilon(1e-14));
    const double ref = u < 1e-3 ? u * u * u / 6.0 - std::pow(u, 5) / 120.0 : u - std::sin(u);
    CHECK(u_minus_sin(u) == doctest::Approx(ref).epsilon(1e-12));
  }
  const auto z = atom_phi(0.7);
  CHECK(z.real() == doctest::Approx(1.0 - std::cos(0.7)));
  CHECK(z.imag() == doctest::Approx(0.7 - std::sin(0.7)));
}

TEST_CASE("polylog remainder equals the direct series") {
  for (double s : {3.5, 4.0}) {
    PolylogRemainder E(s);
    for (double t : {0.05, 0.7, 2.5}) {
      std::complex<double> direct = 0;
      for (long k = 2000000; k >= 1; --k) direct += std::pow(double(k), -s) * atom_phi(k * t) * -1.0;
      // atom_phi(u) = 1 - e^{iu} + iu, the series summand is its negative
      const auto v = E(t);
      CHECK(std::abs(v - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("adaptive GK15 integration") {
  const auto r = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  const auto g = gk15([](double x) { return x * x * x; }, 0.0, 2.0);
  CHECK(g.value == doctest::Approx(4.0).epsilon(1e-14));
}
