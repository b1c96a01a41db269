#include "htp/special.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace htp {

namespace {

constexpr double k_bernoulli[] = {
    1.0 / 6.0,          -1.0 / 30.0,      1.0 / 42.0,      -1.0 / 30.0,
    5.0 / 66.0,         -691.0 / 2730.0,  7.0 / 6.0,       -3617.0 / 510.0,
    43867.0 / 798.0,    -174611.0 / 330.0};

constexpr int k_series_terms = 80;

}  // namespace

double hurwitz_zeta(double s, double a) {
  if (s == 1.0) throw std::domain_error("hurwitz_zeta: pole at s = 1");
  if (!(a > 0.0)) throw std::domain_error("hurwitz_zeta: a must be positive");
  double sum = 0.0;
  double b = a;
  while (b < 16.0) {
    sum += std::pow(b, -s);
    b += 1.0;
  }
  sum += std::pow(b, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(b, -s);
  // Euler-Maclaurin corrections B_{2j}/(2j)! * s(s+1)...(s+2j-2) * b^{-s-2j+1}
  double rising = s;            // s (s+1) ... (s+2j-2)
  double fact = 2.0;            // (2j)!
  double bpow = std::pow(b, -s - 1.0);
  const double inv_b2 = 1.0 / (b * b);
  for (int j = 1; j <= 10; ++j) {
    double term = k_bernoulli[j - 1] / fact * rising * bpow;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    fact *= (2.0 * j + 1) * (2.0 * j + 2);
    bpow *= inv_b2;
  }
  return sum;
}

double power_sum(double sigma, std::int64_t a, std::int64_t b) {
  if (a < 1) throw std::domain_error("power_sum: a must be >= 1");
  if (b < a) return 0.0;
  if (b != k_inf_index && b - a < 64) {
    double sum = 0.0;
    for (std::int64_t k = b; k >= a; --k) sum += std::pow(static_cast<double>(k), sigma);
    return sum;
  }
  const double s = -sigma;
  if (b == k_inf_index) {
    if (s <= 1.0) return std::numeric_limits<double>::infinity();
    return hurwitz_zeta(s, static_cast<double>(a));
  }
  if (s == 1.0) {
    return boost::math::digamma(static_cast<double>(b) + 1.0) -
           boost::math::digamma(static_cast<double>(a));
  }
  return hurwitz_zeta(s, static_cast<double>(a)) - hurwitz_zeta(s, static_cast<double>(b) + 1.0);
}

double one_minus_cos(double u) {
  double h = std::sin(0.5 * u);
  return 2.0 * h * h;
}

double u_minus_sin(double u) {
  if (std::abs(u) < 0.5) {
    double u2 = u * u;
    double term = u * u2 / 6.0;
    double sum = term;
    for (int k = 2; k < 12; ++k) {
      term *= -u2 / ((2.0 * k) * (2.0 * k + 1.0));
      sum += term;
    }
    return sum;
  }
  return u - std::sin(u);
}

std::complex<double> atom_phi(double u) { return {one_minus_cos(u), u_minus_sin(u)}; }

PolylogRemainder::PolylogRemainder(double s) : s_(s) {
  if (!(s > 2.0)) throw std::domain_error("PolylogRemainder: s must exceed 2");
  double r = std::round(s);
  integer_ = std::abs(s - r) < 1e-12;
  if (integer_) {
    n_ = static_cast<int>(r);
    s_ = r;
    for (int k = 1; k < n_; ++k) harmonic_ += 1.0 / k;
  } else {
    gamma_1ms_ = boost::math::tgamma(1.0 - s);
  }
  coef_.assign(k_series_terms + 1, 0.0);
  for (int j = 2; j <= k_series_terms; ++j) {
    if (integer_ && j == n_ - 1) continue;
    double arg = s_ - j;
    double z = (arg == 0.0) ? -0.5 : boost::math::zeta(arg);
    coef_[j] = z / boost::math::factorial<double>(static_cast<unsigned>(j));
  }
}

std::complex<double> PolylogRemainder::operator()(double t) const {
  if (!(t > 0.0) || t >= 2.0 * std::numbers::pi)
    throw std::domain_error("PolylogRemainder: t out of (0, 2pi)");
  double re = 0.0, im = 0.0;
  double tp = t * t;  // t^j
  for (int j = 2; j <= k_series_terms; ++j) {
    double term = coef_[j] * tp;
    switch (j & 3) {
      case 0: re += term; break;
      case 1: im += term; break;
      case 2: re -= term; break;
      case 3: im -= term; break;
    }
    tp *= t;
  }
  std::complex<double> lead;
  const double half_pi = 0.5 * std::numbers::pi;
  if (integer_) {
    // mu^{n-1}/(n-1)! * (H_{n-1} - log(-mu)), mu = i t
    int m = n_ - 1;
    std::complex<double> mu_pow = std::pow(std::complex<double>(0.0, t), m);
    std::complex<double> log_neg_mu(std::log(t), -half_pi);
    lead = mu_pow / boost::math::factorial<double>(static_cast<unsigned>(m)) *
           (harmonic_ - log_neg_mu);
  } else {
    double mag = gamma_1ms_ * std::pow(t, s_ - 1.0);
    double ph = -half_pi * (s_ - 1.0);
    lead = {mag * std::cos(ph), mag * std::sin(ph)};
  }
  return lead + std::complex<double>(re, im);
}

}  // namespace htp
