#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

namespace htp {

inline constexpr std::int64_t k_inf_index = std::numeric_limits<std::int64_t>::max();

// Hurwitz zeta sum_{k>=0} (a+k)^{-s} for real s != 1, a > 0; analytic continuation for s < 1.
double hurwitz_zeta(double s, double a);

// sum_{k=a}^{b} k^sigma for integers 1 <= a; b may be k_inf_index when the series converges.
double power_sum(double sigma, std::int64_t a, std::int64_t b);

// 1 - cos(u) and u - sin(u) without cancellation.
double one_minus_cos(double u);
double u_minus_sin(double u);

// 1 - e^{iu} + iu, the per-atom summand of t*(alpha + i*beta).
std::complex<double> atom_phi(double u);

// Series for E_s(t) = sum_{k>=1} k^{-s} (e^{ikt} - 1 - ikt), 0 < t < 2*pi, s > 2.
class PolylogRemainder {
 public:
  explicit PolylogRemainder(double s);
  std::complex<double> operator()(double t) const;
  double s() const { return s_; }

 private:
  double s_;
  bool integer_ = false;
  int n_ = 0;
  double gamma_1ms_ = 0.0;
  double harmonic_ = 0.0;
  std::vector<double> coef_;  // zeta(s-j)/j!, index j
};

}  // namespace htp
