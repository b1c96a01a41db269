#pragma once

// Absorbing-chain solves on finite windows, an independent reference for the
// potential-theoretic formulas. Bounded laws only.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "htp/step_laws.hpp"

namespace htp::chain {

// Banded LU without pivoting for (I - P) restricted to a window; fine for
// substochastic matrices, which are weakly diagonally dominant.
class BandedSystem {
 public:
  BandedSystem(std::int64_t n, std::int64_t band) : n_(n), b_(band), w_(2 * band + 1), a_(n * w_, 0.0) {}
  double& at(std::int64_t i, std::int64_t j) { return a_[i * w_ + (j - i + b_)]; }
  void factor() {
    for (std::int64_t k = 0; k < n_; ++k) {
      const double piv = at(k, k);
      for (std::int64_t i = k + 1; i <= std::min(n_ - 1, k + b_); ++i) {
        double& l = at(i, k);
        if (l == 0.0) continue;
        l /= piv;
        for (std::int64_t j = k + 1; j <= std::min(n_ - 1, k + b_); ++j) at(i, j) -= l * at(k, j);
      }
    }
  }
  std::vector<double> solve(std::vector<double> r) {
    for (std::int64_t i = 0; i < n_; ++i)
      for (std::int64_t k = std::max<std::int64_t>(0, i - b_); k < i; ++k) r[i] -= at(i, k) * r[k];
    for (std::int64_t i = n_ - 1; i >= 0; --i) {
      for (std::int64_t j = i + 1; j <= std::min(n_ - 1, i + b_); ++j) r[i] -= at(i, j) * r[j];
      r[i] /= at(i, i);
    }
    return r;
  }

 private:
  std::int64_t n_, b_, w_;
  std::vector<double> a_;
};

inline std::int64_t jump_range(const StepLaw& law) {
  const auto p = law.max_jump(Sign::plus), m = law.max_jump(Sign::minus);
  if (p >= k_inf_index || m >= k_inf_index) throw std::invalid_argument("chain: bounded law required");
  return std::max(p, m);
}

// Three-level Richardson extrapolation in 1/W for values on windows W, 2W, 4W.
inline double richardson3(double v1, double v2, double v4) {
  const double r12 = 2.0 * v2 - v1, r24 = 2.0 * v4 - v2;
  return (4.0 * r24 - r12) / 3.0;
}

// g_{(-inf,0]}(x, y) for the walk killed on leaving [1, W]
inline std::vector<double> killed_green_window(const StepLaw& law, std::int64_t W, std::int64_t y) {
  const std::int64_t J = jump_range(law);
  BandedSystem sys(W, J);
  for (std::int64_t i = 0; i < W; ++i) {
    sys.at(i, i) = 1.0;
    for (std::int64_t d = -J; d <= J; ++d) {
      const std::int64_t j = i + d;
      if (j < 0 || j >= W) continue;
      sys.at(i, j) -= law.pmf(d);
    }
  }
  sys.factor();
  std::vector<double> e(W, 0.0);
  e[y - 1] = 1.0;
  return sys.solve(e);  // indexed by x - 1
}

// g_{(-inf,0]}(x, y) on [1, W] for all 1 <= x, y <= n, one factorization; block[x-1][y-1]
inline std::vector<std::vector<double>> killed_green_block(const StepLaw& law, std::int64_t W, std::int64_t n) {
  const std::int64_t J = jump_range(law);
  BandedSystem sys(W, J);
  for (std::int64_t i = 0; i < W; ++i) {
    sys.at(i, i) = 1.0;
    for (std::int64_t d = -J; d <= J; ++d) {
      const std::int64_t j = i + d;
      if (j < 0 || j >= W) continue;
      sys.at(i, j) -= law.pmf(d);
    }
  }
  sys.factor();
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (std::int64_t y = 1; y <= n; ++y) {
    std::vector<double> e(W, 0.0);
    e[y - 1] = 1.0;
    const auto col = sys.solve(e);
    for (std::int64_t x = 1; x <= n; ++x) out[x - 1][y - 1] = col[x - 1];
  }
  return out;
}

// Richardson-extrapolated block over windows W0, 2 W0, 4 W0
inline std::vector<std::vector<double>> halfline_green_block(const StepLaw& law, std::int64_t n, std::int64_t W0 = 4096) {
  auto b1 = killed_green_block(law, W0, n), b2 = killed_green_block(law, 2 * W0, n),
       b4 = killed_green_block(law, 4 * W0, n);
  for (std::int64_t x = 0; x < n; ++x)
    for (std::int64_t y = 0; y < n; ++y) b1[x][y] = richardson3(b1[x][y], b2[x][y], b4[x][y]);
  return b1;
}

inline double halfline_green(const StepLaw& law, std::int64_t x, std::int64_t y, std::int64_t W0 = 4096) {
  double v[3];
  for (int l = 0; l < 3; ++l) v[l] = killed_green_window(law, W0 << l, y)[x - 1];
  return richardson3(v[0], v[1], v[2]);
}

// P[sigma^x_y < sigma^x_0] on the window [-W, W], leaving the window counts as failure
inline double hit_before_zero_window(const StepLaw& law, std::int64_t x, std::int64_t y, std::int64_t W) {
  const std::int64_t J = jump_range(law);
  const std::int64_t n = 2 * W + 1;
  BandedSystem sys(n, J);
  std::vector<double> rhs(n, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t s = i - W;
    sys.at(i, i) = 1.0;
    if (s == 0 || s == y) {
      rhs[i] = s == y ? 1.0 : 0.0;
      continue;
    }
    for (std::int64_t d = -J; d <= J; ++d) {
      const std::int64_t j = i + d;
      if (j < 0 || j >= n) continue;
      sys.at(i, j) -= law.pmf(d);
    }
  }
  sys.factor();
  return sys.solve(rhs)[x + W];
}

inline double hit_before_zero(const StepLaw& law, std::int64_t x, std::int64_t y, std::int64_t W0 = 4096) {
  double v[3];
  for (int l = 0; l < 3; ++l) v[l] = hit_before_zero_window(law, x, y, W0 << l);
  return richardson3(v[0], v[1], v[2]);
}

}  // namespace htp::chain
