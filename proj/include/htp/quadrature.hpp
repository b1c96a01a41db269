#pragma once

#include <array>
#include <functional>

namespace htp {

struct QuadResult {
  double value = 0.0;
  double err = 0.0;
  bool converged = true;
};

// 15-point Kronrod abscissae on [-1, 1] (nonnegative half, index 7 is the centre)
// with the embedded 7-point Gauss rule on the odd indices.
namespace gk {
extern const std::array<double, 8> xgk;
extern const std::array<double, 8> wgk;
extern const std::array<double, 4> wg;
}  // namespace gk

// Node offsets u in (0,1) and weights on [0,1], full 15-point layout.
struct Gk15Layout {
  std::array<double, 15> u;
  std::array<double, 15> wk;
  std::array<double, 15> wg;  // zero off the Gauss nodes
};
const Gk15Layout& gk15_layout();

// QUADPACK-style error heuristic from the Kronrod/Gauss pair.
double gk15_error(double resk, double resg, double resasc, double resabs);

QuadResult gk15(const std::function<double(double)>& f, double a, double b);

// Globally adaptive bisection on GK15 panels.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     double rel_tol = 1e-12, int max_panels = 4000);

}  // namespace htp
