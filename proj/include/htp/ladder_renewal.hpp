#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "htp/step_laws.hpp"
#include "htp/tail_functionals.hpp"

namespace htp {

enum class LadderMode { exact_recursion, simulation };
std::string ladder_mode_name(LadderMode m);
LadderMode ladder_mode_from_name(const std::string& s);

// Ascending ladder is strict (Z = first value > 0), descending is weak (first value <= 0).
// Arrays are indexed by x = 0..horizon.
struct LadderTables {
  std::shared_ptr<const StepLaw> law;
  LadderMode method = LadderMode::exact_recursion;
  std::int64_t horizon = 0;
  std::vector<double> f_Z;       // P[Z = x], f_Z[0] = 0
  std::vector<double> P_Z_gt;    // P[Z > x]
  std::vector<double> f_Hw;      // P[weak descending height = -x]
  std::vector<double> u_as, U_as;
  std::vector<double> v_ds, V_ds;
  std::vector<double> ell_plus, ell_minus;
  int iterations = 0;
  double renewal_residual = 0.0;  // max |u - delta_0 - f_Z * u|
  double mass_defect = 0.0;       // |1 - sum f_Z| + |1 - sum f_Hw| on the horizon plus tails
  std::uint64_t overflows = 0;    // simulation mode
};

struct LadderOptions {
  std::int64_t horizon = 4096;
  LadderMode mode = LadderMode::exact_recursion;
  std::uint64_t replicas = 200000;  // simulation mode
  std::uint64_t seed = 1;
  std::uint64_t step_budget = std::uint64_t{1} << 24;
  int max_iterations = 200000;
  double tol = 1e-14;
  std::function<void(const std::string&)> progress;
};

LadderTables ladder_law(std::shared_ptr<const StepLaw> law, const LadderOptions& opt = {});

// g_{(-inf,0]}(x, y) = sum_{k=1}^{min(x,y)} v_ds(x-k) u_as(y-k)
double halfline_green(const LadderTables& t, std::int64_t x, std::int64_t y);

std::string ladder_csv(const LadderTables& t);

struct RenewalRow {
  std::int64_t x = 0;
  double u = 0.0, G = 0.0, uG = 0.0;
};

struct RenewalCheck {
  std::vector<RenewalRow> rows;         // geometric x sequence, last row at x_max
  std::vector<double> u;                // u_0 .. u_{x_max}
  std::vector<std::int64_t> probe_x;
  std::vector<double> probe_recursion, probe_sine, probe_err;
  double max_probe_diff = 0.0;
};

// T on {0, 1, 2, ...}: renewal recursion up to x_max and the sine-series inversion at probe points.
RenewalCheck renewal_asymptotic_check(const StepLaw& T, std::int64_t x_max,
                                      std::vector<std::int64_t> probes = {50, 500, 5000});

enum class StabilityMode { C1, C2, overshoot };

struct OvershootPoint {
  std::int64_t R = 0;
  double eps = 0.0;
  double estimate = 0.0, se = 0.0;
  std::uint64_t accepted = 0, overflows = 0;
};

struct StabilityReport {
  StabilityMode mode = StabilityMode::C1;
  std::vector<std::pair<double, double>> series;  // (x, ratio) for C1 / C2
  Verdict verdict = Verdict::inconclusive;
  std::vector<OvershootPoint> overshoot;
  std::string summary() const;
};

// C1: A(x)/(x mu(x)) -> infinity; C2: x eta_+(x)/m(x) -> 0; overshoot: P[S_{sigma[R,inf)}/R > 1+eps]
StabilityReport stability_check(std::shared_ptr<const StepLaw> law, StabilityMode mode,
                                std::uint64_t replicas = 100000, std::uint64_t seed = 1,
                                std::vector<std::int64_t> Rs = {1000, 10000}, std::vector<double> eps = {0.1, 0.5});

}  // namespace htp
