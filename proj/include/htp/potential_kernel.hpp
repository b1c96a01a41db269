#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "htp/step_laws.hpp"
#include "htp/tail_functionals.hpp"

namespace htp {

struct KernelValue {
  double value = 0.0;
  double err = 0.0;
  bool converged = true;
};

// a, abar, b_+, b_- at one x from a single pass over the nodes.
struct KernelPoint {
  std::int64_t x = 0;
  KernelValue a, abar, b_plus, b_minus;
  std::int64_t panels = 0;
};

enum class PkMethod { fourier, series_oracle };
std::string pk_method_name(PkMethod m);

struct PotentialTable {
  std::shared_ptr<const StepLaw> law;
  std::vector<std::int64_t> x;
  std::vector<double> a, abar, b_plus, b_minus, err;
  PkMethod method = PkMethod::fourier;

  bool has(std::int64_t y) const;
  std::size_t index(std::int64_t y) const;  // throws std::out_of_range
  double a_at(std::int64_t y) const { return a[index(y)]; }
  double abar_at(std::int64_t y) const { return abar[index(y)]; }
  double err_at(std::int64_t y) const { return err[index(y)]; }
  double a_dagger(std::int64_t y) const { return (y == 0 ? 1.0 : 0.0) + a_at(y); }
  void reindex();  // call after filling x

 private:
  std::map<std::int64_t, std::size_t> pos_;
};

// Fourier inversion over (0, pi] on P uniform panels plus a geometrically graded
// first panel; P doubles until the GK error estimate meets tol.
class FourierKernel {
 public:
  explicit FourierKernel(std::shared_ptr<const StepLaw> law);
  const StepLaw& law() const { return *law_; }

  // tol < 0 selects default_tolerance(x)
  KernelPoint eval(std::int64_t x, double tol = -1.0) const;

  // all integers |x| <= J at once via FFT, two resolutions for the error
  PotentialTable dense_table(std::int64_t J) const;

  std::int64_t min_panels(std::int64_t x) const;
  int graded_levels() const { return levels_; }

 private:
  struct Grid {
    std::int64_t P = 0;
    std::vector<double> t, wk, wg, ca, cp, cm;  // 15 nodes per panel, panel 0 graded
    std::size_t graded_panels = 0;
  };
  std::shared_ptr<const StepLaw> law_;
  int levels_ = 64;
  mutable std::mutex mu_;
  mutable std::map<std::int64_t, std::shared_ptr<const Grid>> grids_;

  std::shared_ptr<const Grid> grid(std::int64_t P) const;
  Grid build_grid(std::int64_t P) const;
  KernelPoint integrate_on(std::int64_t P, std::int64_t x) const;
  void node_coeffs(double t, double& ca, double& cp, double& cm) const;
  void fft_half_table(std::int64_t P, std::int64_t J, std::vector<double>& abar, std::vector<double>& bp,
                      std::vector<double>& bm) const;
};

KernelValue a_fourier(const StepLaw& law, std::int64_t x, double tol = -1.0);
std::pair<KernelValue, KernelValue> b_pm(const StepLaw& law, std::int64_t x, double tol = -1.0);

// 1e-8 absolute up to |x| = 1e3; the relative part grows to 1e-5 at |x| = 1e5
struct Tolerance {
  double abs = 1e-8, rel = 0.0;
};
Tolerance default_tolerance(std::int64_t x);

PotentialTable build_table(std::shared_ptr<const StepLaw> law, const std::vector<std::int64_t>& xs,
                           double tol = -1.0);

struct SeriesOracleResult {
  double value = 0.0;
  double err = 0.0;
  std::vector<std::pair<std::int64_t, double>> window_values;  // (N, a_N(x))
  std::vector<std::pair<double, double>> abel;                 // (r, damped sum)
};

// Defining series evaluated on the cyclic group Z/N, extrapolated in N.
class SeriesOracle {
 public:
  explicit SeriesOracle(std::shared_ptr<const StepLaw> law, int log2_n_max = 22, int levels = 5);
  SeriesOracleResult eval(std::int64_t x, const std::vector<double>& abel_r = {0.9, 0.99, 0.999}) const;
  const std::vector<double>& exponents() const { return exps_; }

 private:
  std::shared_ptr<const StepLaw> law_;
  int log2_n_max_, levels_;
  std::vector<std::complex<double>> inv_;  // 1/(1 - psi) at 2 pi j / N_max, j = 1..N_max/2
  std::vector<std::complex<double>> psi_;
  double f0_ = 0.0, f0_lin_ = 0.0;  // finite variance: j = 0 limit is f0_ x^2 + f0_lin_ x
  bool finite_var_ = false;
  std::vector<double> exps_;
};

SeriesOracleResult a_series_oracle(std::shared_ptr<const StepLaw> law, std::int64_t x,
                                   const std::vector<double>& abel_r = {0.9, 0.99, 0.999});

// Truncated direct convolution of the defining series, small laws only.
double a_series_direct(const StepLaw& law, std::int64_t x, int n_steps, std::int64_t window);

double kappa_alpha(double alpha, double p);

struct BoundReport {
  double abar_m_over_x_min = 0.0, abar_m_over_x_max = 0.0;
  double kappa_inverse = 0.0;  // 1/kappa_alpha for the stable family, else NaN
  std::vector<std::pair<std::int64_t, double>> neg_pos_ratio;  // (x, a(-x)/a(x))
  double holder_ratio = 0.0;       // max |1 - abar(x)/abar(R)| / (1 - x/R)^{1/4}
  std::vector<std::pair<int, double>> growth;  // sparse law: (n, abar(x_n/2)/abar(x_n))
  std::string summary() const;
};

BoundReport verify_bounds(const PotentialTable& table, const FunctionalProfile& profile);

std::string table_csv(const PotentialTable& t);

}  // namespace htp

namespace htp {

struct HarmonicResidual {
  std::int64_t x = 0;
  double lhs = 0.0;  // sum_y p(y - x) a(y)
  double rhs = 0.0;  // a^dagger(x)
  double err = 0.0;  // table error plus the tail-fit spread
};

// Checks sum_y p(y - x) a(y) = a^dagger(x). The sum is explicit for |y - x| <= J (dense table);
// beyond J the power tail is summed in closed form against an asymptotic fit of a on [J/8, J].
std::vector<HarmonicResidual> harmonic_check(std::shared_ptr<const StepLaw> law, const std::vector<std::int64_t>& xs,
                                             std::int64_t J = std::int64_t{1} << 14);

}  // namespace htp
