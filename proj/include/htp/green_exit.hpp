#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "htp/potential_kernel.hpp"
#include "htp/step_laws.hpp"

namespace htp {

struct Approx {
  double value = 0.0;
  double err = 0.0;
};

// a-values from a fixed table, or computed on demand and memoized.
class HittingModel {
 public:
  explicit HittingModel(std::shared_ptr<const StepLaw> law);
  HittingModel(std::shared_ptr<const StepLaw> law, PotentialTable table);

  const StepLaw& law() const { return *law_; }
  std::shared_ptr<const StepLaw> law_ptr() const { return law_; }

  Approx a(std::int64_t y) const;
  Approx abar(std::int64_t y) const;
  Approx a_dagger(std::int64_t y) const;
  // evaluates every missing +-y in parallel (on-demand mode only)
  void prefetch(const std::vector<std::int64_t>& ys) const;
  bool table_backed() const { return table_.has_value(); }

 private:
  std::shared_ptr<const StepLaw> law_;
  std::optional<PotentialTable> table_;
  std::unique_ptr<FourierKernel> kernel_;
  mutable std::mutex mu_;
  mutable std::map<std::int64_t, Approx> memo_;
  void store(const KernelPoint& kp) const;
};

// g_{0}(x, y) = a^dagger(x) + a(-y) - a(x - y); throws if negative beyond error
Approx green_zero(const HittingModel& m, std::int64_t x, std::int64_t y);

// P[sigma^x_y < sigma^x_0], y != 0, y != x
Approx hit_before_zero(const HittingModel& m, std::int64_t x, std::int64_t y);

// P[S^x leaves (-Q, R) before sigma_0] by a dense solve on the interval; needs Q + R <= 4097
Approx interval_escape(const StepLaw& law, std::int64_t x, std::int64_t Q, std::int64_t R);

struct HittingDistribution {
  std::vector<std::int64_t> B;
  std::int64_t x = 0;
  std::vector<double> h;        // H^x_B(B[i]); for x in B the return law (first visit after time 0)
  std::vector<double> h_err;
  std::vector<std::vector<double>> pi;  // pi[i][j] = H^{B[i]}_B(B[j])
  std::vector<double> u;                // u_B
  double condition = 0.0;               // condition number of the least-squares matrix
  double residual = 0.0;
  // B = {-Q, 0, R}: 1 - H^x_B(0) by the three-term formula
  std::optional<Approx> escape_from_zero;
};

// |B| in {2, 3}; throws std::runtime_error when the system is singular
HittingDistribution hitting_distribution(const HittingModel& m, std::vector<std::int64_t> B, std::int64_t x);

struct Prediction {
  std::string name;
  double value = 0.0;
  std::string validity;
};

struct ExitPredictions {
  std::int64_t x = 0, Q = 0, R = 0;
  std::vector<Prediction> items;  // one_sided, two_sided, top_given_exit, halfline
  const Prediction& get(const std::string& name) const;
};

// V_ds(x-1)/V_ds(R) is included only when V_ds is supplied (index k holds V_ds(k)).
ExitPredictions exit_predictors(const HittingModel& m, std::int64_t x, std::int64_t Q, std::int64_t R,
                                const std::vector<double>* V_ds = nullptr);

struct InequalityTuple {
  std::int64_t x = 0, y = 0, Q = 0, R = 0;
};

struct InequalityViolation {
  std::string name;
  InequalityTuple at;
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
};

struct InequalityAudit {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // left bound dropped because a(-y) = 0 or a(R) a(R-x) = 0
  std::vector<InequalityViolation> violations;
  std::vector<std::string> log;
};

InequalityAudit audit_inequalities(const HittingModel& m, const std::vector<InequalityTuple>& tuples);

struct ExitReport {
  std::string law;
  std::string query;
  std::optional<double> exact, predictor, mc_estimate, mc_se;
  std::string verdict;
  std::string to_json() const;
};

}  // namespace htp
