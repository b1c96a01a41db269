#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "htp/step_laws.hpp"

namespace htp {

struct BasicRecord {
  double x = 0.0;
  double mu_plus = 0.0, mu_minus = 0.0;
  double eta_plus = 0.0, eta_minus = 0.0, eta = 0.0;
  double c_plus = 0.0, c_minus = 0.0, c = 0.0;
  double m_plus = 0.0, m_minus = 0.0, m = 0.0;
  double c_tilde = 0.0, m_tilde = 0.0;
  double eps = 1.0, h_eps = 0.0;
  double A = 0.0;
};

struct FreqRecord {
  double t = 0.0;
  std::complex<double> psi;
  std::complex<double> one_minus_psi;
  double alpha = 0.0, alpha_plus = 0.0, alpha_minus = 0.0;
  double beta = 0.0, beta_plus = 0.0, beta_minus = 0.0;
  double gamma = 0.0;
  double f = 0.0, f_circ = 0.0;
  double err = 0.0;  // absolute error estimate of alpha/beta/gamma
};

// Per-side truncated functionals of mu_+ or mu_-.
struct SideFunctionals {
  double mu, eta, c, m, c_tilde, m_tilde, first_moment_trunc;
};
SideFunctionals side_functionals(const StepLaw& law, Sign s, double x);

class FunctionalProfile {
 public:
  FunctionalProfile(std::shared_ptr<const StepLaw> law, std::vector<double> grid_x = {},
                    std::vector<double> grid_t = {});
  const StepLaw& law() const { return *law_; }
  std::shared_ptr<const StepLaw> law_ptr() const { return law_; }
  const std::vector<double>& grid_x() const { return grid_x_; }
  const std::vector<double>& grid_t() const { return grid_t_; }

  BasicRecord basic(double x, double eps = 1.0) const;
  FreqRecord freq(double t) const;

 private:
  std::shared_ptr<const StepLaw> law_;
  std::vector<double> grid_x_, grid_t_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, double>, BasicRecord> basic_cache_;
  mutable std::map<double, FreqRecord> freq_cache_;
};

BasicRecord eval_basic(const StepLaw& law, double x, double eps = 1.0);
FreqRecord eval_freq(const StepLaw& law, double t);
inline BasicRecord eval_basic(const FunctionalProfile& p, double x, double eps = 1.0) { return p.basic(x, eps); }
inline FreqRecord eval_freq(const FunctionalProfile& p, double t) { return p.freq(t); }

enum class Verdict { holds, fails, inconclusive };
std::string verdict_name(Verdict v);

struct ConditionEntry {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  double proxy = 0.0;       // limsup or liminf over the final decade
  double threshold = 0.0;
  std::vector<double> witness;  // ratio along the sequence
};

struct ConditionReport {
  std::vector<double> xs;  // geometric sequence (t = 1/x)
  std::vector<ConditionEntry> entries;
  double delta_h = 0.0;
  double c_over_m_min = 0.0, c_over_m_max = 0.0;
  const ConditionEntry& get(const std::string& name) const;
};

// Geometric ratio-2 sequence up to x_max; verdicts from the final decade with 5% slack.
ConditionReport check_conditions(const StepLaw& law, double x_max = 16777216.0, double slack = 0.05);

struct AuditViolation {
  std::string bound;
  double t = 0.0, s = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct AuditReport {
  std::size_t checks = 0;
  std::vector<AuditViolation> violations;
};

// Sandwich bounds on alpha, beta and their moduli of continuity at each t and on pairs t < s <= min(2t, pi).
AuditReport audit_lemma_bounds(const StepLaw& law, const std::vector<double>& ts,
                               const std::vector<std::pair<double, double>>& pairs, double eps = 1.0);

std::string basic_csv(const std::vector<BasicRecord>& rows);
std::string freq_csv(const std::vector<FreqRecord>& rows);
std::string fmt12(double v);

}  // namespace htp
