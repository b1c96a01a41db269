#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htp/special.hpp"

namespace htp {

class Rng;

enum class Family { simple_pm1, stable_attraction, sparse_spectrum, renewal_logheavy, custom };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct BuiltinSpec {
  Family family = Family::simple_pm1;
  double alpha = 1.5;       // stable_attraction, sparse_spectrum
  double p = 0.5;           // stable_attraction: right-tail share
  int n_max = 4;            // sparse_spectrum
  double tail_const = 1.0;  // renewal_logheavy: P[T > n] = c/(n+1)
  std::int64_t cutoff = std::int64_t{1} << 20;
};

class LawError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed-form family covering all j >= k0 on one side.
struct TailDescriptor {
  enum class Kind { zero, power, harmonic };
  Kind kind = Kind::zero;
  double coef = 0.0;    // power: p(j) = coef * j^{-s}; harmonic: p(j) = coef / (j (j+1))
  double s = 0.0;
  std::int64_t k0 = 1;
};

struct Side {
  std::vector<std::pair<std::int64_t, double>> atoms;  // j > 0, sorted, distinct
  TailDescriptor tail;
};

enum class Sign { plus, minus };

struct LawCheck {
  double total_mass_error = 0.0;
  double mean = 0.0;
  bool finite_mean = true;
  bool nonnegative = true;
  bool monotone_tails = true;
  bool irreducible = true;
  bool ok() const;
  std::string describe() const;
};

class StepLaw {
 public:
  StepLaw() = default;
  StepLaw(std::string name, double p0, Side plus, Side minus, std::int64_t cutoff);

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  const BuiltinSpec& spec() const { return spec_; }
  void set_spec(const BuiltinSpec& s) { spec_ = s; }
  double p0() const { return p0_; }
  const Side& side(Sign s) const { return s == Sign::plus ? plus_ : minus_; }
  std::int64_t cutoff() const { return cutoff_; }

  double pmf(std::int64_t k) const;
  // sum_{j >= n} p(+-j), n >= 1
  double mass_ge(Sign s, std::int64_t n) const;
  // sum_{j=a}^{b} j^r p(+-j); b may be k_inf_index
  double moment(Sign s, int r, std::int64_t a, std::int64_t b) const;
  // mu_+(x) = P[X > x], mu_-(x) = P[X < -x], x >= 0 real
  double mu(Sign s, double x) const;
  double mu_total(double x) const { return mu(Sign::plus, x) + mu(Sign::minus, x); }
  double mean() const;
  bool finite_mean() const;
  double total_mass() const;

  // largest jump magnitude on a side; k_inf_index when a tail descriptor is present
  std::int64_t max_jump(Sign s) const;
  // largest finite atom magnitude, sets the oscillation scale of psi
  std::int64_t atom_scale() const;
  // asymptotic Pareto tail mu_s(x) ~ C x^{-index}; nullopt if no power tail
  std::optional<std::pair<double, double>> pareto_tail(Sign s) const;

  // sum_j p(+-j) (1 - e^{ijt} + ijt) = t (alpha_+- + i beta_+-)
  std::complex<double> phi_side(Sign s, double t) const;
  // 1 - psi(t) for a zero-mean law, evaluated without cancellation
  std::complex<double> one_minus_psi(double t) const;
  // E e^{itX}; valid for any law including infinite mean
  std::complex<double> char_fn(double t) const;

  LawCheck check() const;
  void validate() const;  // throws LawError if any invariant fails

  std::string to_json() const;
  static StepLaw from_json(const std::string& text);
  std::string hash() const;

 private:
  std::string name_ = "custom";
  BuiltinSpec spec_{Family::custom};
  double p0_ = 0.0;
  Side plus_, minus_;
  std::int64_t cutoff_ = 0;
  std::optional<PolylogRemainder> series_plus_, series_minus_;
  void init_series();
};

StepLaw make_builtin(const BuiltinSpec& spec);

// p_*: fold |X| > N onto {1} and {k < -N}; support in {k <= 1}
struct CensorResult {
  StepLaw law;
  std::int64_t n_used = 0;
};
CensorResult censor_transform(const StepLaw& law, std::int64_t n_bound = std::int64_t{1} << 20);

// Alias table over the body plus exact conditional sampling of the closed-form tails.
class Sampler {
 public:
  explicit Sampler(const StepLaw& law, std::int64_t alias_span = 4096);
  std::int64_t operator()(Rng& rng) const;
  std::vector<std::int64_t> draw(Rng& rng, std::size_t n) const;

 private:
  struct Entry {
    double prob;
    std::int32_t alias;
  };
  struct TailSampler {
    int sign = 1;
    TailDescriptor desc;
    std::int64_t start = 0;
    double accept_norm = 1.0;
  };
  std::vector<Entry> table_;
  std::vector<std::int64_t> value_;
  std::vector<int> tail_index_;  // -1 for plain atoms
  std::vector<TailSampler> tails_;
  std::int64_t draw_tail(const TailSampler& ts, Rng& rng) const;
};

}  // namespace htp
