#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "htp/step_laws.hpp"

namespace htp {

struct StopCondition {
  enum class Kind { hit_point, halfline_up, halfline_down, hit_set, exit_interval };
  Kind kind = Kind::hit_point;
  std::int64_t level = 0;            // point y, R for S >= R, L for S <= L, lower end for exit_interval
  std::vector<std::int64_t> points;  // hit_set; exit_interval holds the upper end
  static StopCondition hit(std::int64_t y) { return {Kind::hit_point, y, {}}; }
  static StopCondition up(std::int64_t R) { return {Kind::halfline_up, R, {}}; }
  static StopCondition down(std::int64_t L) { return {Kind::halfline_down, L, {}}; }
  static StopCondition set(std::vector<std::int64_t> B) { return {Kind::hit_set, 0, std::move(B)}; }
  // S <= lo or S >= hi
  static StopCondition exit(std::int64_t lo, std::int64_t hi) { return {Kind::exit_interval, lo, {hi}}; }
  bool met(std::int64_t s) const;
  std::string describe() const;
};

// P[first stops strictly before second], times n >= 1. A step meeting both counts as a loss.
struct RaceSpec {
  std::int64_t start = 0;
  StopCondition first, second;
  std::uint64_t step_budget = std::uint64_t{1} << 26;
  std::string describe() const;
};

struct McEstimate {
  double estimate = 0.0, se = 0.0;
  std::uint64_t replicas = 0, wins = 0, losses = 0, overflows = 0;
  std::uint64_t seed = 0;
  std::string spec;
  double overflow_fraction() const { return replicas ? double(overflows) / double(replicas) : 0.0; }
  bool valid() const { return overflow_fraction() < 1e-3; }
};

constexpr std::uint64_t k_chunk_replicas = 4096;

McEstimate estimate_event(const StepLaw& law, const RaceSpec& spec, std::uint64_t replicas, std::uint64_t seed);

// P[the stopping position meets `target` | first wins the race]
McEstimate conditional_event(const StepLaw& law, const RaceSpec& spec, const StopCondition& target,
                             std::uint64_t replicas, std::uint64_t seed);

struct CdfPoint {
  double at = 0.0;
  double cdf = 0.0, se = 0.0;
};

struct OvershootResult {
  std::int64_t R = 0;
  std::vector<CdfPoint> points;  // empirical CDF of (S_{sigma[R,inf)} - R)/R
  double band = 0.0;             // 95% uniform DKW half-width
  std::uint64_t replicas = 0, accepted = 0, overflows = 0;
  double acceptance() const { return replicas ? double(accepted) / double(replicas) : 0.0; }
};

enum class Conditioning { none, avoid_zero };

// avoid_zero keeps the paths with sigma_[R,inf) < sigma_0; throws if acceptance < 1e-4
OvershootResult overshoot_law(const StepLaw& law, std::int64_t R, Conditioning cond, const std::vector<double>& at,
                              std::uint64_t replicas, std::uint64_t seed, std::int64_t start = 0,
                              std::uint64_t step_budget = std::uint64_t{1} << 26);

struct TauExcursion {
  McEstimate unconditioned;  // P[S_tau(R) > -R + eps R]
  McEstimate conditioned;    // same, restricted to paths entering (-inf,-R] before returning to 0
};

// tau(R): first exit from (-inf, -R] after entering it
TauExcursion tau_excursion(const StepLaw& law, std::int64_t R, double eps, std::uint64_t replicas, std::uint64_t seed,
                           std::uint64_t step_budget = std::uint64_t{1} << 26);

struct VisitTail {
  double t = 0.0;
  double tail = 0.0, se = 0.0;
  double limit = 0.0;  // e^{-t}
};

struct VisitCountResult {
  double normalizer = 0.0;  // (#I) q
  std::vector<VisitTail> tails;
  double mean_count = 0.0;
  std::uint64_t replicas = 0, overflows = 0;
  double max_deviation() const;
};

// one_sided: visits to I before sigma_[R,inf); two_sided: before leaving (-Q, R).
// q is supplied by the caller (see green_exit for the normalizations in use).
VisitCountResult visit_count_law(const StepLaw& law, const std::vector<std::int64_t>& I, std::int64_t Q,
                                 std::int64_t R, bool two_sided, double q, const std::vector<double>& ts,
                                 std::uint64_t replicas, std::uint64_t seed,
                                 std::uint64_t step_budget = std::uint64_t{1} << 30);

struct SpitzerPoint {
  std::int64_t n = 0;
  double positive = 0.0, se = 0.0;
  double at_zero = 0.0;  // P[S_n = 0]
};

std::vector<SpitzerPoint> spitzer_estimate(const StepLaw& law, const std::vector<std::int64_t>& n_grid,
                                           std::uint64_t replicas, std::uint64_t seed);

bool skip_free_up(const StepLaw& law);

}  // namespace htp
