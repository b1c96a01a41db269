#include "htp/mc_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "htp/parallel.hpp"
#include "htp/rng.hpp"

namespace htp {

bool StopCondition::met(std::int64_t s) const {
  switch (kind) {
    case Kind::hit_point:
      return s == level;
    case Kind::halfline_up:
      return s >= level;
    case Kind::halfline_down:
      return s <= level;
    case Kind::hit_set:
      return std::find(points.begin(), points.end(), s) != points.end();
    case Kind::exit_interval:
      return s <= level || s >= points.at(0);
  }
  return false;
}

std::string StopCondition::describe() const {
  switch (kind) {
    case Kind::hit_point:
      return "hit:" + std::to_string(level);
    case Kind::halfline_up:
      return "up:" + std::to_string(level);
    case Kind::halfline_down:
      return "down:" + std::to_string(level);
    case Kind::hit_set: {
      std::string s = "set:";
      for (std::size_t i = 0; i < points.size(); ++i) s += (i ? "|" : "") + std::to_string(points[i]);
      return s;
    }
    case Kind::exit_interval:
      return "out:" + std::to_string(level) + ":" + std::to_string(points.at(0));
  }
  return "";
}

std::string RaceSpec::describe() const {
  return "race(" + first.describe() + ", " + second.describe() + ") from " + std::to_string(start);
}

bool skip_free_up(const StepLaw& law) {
  const Side& p = law.side(Sign::plus);
  if (p.tail.kind != TailDescriptor::Kind::zero) return false;
  for (auto& [j, w] : p.atoms)
    if (j > 1 && w > 0.0) return false;
  return true;
}

namespace {

// With upward steps of size one, a walk below every level of interest reaches the
// lowest such level exactly, so the excursion below it can be skipped.
struct FastForward {
  bool on = false;
  std::int64_t floor = 0;
};

std::int64_t lowest_level(const StopCondition& c) {
  if (c.kind == StopCondition::Kind::hit_set) return *std::min_element(c.points.begin(), c.points.end());
  return c.level;
}

FastForward race_fast_forward(const StepLaw& law, const RaceSpec& spec) {
  FastForward f;
  if (!skip_free_up(law)) return f;
  for (const auto* c : {&spec.first, &spec.second})
    if (c->kind == StopCondition::Kind::halfline_down || c->kind == StopCondition::Kind::exit_interval) return f;
  f.on = true;
  f.floor = std::min(lowest_level(spec.first), lowest_level(spec.second));
  return f;
}

std::uint64_t chunk_count(std::uint64_t replicas) { return (replicas + k_chunk_replicas - 1) / k_chunk_replicas; }

std::uint64_t chunk_size(std::uint64_t c, std::uint64_t replicas) {
  return std::min(k_chunk_replicas, replicas - c * k_chunk_replicas);
}

enum class Outcome { win, loss, overflow };

// Runs one race path; pos receives the final position.
inline Outcome run_race(const Sampler& draw, Rng& rng, const RaceSpec& spec, const FastForward& ff, std::int64_t& pos) {
  std::int64_t s = spec.start;
  for (std::uint64_t n = 0; n < spec.step_budget; ++n) {
    s += draw(rng);
    if (ff.on && s < ff.floor) s = ff.floor;
    const bool b = spec.second.met(s);
    if (b || spec.first.met(s)) {
      pos = s;
      return b ? Outcome::loss : Outcome::win;
    }
  }
  pos = s;
  return Outcome::overflow;
}

double bernoulli_se(double p, double n) { return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / n) : 0.0; }

void require_replicas(std::uint64_t n) {
  if (n < 1000) throw std::invalid_argument("monte carlo: at least 1000 replicas required");
}

}  // namespace

McEstimate estimate_event(const StepLaw& law, const RaceSpec& spec, std::uint64_t replicas, std::uint64_t seed) {
  require_replicas(replicas);
  if (spec.step_budget == 0) throw std::invalid_argument("estimate_event: step budget must be positive");
  const Sampler draw(law);
  const auto ff = race_fast_forward(law, spec);
  const auto nc = chunk_count(replicas);
  std::vector<std::array<std::uint64_t, 3>> counts(nc, {0, 0, 0});
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    std::int64_t pos = 0;
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i)
      ++counts[c][static_cast<int>(run_race(draw, rng, spec, ff, pos))];
  });
  McEstimate e;
  for (const auto& c : counts) {
    e.wins += c[0];
    e.losses += c[1];
    e.overflows += c[2];
  }
  e.replicas = replicas;
  e.seed = seed;
  e.spec = spec.describe();
  const double decided = static_cast<double>(e.wins + e.losses);
  e.estimate = decided > 0 ? static_cast<double>(e.wins) / decided : 0.0;
  e.se = bernoulli_se(e.estimate, decided);
  return e;
}

McEstimate conditional_event(const StepLaw& law, const RaceSpec& spec, const StopCondition& target,
                             std::uint64_t replicas, std::uint64_t seed) {
  require_replicas(replicas);
  const Sampler draw(law);
  const auto ff = race_fast_forward(law, spec);
  const auto nc = chunk_count(replicas);
  // per chunk: [target met, first won otherwise, second won, overflow]
  std::vector<std::array<std::uint64_t, 4>> counts(nc, {0, 0, 0, 0});
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    std::int64_t pos = 0;
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i) {
      auto o = run_race(draw, rng, spec, ff, pos);
      if (o == Outcome::win)
        ++counts[c][target.met(pos) ? 0 : 1];
      else
        ++counts[c][o == Outcome::loss ? 2 : 3];
    }
  });
  std::array<std::uint64_t, 4> t{0, 0, 0, 0};
  for (const auto& c : counts)
    for (int k = 0; k < 4; ++k) t[k] += c[k];
  McEstimate e;
  e.replicas = replicas;
  e.seed = seed;
  e.spec = spec.describe() + " | stop at " + target.describe();
  e.wins = t[0];
  e.losses = t[1] + t[2];
  e.overflows = t[3];
  const double n = static_cast<double>(t[0] + t[1]);
  e.estimate = n > 0 ? static_cast<double>(t[0]) / n : 0.0;
  e.se = bernoulli_se(e.estimate, n);
  return e;
}

OvershootResult overshoot_law(const StepLaw& law, std::int64_t R, Conditioning cond, const std::vector<double>& at,
                              std::uint64_t replicas, std::uint64_t seed, std::int64_t start,
                              std::uint64_t step_budget) {
  require_replicas(replicas);
  if (R <= start) throw std::invalid_argument("overshoot_law: R must exceed the start");
  RaceSpec spec;
  spec.start = start;
  spec.first = {StopCondition::Kind::halfline_up, R, {}};
  // without conditioning the second condition can never fire
  spec.second = cond == Conditioning::avoid_zero ? StopCondition{StopCondition::Kind::hit_point, 0, {}}
                                                 : StopCondition{StopCondition::Kind::hit_point,
                                                                 std::numeric_limits<std::int64_t>::min(), {}};
  spec.step_budget = step_budget;
  const Sampler draw(law);
  auto ff = race_fast_forward(law, spec);
  if (cond == Conditioning::none) ff.floor = R;
  const auto nc = chunk_count(replicas);
  struct Acc {
    std::vector<std::uint64_t> le;
    std::uint64_t accepted = 0, overflows = 0;
  };
  std::vector<Acc> acc(nc);
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    Acc& a = acc[c];
    a.le.assign(at.size(), 0);
    std::int64_t pos = 0;
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i) {
      auto o = run_race(draw, rng, spec, ff, pos);
      if (o == Outcome::overflow) {
        ++a.overflows;
        continue;
      }
      if (o != Outcome::win) continue;
      ++a.accepted;
      const double z = static_cast<double>(pos - R) / static_cast<double>(R);
      for (std::size_t k = 0; k < at.size(); ++k)
        if (z <= at[k]) ++a.le[k];
    }
  });
  OvershootResult r;
  r.R = R;
  r.replicas = replicas;
  std::vector<std::uint64_t> le(at.size(), 0);
  for (const auto& a : acc) {
    r.accepted += a.accepted;
    r.overflows += a.overflows;
    for (std::size_t k = 0; k < at.size(); ++k) le[k] += a.le[k];
  }
  if (cond == Conditioning::avoid_zero && r.acceptance() < 1e-4)
    throw std::runtime_error("overshoot_law: conditioning acceptance below 1e-4");
  const double n = static_cast<double>(r.accepted);
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double p = n > 0 ? static_cast<double>(le[k]) / n : 0.0;
    r.points.push_back({at[k], p, bernoulli_se(p, n)});
  }
  r.band = n > 0 ? std::sqrt(std::log(2.0 / 0.05) / (2.0 * n)) : 1.0;
  return r;
}

TauExcursion tau_excursion(const StepLaw& law, std::int64_t R, double eps, std::uint64_t replicas, std::uint64_t seed,
                           std::uint64_t step_budget) {
  require_replicas(replicas);
  if (R <= 0) throw std::invalid_argument("tau_excursion: R must be positive");
  const Sampler draw(law);
  const double thr = -static_cast<double>(R) + eps * static_cast<double>(R);
  const auto nc = chunk_count(replicas);
  // per chunk: [uncond hits, uncond n, cond hits, cond n, overflows]
  std::vector<std::array<std::uint64_t, 5>> acc(nc, {0, 0, 0, 0, 0});
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    auto& a = acc[c];
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i) {
      std::int64_t s = 0;
      bool entered = false, returned = false, done = false;
      for (std::uint64_t n = 0; n < step_budget; ++n) {
        s += draw(rng);
        if (!entered) {
          if (s == 0) returned = true;
          if (s <= -R) entered = true;
        } else if (s > -R) {
          done = true;
          break;
        }
      }
      if (!done) {
        ++a[4];
        continue;
      }
      const bool hit = static_cast<double>(s) > thr;
      ++a[1];
      a[0] += hit;
      if (!returned) {
        ++a[3];
        a[2] += hit;
      }
    }
  });
  std::array<std::uint64_t, 5> t{0, 0, 0, 0, 0};
  for (const auto& a : acc)
    for (int k = 0; k < 5; ++k) t[k] += a[k];
  TauExcursion r;
  auto fill = [&](McEstimate& e, std::uint64_t hits, std::uint64_t n, const std::string& what) {
    e.replicas = replicas;
    e.seed = seed;
    e.wins = hits;
    e.losses = n - hits;
    e.overflows = t[4];
    e.estimate = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    e.se = bernoulli_se(e.estimate, static_cast<double>(n));
    std::ostringstream os;
    os << "tau_excursion(R=" << R << ", eps=" << eps << ")" << what;
    e.spec = os.str();
  };
  fill(r.unconditioned, t[0], t[1], "");
  fill(r.conditioned, t[2], t[3], " | enter before return to 0");
  // paths discarded by the conditioning are not overflows of the conditioned estimate
  r.conditioned.losses = t[3] - t[2];
  return r;
}

double VisitCountResult::max_deviation() const {
  double m = 0.0;
  for (const auto& v : tails) m = std::max(m, std::abs(v.tail - v.limit));
  return m;
}

VisitCountResult visit_count_law(const StepLaw& law, const std::vector<std::int64_t>& I, std::int64_t Q,
                                 std::int64_t R, bool two_sided, double q, const std::vector<double>& ts,
                                 std::uint64_t replicas, std::uint64_t seed, std::uint64_t step_budget) {
  require_replicas(replicas);
  if (I.empty() || I.size() > 8) throw std::invalid_argument("visit_count_law: I must have 1..8 points");
  if (!(q > 0.0)) throw std::invalid_argument("visit_count_law: normalizer must be positive");
  const std::int64_t lo = *std::min_element(I.begin(), I.end());
  const std::int64_t hi = *std::max_element(I.begin(), I.end());
  if (hi >= R || (two_sided && lo <= -Q)) throw std::invalid_argument("visit_count_law: I must lie inside the domain");
  const Sampler draw(law);
  const bool ff = !two_sided && skip_free_up(law);
  const double norm = static_cast<double>(I.size()) * q;
  std::vector<std::uint64_t> thresholds;
  for (double t : ts) thresholds.push_back(static_cast<std::uint64_t>(std::ceil(t * norm)));
  const auto nc = chunk_count(replicas);
  struct Acc {
    std::vector<std::uint64_t> ge;
    double sum = 0.0;
    std::uint64_t overflows = 0;
  };
  std::vector<Acc> acc(nc);
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    Acc& a = acc[c];
    a.ge.assign(ts.size(), 0);
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i) {
      std::int64_t s = 0;
      std::uint64_t count = 0;
      bool done = false;
      for (std::uint64_t n = 0; n < step_budget; ++n) {
        if (s >= lo && s <= hi && std::find(I.begin(), I.end(), s) != I.end()) ++count;
        s += draw(rng);
        if (s >= R || (two_sided && s <= -Q)) {
          done = true;
          break;
        }
        if (ff && s < lo) s = lo;
      }
      if (!done) {
        ++a.overflows;
        continue;
      }
      a.sum += static_cast<double>(count);
      for (std::size_t k = 0; k < ts.size(); ++k)
        if (count >= thresholds[k]) ++a.ge[k];
    }
  });
  VisitCountResult r;
  r.normalizer = norm;
  r.replicas = replicas;
  std::vector<std::uint64_t> ge(ts.size(), 0);
  double sum = 0.0;
  for (const auto& a : acc) {
    r.overflows += a.overflows;
    sum += a.sum;
    for (std::size_t k = 0; k < ts.size(); ++k) ge[k] += a.ge[k];
  }
  const double n = static_cast<double>(replicas - r.overflows);
  r.mean_count = n > 0 ? sum / n : 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double p = n > 0 ? static_cast<double>(ge[k]) / n : 0.0;
    r.tails.push_back({ts[k], p, bernoulli_se(p, n), std::exp(-ts[k])});
  }
  return r;
}

std::vector<SpitzerPoint> spitzer_estimate(const StepLaw& law, const std::vector<std::int64_t>& n_grid,
                                           std::uint64_t replicas, std::uint64_t seed) {
  require_replicas(replicas);
  if (n_grid.empty()) throw std::invalid_argument("spitzer_estimate: empty n grid");
  std::vector<std::int64_t> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 1) throw std::invalid_argument("spitzer_estimate: n must be positive");
  const Sampler draw(law);
  const auto nc = chunk_count(replicas);
  std::vector<std::vector<std::array<std::uint64_t, 2>>> acc(nc);
  parallel_for(nc, [&](std::size_t c) {
    Rng rng(seed, c);
    auto& a = acc[c];
    a.assign(grid.size(), {0, 0});
    for (std::uint64_t i = 0; i < chunk_size(c, replicas); ++i) {
      std::int64_t s = 0, n = 0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        for (; n < grid[k]; ++n) s += draw(rng);
        a[k][0] += s > 0;
        a[k][1] += s == 0;
      }
    }
  });
  std::vector<SpitzerPoint> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::uint64_t pos = 0, zero = 0;
    for (const auto& a : acc) {
      pos += a[k][0];
      zero += a[k][1];
    }
    const double n = static_cast<double>(replicas);
    const double p = static_cast<double>(pos) / n;
    out.push_back({grid[k], p, bernoulli_se(p, n), static_cast<double>(zero) / n});
  }
  return out;
}

}  // namespace htp
