#include "htp/green_exit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "htp/parallel.hpp"

namespace htp {

HittingModel::HittingModel(std::shared_ptr<const StepLaw> law)
    : law_(std::move(law)), kernel_(std::make_unique<FourierKernel>(law_)) {}

HittingModel::HittingModel(std::shared_ptr<const StepLaw> law, PotentialTable table)
    : law_(std::move(law)), table_(std::move(table)) {}

void HittingModel::store(const KernelPoint& kp) const {
  // one pass yields both signs: a(+-x) = abar +- (b_- - b_+)
  const double odd = kp.b_minus.value - kp.b_plus.value;
  const double e = kp.a.err + kp.b_plus.err + kp.b_minus.err;
  std::lock_guard<std::mutex> lk(mu_);
  memo_[kp.x] = {kp.abar.value + odd, e};
  memo_[-kp.x] = {kp.abar.value - odd, e};
}

Approx HittingModel::a(std::int64_t y) const {
  if (y == 0) return {0.0, 0.0};
  if (table_) {
    const auto i = table_->index(y);
    return {table_->a[i], table_->err[i]};
  }
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = memo_.find(y);
    if (it != memo_.end()) return it->second;
  }
  store(kernel_->eval(std::abs(y)));
  std::lock_guard<std::mutex> lk(mu_);
  return memo_.at(y);
}

Approx HittingModel::abar(std::int64_t y) const {
  auto p = a(y), q = a(-y);
  return {0.5 * (p.value + q.value), 0.5 * (p.err + q.err)};
}

Approx HittingModel::a_dagger(std::int64_t y) const {
  auto v = a(y);
  if (y == 0) v.value += 1.0;
  return v;
}

void HittingModel::prefetch(const std::vector<std::int64_t>& ys) const {
  if (table_) return;
  std::set<std::int64_t> need;
  {
    std::lock_guard<std::mutex> lk(mu_);
    for (auto y : ys)
      if (y != 0 && !memo_.count(y)) need.insert(std::abs(y));
  }
  std::vector<std::int64_t> v(need.begin(), need.end());
  parallel_for(v.size(), [&](std::size_t i) { store(kernel_->eval(v[i])); });
}

Approx green_zero(const HittingModel& m, std::int64_t x, std::int64_t y) {
  const auto ad = m.a_dagger(x), an = m.a(-y), ad2 = m.a(x - y);
  Approx g{ad.value + an.value - ad2.value, ad.err + an.err + ad2.err};
  if (g.value < -(g.err + 1e-12)) throw std::runtime_error("green_zero: negative value beyond error");
  return g;
}

Approx hit_before_zero(const HittingModel& m, std::int64_t x, std::int64_t y) {
  if (y == 0) throw std::invalid_argument("hit_before_zero: y must be nonzero");
  if (y == x) throw std::invalid_argument("hit_before_zero: y must differ from x");
  const auto g = green_zero(m, x, y);
  const auto d = m.abar(y);
  if (!(d.value > 0.0)) throw std::runtime_error("hit_before_zero: abar(y) = 0");
  const double v = g.value / (2.0 * d.value);
  return {v, (g.err + v * 2.0 * d.err) / (2.0 * d.value)};
}

namespace {

struct SpSolution {
  Eigen::MatrixXd pi;
  Eigen::VectorXd u;
  double condition = 0.0, residual = 0.0;
};

// Unknowns: pi(z, y) row-major, then u(y). Equations: the identity at every x in B,
// rows and columns of pi summing to 1, and sum u = 1.
SpSolution solve_sp(const std::vector<std::int64_t>& B, const std::function<double(std::int64_t)>& a) {
  const int n = static_cast<int>(B.size());
  const int nu = n * n + n;
  const int ne = n * n + 2 * n + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ne, nu);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ne);
  auto P = [n](int z, int y) { return z * n + y; };
  int r = 0;
  for (int xi = 0; xi < n; ++xi)
    for (int yi = 0; yi < n; ++yi, ++r) {
      // delta(x, y) = u(y) + sum_z a(x - z) (pi(z, y) - delta(z, y))
      M(r, n * n + yi) = 1.0;
      for (int zi = 0; zi < n; ++zi) {
        const double c = a(B[xi] - B[zi]);
        M(r, P(zi, yi)) += c;
        if (zi == yi) rhs(r) += c;
      }
      rhs(r) += xi == yi ? 1.0 : 0.0;
    }
  for (int z = 0; z < n; ++z, ++r) {
    for (int y = 0; y < n; ++y) M(r, P(z, y)) = 1.0;
    rhs(r) = 1.0;
  }
  for (int y = 0; y < n; ++y, ++r) {
    for (int z = 0; z < n; ++z) M(r, P(z, y)) = 1.0;
    rhs(r) = 1.0;
  }
  for (int y = 0; y < n; ++y) M(r, n * n + y) = 1.0;
  rhs(r) = 1.0;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  SpSolution s;
  s.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (!(s.condition < 1e12)) throw std::runtime_error("hitting_distribution: singular system, condition number " +
                                                      std::to_string(s.condition));
  Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);
  s.residual = (M * sol - rhs).norm();
  s.pi.resize(n, n);
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y) s.pi(z, y) = sol(P(z, y));
  s.u = sol.tail(n);
  return s;
}

// H^x_B(y) for x outside B
std::vector<double> eval_sp(const std::vector<std::int64_t>& B, const SpSolution& s, std::int64_t x,
                            const std::function<double(std::int64_t)>& a) {
  const int n = static_cast<int>(B.size());
  std::vector<double> h(n);
  for (int y = 0; y < n; ++y) {
    double v = s.u(y);
    for (int z = 0; z < n; ++z) v += a(x - B[z]) * (s.pi(z, y) - (z == y ? 1.0 : 0.0));
    h[y] = v;
  }
  return h;
}

}  // namespace

Approx interval_escape(const StepLaw& law, std::int64_t x, std::int64_t Q, std::int64_t R) {
  if (Q <= 0 || R <= 0 || x <= -Q || x >= R || x == 0)
    throw std::invalid_argument("interval_escape: need -Q < x < R, x != 0");
  if (Q + R > 4097) throw std::invalid_argument("interval_escape: interval too long for a dense solve");
  const std::int64_t n = Q + R - 1;  // states -Q+1 .. R-1, with 0 killed
  std::vector<double> pmf(static_cast<std::size_t>(2 * n + 1));
  for (std::int64_t d = -n; d <= n; ++d) pmf[static_cast<std::size_t>(d + n)] = law.pmf(d);
  auto idx = [&](std::int64_t y) { return y + Q - 1; };
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd out(n);
  for (std::int64_t y = -Q + 1; y < R; ++y) {
    const auto i = idx(y);
    if (y == 0) {
      out(i) = 0.0;
      continue;
    }
    for (std::int64_t z = -Q + 1; z < R; ++z)
      if (z != 0) A(i, idx(z)) -= pmf[static_cast<std::size_t>(z - y + n)];
    out(i) = law.mass_ge(Sign::plus, R - y) + law.mass_ge(Sign::minus, Q + y);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd h = lu.solve(out);
  const double res = (A * h - out).lpNorm<Eigen::Infinity>();
  return {h(idx(x)), 1e-12 + 10.0 * res * static_cast<double>(n)};
}

HittingDistribution hitting_distribution(const HittingModel& m, std::vector<std::int64_t> B, std::int64_t x) {
  std::sort(B.begin(), B.end());
  B.erase(std::unique(B.begin(), B.end()), B.end());
  if (B.size() < 2 || B.size() > 3) throw std::invalid_argument("hitting_distribution: |B| must be 2 or 3");
  const int n = static_cast<int>(B.size());
  std::vector<std::int64_t> need;
  for (auto b : B) {
    need.push_back(x - b);
    for (auto c : B) need.push_back(b - c);
  }
  m.prefetch(need);

  auto exact = [&](std::int64_t y) { return m.a(y).value; };
  auto s = solve_sp(B, exact);
  const bool inside = std::find(B.begin(), B.end(), x) != B.end();
  auto value_with = [&](const std::function<double(std::int64_t)>& a, const SpSolution& sol) {
    if (inside) {
      const int xi = static_cast<int>(std::find(B.begin(), B.end(), x) - B.begin());
      std::vector<double> h(n);
      for (int y = 0; y < n; ++y) h[y] = sol.pi(xi, y);
      return h;
    }
    return eval_sp(B, sol, x, a);
  };

  HittingDistribution d;
  d.B = B;
  d.x = x;
  d.h = value_with(exact, s);
  d.condition = s.condition;
  d.residual = s.residual;
  d.u.assign(s.u.data(), s.u.data() + n);
  d.pi.assign(n, std::vector<double>(n));
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y) d.pi[z][y] = s.pi(z, y);

  // sensitivity to the kernel error: shift every a-value by +-err
  d.h_err.assign(n, s.residual);
  for (double sg : {1.0, -1.0}) {
    auto shifted = [&](std::int64_t y) {
      auto v = m.a(y);
      return v.value + sg * v.err;
    };
    auto hs = value_with(shifted, solve_sp(B, shifted));
    for (int y = 0; y < n; ++y) d.h_err[y] = std::max(d.h_err[y], std::abs(hs[y] - d.h[y]) + s.residual);
  }

  if (n == 3 && B[1] == 0 && B[0] < 0 && B[2] > 0) {
    const std::int64_t Q = -B[0], R = B[2];
    auto esc = [&](const std::function<double(std::int64_t)>& a, const SpSolution& sol) {
      const double ad = a(x) + (x == 0 ? 1.0 : 0.0);
      return (a(-R) - a(x - R)) * sol.pi(2, 1) + (a(Q) - a(x + Q)) * sol.pi(0, 1) + ad * (1.0 - sol.pi(1, 1));
    };
    Approx e{esc(exact, s), 0.0};
    for (double sg : {1.0, -1.0}) {
      auto shifted = [&](std::int64_t y) {
        auto v = m.a(y);
        return v.value + sg * v.err;
      };
      e.err = std::max(e.err, std::abs(esc(shifted, solve_sp(B, shifted)) - e.value));
    }
    e.err += s.residual;
    d.escape_from_zero = e;
  }
  return d;
}

const Prediction& ExitPredictions::get(const std::string& name) const {
  for (const auto& p : items)
    if (p.name == name) return p;
  throw std::out_of_range("no prediction named " + name);
}

ExitPredictions exit_predictors(const HittingModel& m, std::int64_t x, std::int64_t Q, std::int64_t R,
                                const std::vector<double>* V_ds) {
  m.prefetch({x, R, Q, Q + R});
  ExitPredictions e;
  e.x = x;
  e.Q = Q;
  e.R = R;
  const double ad = m.a_dagger(x).value, aR = m.a(R).value, aQ = m.a(Q).value, aQR = m.a(Q + R).value;
  e.items.push_back({"one_sided", ad / aR, "0 <= x < R, R large; requires m_+/m -> 0"});
  e.items.push_back({"two_sided", ad * aQR / (aQ * aR),
                     "Q, R large; requires m_+/m -> 0 and |a(Q)-a(x+Q)| + |a(-R)-a(x-R)| = o(a^dagger(x))"});
  e.items.push_back({"top_given_exit", aQ / aQR, "Q, R large; requires m_+/m -> 0"});
  if (V_ds) {
    if (x < 1 || R >= static_cast<std::int64_t>(V_ds->size()))
      throw std::out_of_range("exit_predictors: V_ds does not cover x-1 and R");
    e.items.push_back({"halfline", (*V_ds)[x - 1] / (*V_ds)[R],
                       "1 <= x < R, R large; requires m_+/m -> 0 (Z relatively stable)"});
  }
  return e;
}

InequalityAudit audit_inequalities(const HittingModel& m, const std::vector<InequalityTuple>& tuples) {
  std::vector<std::int64_t> need;
  for (const auto& t : tuples)
    for (auto v : {t.x, t.y, t.x + t.y, -t.y, t.R, -t.R, t.x - t.R, t.R - t.x, -t.x, t.Q, t.x + t.Q, t.Q + t.R,
                   -t.Q - t.R, t.x + t.Q, -t.Q, t.R + t.Q})
      need.push_back(v);
  m.prefetch(need);

  InequalityAudit rep;
  auto check = [&](const std::string& name, const InequalityTuple& at, double lhs, double rhs, double margin) {
    ++rep.checked;
    if (lhs > rhs + margin) rep.violations.push_back({name, at, lhs, rhs, margin});
  };
  auto A = [&](std::int64_t y) { return m.a(y); };
  std::size_t skipped_inc = 0, skipped_refl = 0;
  for (const auto& t : tuples) {
    // -(a(y)/a(-y)) a(x) <= a(x+y) - a(y) <= a(x)
    {
      auto ax = A(t.x), ay = A(t.y), amy = A(-t.y), axy = A(t.x + t.y);
      const double mid = axy.value - ay.value;
      const double e0 = ax.err + ay.err + amy.err + axy.err;
      check("increment_upper", t, mid, ax.value, e0 + 1e-9 * (std::abs(mid) + ax.value));
      if (amy.value > amy.err) {
        const double lo = -(ay.value / amy.value) * ax.value;
        const double e1 = e0 + std::abs(lo) * (ay.err / std::max(ay.value, 1e-300) + amy.err / amy.value);
        check("increment_lower", t, lo, mid, e1 + 1e-9 * (std::abs(lo) + std::abs(mid)));
      } else {
        ++skipped_inc;
      }
    }
    // -(a(x-R)/a(R-x)) a(-x) <= a(-R) - a(x-R) <= a(-R) a(x)/a(R)
    if (t.R != 0) {
      auto aR = A(t.R), amR = A(-t.R), axR = A(t.x - t.R), aRx = A(t.R - t.x), amx = A(-t.x), ax = A(t.x);
      const double mid = amR.value - axR.value;
      if (aR.value > aR.err && aRx.value > aRx.err) {
        const double hi = amR.value * ax.value / aR.value;
        const double lo = -(axR.value / aRx.value) * amx.value;
        const double e0 = amR.err + axR.err;
        const double ehi = e0 + (amR.err * ax.value + amR.value * ax.err) / aR.value + hi * aR.err / aR.value;
        const double elo = e0 + amx.err * axR.value / aRx.value + std::abs(lo) * (axR.err / std::max(axR.value, 1e-300) +
                                                                                 aRx.err / aRx.value);
        check("reflected_upper", t, mid, hi, ehi + 1e-9 * (std::abs(mid) + std::abs(hi)));
        check("reflected_lower", t, lo, mid, elo + 1e-9 * (std::abs(mid) + std::abs(lo)));
      } else {
        ++skipped_refl;
      }
    }
    // P[sigma_{-Q} < sigma_R < sigma_0] <= P[sigma_{-Q} < sigma_0] P^{-Q}[sigma_R < sigma_0]
    if (t.Q > 0 && t.R > 0 && t.x > -t.Q && t.x < t.R && t.x != 0) {
      auto hd = hitting_distribution(m, {-t.Q, 0, t.R}, t.x);
      auto pQ = hit_before_zero(m, t.x, -t.Q);
      auto pR = hit_before_zero(m, -t.Q, t.R);
      const double lhs = hd.h[0] * pR.value, rhs = pQ.value * pR.value;
      check("exit_order", t, lhs, rhs, hd.h_err[0] * pR.value + pQ.err * pR.value + 1e-12);
    }
  }
  rep.skipped = skipped_inc + skipped_refl;
  if (skipped_inc) rep.log.push_back("increment lower bound skipped at " + std::to_string(skipped_inc) + " tuples with a(-y) = 0");
  if (skipped_refl) rep.log.push_back("reflected bounds skipped at " + std::to_string(skipped_refl) + " tuples with a(R) a(R-x) = 0");
  return rep;
}

std::string ExitReport::to_json() const {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["law"] = law;
  j["query"] = query;
  j["exact"] = opt(exact);
  j["predictor"] = opt(predictor);
  j["mc_estimate"] = opt(mc_estimate);
  j["mc_se"] = opt(mc_se);
  j["verdict"] = verdict;
  return j.dump();
}

}  // namespace htp
