#pragma once

// Subadditive arrays with missing values: the K-penalized minimum-chain
// process, its exact invariants, convergence traces and the square-root
// summation inequality used to control bad runs.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "models.hpp"
#include "network.hpp"
#include "pointset.hpp"
#include "random.hpp"
#include "shapestat.hpp"

namespace shapeline {

/// Indices 0..n with good indicators and values X(i,j), i < j, read only on
/// good pairs. Storage is either a dense (n+1)^2 table or, for additive
/// arrays X(i,j) = P[j] - P[i], the prefix sums P.
class MissingValueArray {
 public:
  static MissingValueArray dense(std::vector<char> good, std::vector<double> values) {
    MissingValueArray a;
    a.n_ = good.empty() ? 0 : good.size() - 1;
    if (good.empty()) throw invalid_argument("array needs at least one index");
    if (values.size() != good.size() * good.size()) throw invalid_argument("dense values must be (n+1)^2");
    a.good_ = std::move(good);
    a.values_ = std::move(values);
    for (std::size_t i = 0; i <= a.n_; ++i)
      for (std::size_t j = i + 1; j <= a.n_; ++j)
        if (a.good_[i] && a.good_[j] && !(a.raw(i, j) >= 0.0 && std::isfinite(a.raw(i, j))))
          throw invalid_argument("X(" + std::to_string(i) + "," + std::to_string(j) + ") must be finite and >= 0");
    return a;
  }

  static MissingValueArray additive(std::vector<char> good, std::vector<double> prefix) {
    MissingValueArray a;
    if (good.empty() || prefix.size() != good.size()) throw invalid_argument("prefix sums must have n+1 entries");
    a.n_ = good.size() - 1;
    for (std::size_t i = 0; i < prefix.size(); ++i)
      if (!std::isfinite(prefix[i]) || (i > 0 && prefix[i] < prefix[i - 1]))
        throw invalid_argument("prefix sums must be finite and non-decreasing");
    a.good_ = std::move(good);
    a.prefix_ = std::move(prefix);
    a.additive_ = true;
    return a;
  }

  std::size_t n() const noexcept { return n_; }
  bool good(std::size_t i) const { return good_.at(i) != 0; }
  const std::vector<char>& good_flags() const noexcept { return good_; }
  bool is_additive() const noexcept { return additive_; }
  const std::vector<double>& prefix() const noexcept { return prefix_; }

  double value(std::size_t i, std::size_t j) const {
    if (!(i < j && j <= n_)) throw invalid_argument("value needs 0 <= i < j <= n");
    if (!good_[i] || !good_[j])
      throw invalid_argument("X(" + std::to_string(i) + "," + std::to_string(j) + ") is undefined (bad index)");
    return raw(i, j);
  }

  /// The array on indices start..n, renumbered from 0.
  MissingValueArray suffix(std::size_t start) const {
    if (start >= n_) throw invalid_argument("suffix start must be < n");
    std::vector<char> g(good_.begin() + static_cast<std::ptrdiff_t>(start), good_.end());
    if (additive_) {
      std::vector<double> p;
      for (std::size_t i = start; i <= n_; ++i) p.push_back(prefix_[i] - prefix_[start]);
      return additive(std::move(g), std::move(p));
    }
    const std::size_t m = n_ - start;
    std::vector<double> v((m + 1) * (m + 1), 0.0);
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = i + 1; j <= m; ++j) v[i * (m + 1) + j] = raw(i + start, j + start);
    return dense(std::move(g), std::move(v));
  }

  double delta_hat() const {
    std::size_t g = 0;
    for (char c : good_) g += c != 0;
    return static_cast<double>(g) / static_cast<double>(good_.size());
  }

 private:
  double raw(std::size_t i, std::size_t j) const {
    return additive_ ? prefix_[j] - prefix_[i] : values_[i * (n_ + 1) + j];
  }

  std::size_t n_ = 0;
  std::vector<char> good_;
  std::vector<double> values_;
  std::vector<double> prefix_;
  bool additive_ = false;
};

namespace detail {

inline bool regions_disjoint_along(const Region& A, double r0, double theta) {
  const double dx = std::abs(r0 * std::cos(theta)), dy = std::abs(r0 * std::sin(theta));
  if (A.shape == Region::Shape::disc) return r0 > 2.0 * A.radius;
  return dx > 2.0 * A.half_width || dy > 2.0 * A.half_height;
}

}  // namespace detail

/// Ray array: cell i is A translated to origin + i*r0*(cos, sin); a cell is
/// good when it holds a point, and one of its points is chosen uniformly.
template <class Metric>
MissingValueArray extract_array(const Metric& m, const Region& A, double theta, double r0, std::size_t n,
                                std::uint64_t seed) {
  const PointSet& ps = points_of(m);
  const Window& w = ps.window();
  if (n == 0) throw invalid_argument("extract_array needs n >= 1");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw invalid_argument("r0 must be positive");
  if (!detail::regions_disjoint_along(A, r0, theta)) throw invalid_argument("translates of A overlap at this r0");
  if (static_cast<double>(n) * r0 > w.min_side() / 3.0) throw invalid_argument("n*r0 exceeds window_side/3");
  Engine eng = make_engine(seed, stream::cells, 0);
  const Point origin = w.center();
  std::vector<char> good(n + 1, 0);
  std::vector<std::size_t> chosen(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) {
    auto in = points_in(ps, A.translated_to(polar_point(w, origin, static_cast<double>(i) * r0, theta)));
    std::erase_if(in, [&](std::size_t k) { return ps.is_planted(k); });
    if (!in.empty()) {
      good[i] = 1;
      chosen[i] = in[uniform_index(eng, in.size())];
    }
  }
  std::vector<double> values((n + 1) * (n + 1), 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    if (!good[i]) continue;
    std::vector<std::size_t> targets, where;
    for (std::size_t j = i + 1; j <= n; ++j)
      if (good[j]) {
        targets.push_back(chosen[j]);
        where.push_back(j);
      }
    if (targets.empty()) continue;
    const auto d = m.route_lengths_from(chosen[i], targets);
    for (std::size_t k = 0; k < where.size(); ++k) values[i * (n + 1) + where[k]] = d[k];
  }
  return MissingValueArray::dense(std::move(good), std::move(values));
}

/// Additive test bed: good indices Bernoulli(delta), step costs w_k drawn
/// from `law` and rounded to the 2^-32 grid so every partial sum is exact.
inline MissingValueArray synthetic_array(std::size_t n, double delta, const CostLaw& law, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw invalid_argument("delta must be in (0, 1]");
  law.validate();
  if (n == 0) throw invalid_argument("synthetic_array needs n >= 1");
  Engine eng = make_engine(seed, stream::synthetic, 0);
  std::vector<char> good(n + 1);
  for (auto& g : good) g = bernoulli(eng, delta) ? 1 : 0;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double x = std::ldexp(std::round(std::ldexp(law.draw(eng), 32)), -32);
    if (x <= 0.0) x = 0x1.0p-32;
    prefix[k + 1] = prefix[k] + x;
  }
  if (prefix[n] >= 0x1.0p20) throw invalid_argument("synthetic array total too large for exact sums");
  return MissingValueArray::additive(std::move(good), std::move(prefix));
}

/// Y(0,j) for j = 0..n and the recorded optimal chain into each j.
struct PenalizedTable {
  double K = 0.0;
  std::vector<double> y;
  std::vector<std::size_t> penalized;  // penalized unit steps on the chain to j
  std::vector<std::size_t> pred;       // previous index on that chain

  /// Chain 0 = i_0 < ... < i_m = j.
  std::vector<std::size_t> path(std::size_t j) const {
    std::vector<std::size_t> p{j};
    while (j != 0) p.push_back(j = pred[j]);
    std::reverse(p.begin(), p.end());
    return p;
  }
};

/// Exact minimum over chains from 0 with steps X(i,j) on good pairs and
/// unit steps of cost K where a pair is not both good. Equal values are
/// broken toward fewer penalized steps, then toward the smaller predecessor.
inline PenalizedTable penalized_min(const MissingValueArray& arr, double K) {
  if (!(K > 0.0) || !std::isfinite(K)) throw invalid_argument("K must be positive");
  const std::size_t n = arr.n();
  PenalizedTable t;
  t.K = K;
  t.y.assign(n + 1, 0.0);
  t.penalized.assign(n + 1, 0);
  t.pred.assign(n + 1, 0);
  auto better = [&](double v, std::size_t pen, std::size_t j) {
    return v < t.y[j] || (v == t.y[j] && pen < t.penalized[j]);
  };
  // additive storage: min over good i of y[i] + P[j] - P[i] is P[j] plus a
  // running minimum of y[i] - P[i]; every value sits on the 2^-32 grid
  std::optional<std::size_t> best_good;
  for (std::size_t j = 1; j <= n; ++j) {
    t.y[j] = INFINITY;
    if (!(arr.good(j - 1) && arr.good(j))) {
      t.y[j] = t.y[j - 1] + K;
      t.penalized[j] = t.penalized[j - 1] + 1;
      t.pred[j] = j - 1;
    }
    if (arr.is_additive()) {
      if (arr.good(j - 1)) {
        const std::size_t i = j - 1;
        const auto& P = arr.prefix();
        if (!best_good || (t.y[i] - P[i] < t.y[*best_good] - P[*best_good]) ||
            (t.y[i] - P[i] == t.y[*best_good] - P[*best_good] && t.penalized[i] < t.penalized[*best_good]))
          best_good = i;
      }
      if (arr.good(j) && best_good) {
        const std::size_t i = *best_good;
        const double v = t.y[i] + arr.value(i, j);
        if (better(v, t.penalized[i], j)) {
          t.y[j] = v;
          t.penalized[j] = t.penalized[i];
          t.pred[j] = i;
        }
      }
    } else if (arr.good(j)) {
      for (std::size_t i = 0; i < j; ++i) {
        if (!arr.good(i)) continue;
        const double v = t.y[i] + arr.value(i, j);
        if (better(v, t.penalized[i], j)) {
          t.y[j] = v;
          t.penalized[j] = t.penalized[i];
          t.pred[j] = i;
        }
      }
    }
  }
  return t;
}

struct SubaddReport {
  std::vector<double> K_ladder;
  std::vector<std::size_t> n_ladder;
  std::size_t replicates = 0;
  // [K][n]: mean of Y/n over runs with good endpoints, its stderr, and the
  // unconditional mean over all runs
  std::vector<std::vector<double>> y_over_n, y_over_n_stderr, y_over_n_all;
  std::vector<std::size_t> good_endpoint_runs;  // per n
  std::vector<double> c_hat_per_K, c_hat_stderr_per_K;
  double c_hat = 0.0, c_hat_stderr = 0.0;
  std::vector<double> y_over_n_trace;          // Y^(Kmax)(0,n)/n per n, good endpoints
  std::vector<std::size_t> bad_step_count;     // |I| per run at (Kmax, nmax)
  std::vector<double> v_surrogate, v_surrogate_stderr;  // n^-2 E[X(0,n)^2 I(0,n)]
  bool v_trend_ok = true;
  bool check_ykx = true, check_ii_def = true, check_k_monotone = true;
  bool checks_ok() const noexcept { return check_ykx && check_ii_def && check_k_monotone; }
};

using ArrayGenerator = std::function<MissingValueArray(std::size_t replicate)>;

/// Runs the penalized process over generated arrays. Every exact check is
/// asserted on every run; a failure throws property_violation naming it.
inline SubaddReport verify_prop_sub(const ArrayGenerator& gen, std::vector<double> K_ladder,
                                    std::vector<std::size_t> n_ladder, std::size_t replicates, unsigned workers = 1) {
  if (K_ladder.empty() || n_ladder.empty()) throw invalid_argument("K and n ladders must be nonempty");
  for (std::size_t k = 0; k < K_ladder.size(); ++k)
    if (!(K_ladder[k] > 0.0) || (k > 0 && !(K_ladder[k] > K_ladder[k - 1])))
      throw invalid_argument("K ladder must be positive and increasing");
  for (std::size_t k = 0; k < n_ladder.size(); ++k)
    if (n_ladder[k] == 0 || (k > 0 && n_ladder[k] <= n_ladder[k - 1]))
      throw invalid_argument("n ladder must be positive and increasing");
  if (replicates < 2) throw invalid_argument("verify_prop_sub needs at least 2 replicates");
  const std::size_t nK = K_ladder.size(), nN = n_ladder.size(), nmax = n_ladder.back();

  struct Run {
    std::vector<std::vector<double>> y;  // [K][n] Y(0,n)
    std::vector<char> ends;              // [n] good endpoints
    std::vector<double> x2;              // [n] X(0,n)^2 on good endpoints else 0
    std::size_t bad_steps = 0;
  };
  auto runs = run_replicates(replicates, workers, [&](std::size_t rep) {
    const MissingValueArray arr = gen(rep);
    if (arr.n() < nmax) throw invalid_argument("generated array shorter than the n ladder");
    auto fail = [&](const std::string& what) {
      throw property_violation(what + " on replicate " + std::to_string(rep));
    };
    Run run;
    run.y.assign(nK, std::vector<double>(nN));
    std::optional<PenalizedTable> prev;
    for (std::size_t k = 0; k < nK; ++k) {
      PenalizedTable t = penalized_min(arr, K_ladder[k]);
      for (std::size_t j = 1; j <= nmax; ++j) {
        if (arr.good(0) && arr.good(j) && !(t.y[j] <= arr.value(0, j)))
          fail("(YKX) Y(0," + std::to_string(j) + ") > X(0," + std::to_string(j) + ") at K=" + io::real(K_ladder[k]));
        if (!(t.y[j] >= K_ladder[k] * static_cast<double>(t.penalized[j])))
          fail("(II-def) Y(0," + std::to_string(j) + ") < K|I| at K=" + io::real(K_ladder[k]));
        if (prev && !(prev->y[j] <= t.y[j]))
          fail("K-monotonicity Y(0," + std::to_string(j) + ") decreases from K=" + io::real(prev->K) + " to K=" +
               io::real(K_ladder[k]));
      }
      for (std::size_t q = 0; q < nN; ++q) run.y[k][q] = t.y[n_ladder[q]];
      if (k + 1 == nK) run.bad_steps = t.penalized[nmax];
      prev = std::move(t);
    }
    for (std::size_t q = 0; q < nN; ++q) {
      const bool e = arr.good(0) && arr.good(n_ladder[q]);
      run.ends.push_back(e);
      const double x = e ? arr.value(0, n_ladder[q]) : 0.0;
      run.x2.push_back(x * x);
    }
    return run;
  });

  SubaddReport rep;
  rep.K_ladder = K_ladder;
  rep.n_ladder = n_ladder;
  rep.replicates = replicates;
  rep.y_over_n.assign(nK, std::vector<double>(nN));
  rep.y_over_n_stderr = rep.y_over_n;
  rep.y_over_n_all = rep.y_over_n;
  rep.good_endpoint_runs.assign(nN, 0);
  for (std::size_t q = 0; q < nN; ++q)
    for (const Run& r : runs) rep.good_endpoint_runs[q] += r.ends[q];
  for (std::size_t k = 0; k < nK; ++k)
    for (std::size_t q = 0; q < nN; ++q) {
      std::vector<double> cond, all;
      for (const Run& r : runs) {
        const double v = r.y[k][q] / static_cast<double>(n_ladder[q]);
        all.push_back(v);
        if (r.ends[q]) cond.push_back(v);
      }
      const MeanSe c = mean_se(cond);
      rep.y_over_n[k][q] = cond.empty() ? NAN : c.mean;
      rep.y_over_n_stderr[k][q] = c.se;
      rep.y_over_n_all[k][q] = mean_se(all).mean;
    }
  for (std::size_t k = 0; k < nK; ++k) {
    rep.c_hat_per_K.push_back(rep.y_over_n[k][nN - 1]);
    rep.c_hat_stderr_per_K.push_back(rep.y_over_n_stderr[k][nN - 1]);
  }
  rep.c_hat = rep.c_hat_per_K.back();
  rep.c_hat_stderr = rep.c_hat_stderr_per_K.back();
  rep.y_over_n_trace = rep.y_over_n.back();
  for (const Run& r : runs) rep.bad_step_count.push_back(r.bad_steps);
  for (std::size_t q = 0; q < nN; ++q) {
    std::vector<double> v;
    const double n2 = static_cast<double>(n_ladder[q]) * static_cast<double>(n_ladder[q]);
    for (const Run& r : runs) v.push_back(r.x2[q] / n2);
    const MeanSe ms = mean_se(v);
    rep.v_surrogate.push_back(ms.mean);
    rep.v_surrogate_stderr.push_back(ms.se);
  }
  for (std::size_t a = 0; a < nN; ++a)
    for (std::size_t b = a + 1; b < nN; ++b)
      if (rep.v_surrogate[b] - rep.v_surrogate[a] >
          2.0 * std::hypot(rep.v_surrogate_stderr[a], rep.v_surrogate_stderr[b]))
        rep.v_trend_ok = false;
  return rep;
}

inline void write_subadd_csv(std::ostream& os, const SubaddReport& r) {
  os << "K,n,y_over_n,stderr,y_over_n_all,good_endpoint_runs,v_surrogate,v_stderr\n";
  for (std::size_t k = 0; k < r.K_ladder.size(); ++k)
    for (std::size_t q = 0; q < r.n_ladder.size(); ++q)
      os << io::real(r.K_ladder[k]) << ',' << r.n_ladder[q] << ',' << io::real(r.y_over_n[k][q]) << ','
         << io::real(r.y_over_n_stderr[k][q]) << ',' << io::real(r.y_over_n_all[k][q]) << ','
         << r.good_endpoint_runs[q] << ',' << io::real(r.v_surrogate[q]) << ',' << io::real(r.v_surrogate_stderr[q])
         << '\n';
}

// ---------------------------------------------------------------------------
// Square-root summation inequality: for 0 <= p(i,j) <= eta^(j-i-1),
//   n^-1 sum (j-i) sqrt(p) <= sum_{j>J} j eta^((j-1)/2) + J n^-1/2 sqrt(sum (j-i) p)
// with i = 0..n-2, j = i+2..n.

struct L2Sides {
  long double lhs = 0, rhs = 0, tail = 0, mass = 0;  // mass = sum (j-i) p
};

/// p(i, j) supplied by the caller; evaluated in long double.
inline L2Sides lemma_l2_sides(double eta, std::size_t n, std::size_t J,
                              const std::function<double(std::size_t, std::size_t)>& p) {
  L2Sides s;
  for (std::size_t i = 0; i + 2 <= n; ++i)
    for (std::size_t j = i + 2; j <= n; ++j) {
      const long double v = p(i, j);
      s.lhs += static_cast<long double>(j - i) * std::sqrt(v);
      s.mass += static_cast<long double>(j - i) * v;
    }
  s.lhs /= static_cast<long double>(n);
  const long double q = std::sqrt(static_cast<long double>(eta));
  s.tail = std::pow(q, static_cast<long double>(J)) * ((J + 1) - static_cast<long double>(J) * q) / ((1 - q) * (1 - q));
  s.rhs = s.tail + static_cast<long double>(J) * std::sqrt(s.mass / static_cast<long double>(n));
  return s;
}

struct L2Result {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_slack = -INFINITY;  // max of lhs - rhs; negative when every trial holds
  bool extremal_ok = false;
  bool extremal_exact = false;   // extremal case decided in rational arithmetic
  double extremal_slack = 0.0;
  bool pass() const noexcept { return violations == 0 && extremal_ok; }
};

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline std::optional<cpp_rational> rational_sqrt(const cpp_rational& x) {
  const cpp_int a = boost::multiprecision::numerator(x), b = boost::multiprecision::denominator(x);
  const cpp_int ra = boost::multiprecision::sqrt(a), rb = boost::multiprecision::sqrt(b);
  if (ra * ra != a || rb * rb != b) return std::nullopt;
  return cpp_rational(ra, rb);
}

// Extremal case p = eta^(j-i-1) decided exactly when sqrt(eta) is rational:
// compare squares instead of taking the outer square root.
inline std::optional<bool> lemma_l2_extremal_exact(double eta, std::size_t n, std::size_t J) {
  const cpp_rational e(eta);
  const auto q = rational_sqrt(e);
  if (!q) return std::nullopt;
  cpp_rational lhs = 0, mass = 0;
  for (std::size_t k = 2; k <= n; ++k) {
    const cpp_rational count = static_cast<long long>(n - k + 1);  // pairs with j - i = k
    cpp_rational qk = 1, ek = 1;
    for (std::size_t t = 0; t + 1 < k; ++t) {
      qk *= *q;
      ek *= e;
    }
    lhs += count * static_cast<long long>(k) * qk;
    mass += count * static_cast<long long>(k) * ek;
  }
  lhs /= static_cast<long long>(n);
  cpp_rational qJ = 1;
  for (std::size_t t = 0; t < J; ++t) qJ *= *q;
  const cpp_rational one = 1;
  const cpp_rational tail = qJ * (cpp_rational(static_cast<long long>(J + 1)) - cpp_rational(static_cast<long long>(J)) * *q) /
                            ((one - *q) * (one - *q));
  if (lhs <= tail) return true;
  const cpp_rational gap = lhs - tail;
  return gap * gap <= cpp_rational(static_cast<long long>(J * J)) * mass / static_cast<long long>(n);
}

}  // namespace detail

/// Random trials p(i,j) ~ Uniform(0, eta^(j-i-1)) plus the extremal case.
inline L2Result lemma_l2_check(double eta, std::size_t n, std::size_t J, std::size_t trials, std::uint64_t seed) {
  if (!(eta > 0.0 && eta < 1.0)) throw invalid_argument("eta must be in (0, 1)");
  if (n < 2) throw invalid_argument("lemma check needs n >= 2");
  if (J < 2) throw invalid_argument("lemma check needs J >= 2");
  L2Result res;
  Engine eng = make_engine(seed, stream::sampling, 21);
  std::vector<double> p((n + 1) * (n + 1));
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i + 2 <= n; ++i)
      for (std::size_t j = i + 2; j <= n; ++j)
        p[i * (n + 1) + j] = uniform01(eng) * std::pow(eta, static_cast<double>(j - i - 1));
    const L2Sides s = lemma_l2_sides(eta, n, J, [&](std::size_t i, std::size_t j) { return p[i * (n + 1) + j]; });
    ++res.trials;
    res.max_slack = std::max(res.max_slack, static_cast<double>(s.lhs - s.rhs));
    if (s.lhs > s.rhs) ++res.violations;
  }
  const L2Sides ext = lemma_l2_sides(eta, n, J, [&](std::size_t i, std::size_t j) {
    return std::pow(eta, static_cast<double>(j - i - 1));
  });
  res.extremal_slack = static_cast<double>(ext.lhs - ext.rhs);
  if (auto exact = detail::lemma_l2_extremal_exact(eta, n, J)) {
    res.extremal_exact = true;
    res.extremal_ok = *exact;
  } else {
    res.extremal_ok = ext.lhs <= ext.rhs;
  }
  return res;
}

}  // namespace shapeline
