#pragma once

// Model descriptions, one realization per replicate, and the replicate runner.

#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "network.hpp"
#include "pointset.hpp"
#include "random.hpp"
#include "routes.hpp"

namespace shapeline {

struct ModelSpec {
  // rng | gabriel | delaunay | lattice | lattice-random | power | euclidean-complete
  std::string name = "rng";
  double spacing = 1.0;    // lattice line spacing
  double line_rate = 1.0;  // lattice-random: lines per unit length
  double alpha = 1.5;      // power exponent
  double cutoff = 0.0;     // power sparsification radius, 0 = 4/sqrt(intensity)
  bool degenerate = false;  // permits alpha = 1
  CostRule cost;
  std::vector<Band> bands;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"rng",     "gabriel", "delaunay", "lattice", "lattice-random",
                                            "power",   "euclidean-complete"};
    return n;
  }

  void validate() const {
    bool known = false;
    for (const auto& n : names()) known |= (n == name);
    if (!known) throw invalid_argument("unknown model '" + name + "'");
    if (name == "lattice" && !(spacing > 0.0 && std::isfinite(spacing)))
      throw invalid_argument("lattice spacing must be positive");
    if (name == "lattice-random" && !(line_rate > 0.0 && std::isfinite(line_rate)))
      throw invalid_argument("lattice line_rate must be positive");
    if (name == "power") {
      if (!std::isfinite(alpha) || alpha < 1.0) throw invalid_argument("power model needs alpha > 1");
      if (alpha == 1.0 && !degenerate) throw invalid_argument("power model alpha = 1 requires degenerate = true");
      if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw invalid_argument("power cutoff must be >= 0");
    }
    if (cost.kind == CostRule::Kind::iid) cost.law.validate();
    if (cost.kind == CostRule::Kind::power && !(cost.alpha >= 1.0 && std::isfinite(cost.alpha)))
      throw invalid_argument("cost power alpha must be >= 1");
    if (cost.kind != CostRule::Kind::euclidean && exact_euclidean())
      throw invalid_argument("cost rules need an explicit network, not the complete euclidean metric");
    validate_bands(bands);
  }

  /// Route-lengths equal Euclidean distance; evaluated in closed form.
  bool exact_euclidean() const {
    return name == "euclidean-complete" || (name == "power" && alpha == 1.0);
  }

  /// Route-lengths dominate Euclidean distance.
  bool dominates_euclid() const {
    if (cost.kind != CostRule::Kind::euclidean) return false;
    return name != "power" || alpha == 1.0;
  }

  std::string tag() const {
    std::string t = name;
    if (name == "lattice") t += ":s=" + detail::fmt_param(spacing);
    if (name == "lattice-random") t += ":rate=" + detail::fmt_param(line_rate);
    if (name == "power") t += ":alpha=" + detail::fmt_param(alpha);
    if (cost.kind == CostRule::Kind::iid) t += "+iid:" + cost.law.describe();
    if (cost.kind == CostRule::Kind::power) t += "+pow:" + detail::fmt_param(cost.alpha);
    if (!bands.empty()) t += "+bands:" + std::to_string(bands.size());
    return t;
  }
};

/// One replicate's metric: either a routed network or the exact Euclidean
/// metric on the points (the complete graph with unit-exponent costs).
class Realization {
 public:
  Realization(std::shared_ptr<const PointSet> ps, std::optional<RouteEngine> routes)
      : points_(std::move(ps)), routes_(std::move(routes)) {}

  const PointSet& points() const noexcept { return *points_; }
  std::shared_ptr<const PointSet> points_ptr() const noexcept { return points_; }
  bool exact_euclidean() const noexcept { return !routes_.has_value(); }
  const RouteEngine& routes() const {
    if (!routes_) throw std::logic_error("exact euclidean realization has no network");
    return *routes_;
  }
  std::size_t vertex_count() const { return routes_ ? routes_->vertex_count() : points_->size(); }

  double route_length(std::size_t u, std::size_t v) const {
    if (routes_) return routes_->route_length(u, v);
    check(u);
    check(v);
    return pair_distance(points_->window(), (*points_)[u], (*points_)[v]);
  }

  std::vector<double> route_lengths_from(std::size_t u, const std::vector<std::size_t>& targets) const {
    if (routes_) return routes_->route_lengths_from(u, targets);
    std::vector<double> out;
    for (std::size_t t : targets) out.push_back(route_length(u, t));
    return out;
  }

  std::vector<double> distances_from(std::size_t u) const {
    if (routes_) return routes_->distances_from(u);
    check(u);
    std::vector<double> out(points_->size());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = pair_distance(points_->window(), (*points_)[u], (*points_)[v]);
    return out;
  }

  std::vector<std::size_t> ball(std::size_t u, double limit) const {
    if (routes_) return routes_->ball(u, limit);
    if (!std::isfinite(limit)) throw invalid_argument("ball radius must be finite");
    std::vector<std::size_t> out;
    const auto d = distances_from(u);
    for (std::size_t v = 0; v < d.size(); ++v)
      if (d[v] <= limit) out.push_back(v);
    return out;
  }

 private:
  void check(std::size_t v) const {
    if (v >= points_->size()) throw invalid_argument("vertex index out of range");
  }

  std::shared_ptr<const PointSet> points_;
  std::optional<RouteEngine> routes_;
};

/// Builds the model's network over ps; model_seed drives every random choice
/// made by the model itself (line positions, lattice offset, i.i.d. costs).
inline SpatialNetwork build_network(const ModelSpec& m, std::shared_ptr<const PointSet> ps, double intensity,
                                    std::uint64_t model_seed) {
  m.validate();
  if (m.exact_euclidean()) throw invalid_argument("model '" + m.name + "' has no sparse network");
  const Window& w = ps->window();
  Engine eng = make_engine(model_seed, stream::model, 0);
  SpatialNetwork net;
  if (m.name == "rng") {
    net = build_rng(ps);
  } else if (m.name == "gabriel") {
    net = build_gabriel(ps);
  } else if (m.name == "delaunay") {
    net = build_delaunay(ps);
  } else if (m.name == "lattice") {
    const double ox = uniform(eng, 0.0, std::min(m.spacing, w.width()));
    const double oy = uniform(eng, 0.0, std::min(m.spacing, w.height()));
    net = build_lattice_net(ps, regular_lines(w.width(), m.spacing, ox), regular_lines(w.height(), m.spacing, oy),
                            "lattice:s=" + detail::fmt_param(m.spacing));
  } else if (m.name == "lattice-random") {
    auto xs = poisson_lines(w.width(), m.line_rate, eng);
    auto ys = poisson_lines(w.height(), m.line_rate, eng);
    if (xs.empty() || ys.empty()) throw empty_domain_error("random lattice drew no lines in one direction");
    net = build_lattice_net(ps, xs, ys, "lattice-random:rate=" + detail::fmt_param(m.line_rate));
  } else if (m.name == "power") {
    const double cutoff = m.cutoff > 0.0 ? m.cutoff : 4.0 / std::sqrt(intensity);
    auto pn = build_power_complete(ps, m.alpha, cutoff, 64, model_seed);
    if (!pn.certificate.passed())
      throw property_violation("power cutoff " + detail::fmt_param(cutoff) + " failed its certificate on " +
                               std::to_string(pn.certificate.failures) + " sampled pairs");
    net = std::move(pn.network);
  }
  if (m.cost.kind != CostRule::Kind::euclidean) {
    CostRule rule = m.cost;
    rule.seed = derive_seed(model_seed, stream::model, 1);
    net = apply_cost_rule(net, rule);
  }
  if (!m.bands.empty()) net = add_counterexample_links(net, m.bands);
  return net;
}

inline Realization realize(const ModelSpec& m, std::shared_ptr<const PointSet> ps, double intensity,
                           std::uint64_t model_seed) {
  m.validate();
  if (m.exact_euclidean()) return Realization(std::move(ps), std::nullopt);
  auto net = build_network(m, ps, intensity, model_seed);
  return Realization(std::move(ps), RouteEngine(std::move(net)));
}

/// Point set of replicate `rep` under run seed `seed`; identical across
/// models so different networks can be compared on the same points.
inline std::shared_ptr<const PointSet> replicate_points(const Window& w, double intensity, std::uint64_t seed,
                                                        std::size_t rep, const std::vector<Point>& planted = {}) {
  PointSet ps = sample_poisson(w, intensity, derive_seed(seed, stream::points, rep));
  if (!planted.empty()) ps = plant_points(ps, planted);
  return std::make_shared<const PointSet>(std::move(ps));
}

inline std::uint64_t replicate_model_seed(std::uint64_t seed, std::size_t rep) {
  return derive_seed(seed, stream::model, rep);
}

/// Runs f(rep) for rep = 0..count-1 on up to `workers` threads. Results are
/// stored by replicate id, so the output never depends on the worker count.
/// The exception of the lowest failing replicate is rethrown.
template <class F>
auto run_replicates(std::size_t count, unsigned workers, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace shapeline
