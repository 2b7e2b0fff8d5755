#pragma once

// Declarative experiment specs, the task runner and its run summary.

#include <boost/uuid/detail/sha1.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "models.hpp"
#include "network.hpp"
#include "routes.hpp"
#include "shapestat.hpp"
#include "subadd.hpp"

namespace shapeline {

using json = nlohmann::ordered_json;

/// Raised for any spec problem found before computation starts.
class spec_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Expectations {
  std::optional<double> rho_min, rho_max;  // bounds on the angle-averaged rho_hat
  bool isotropy = false;                   // max |rho(theta) - mean| <= 3 stderr
  double pass_rate = 0.9;                  // as-shape
  std::optional<double> c_value;           // subadd: known constant
  double c_tolerance = 0.01;               // relative
  bool rho_cross = false;                  // subadd on a network: compare c/r0 with rho(theta)

  friend bool operator==(const Expectations&, const Expectations&) = default;
};

struct ExperimentSpec {
  std::string task = "sample";
  ModelSpec model;
  Window window{600, 600, Topology::torus};
  double intensity = 1.0;
  std::uint64_t seed = 1;
  std::size_t replicates = 24;
  std::vector<double> theta_grid = default_theta_grid(16);
  std::vector<double> r_ladder{25, 50, 100, 200};
  Estimator estimator = Estimator::slope;
  Region region_a = Region::square({0, 0}, 1.0);
  Region region_b = Region::square({0, 0}, 1.0);
  double theta = 0.0;
  std::size_t placements = 4;
  // subadd
  std::string array_source = "synthetic";  // synthetic | network
  std::vector<double> K_ladder{1, 2, 4, 8, 16, 32, 64};
  std::vector<std::size_t> n_ladder{100, 1000, 10000};
  double delta = 0.5;
  CostLaw step_law = CostLaw::exponential(1.0);
  double r0 = 10.0;
  // as-shape
  double epsilon = 0.15;
  std::vector<double> ell_list{100};
  std::vector<double> rho_hat;  // limit shape input; estimated when empty
  // lemma-l2
  std::vector<double> eta_list{0.3, 0.7};
  std::vector<std::size_t> lemma_n{10, 50};
  std::vector<std::size_t> lemma_J{2, 5};
  std::size_t trials = 125;
  // validate / route
  std::string network_file;
  std::size_t triples = 10000;
  Point from{}, to{};
  Expectations expect;
  std::string out;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;

  static const std::vector<std::string>& tasks() {
    static const std::vector<std::string> t{"sample", "build",    "route",  "rho",      "lsp",     "moments",
                                            "shape",  "as-shape", "subadd", "lemma-l2", "validate"};
    return t;
  }
};

namespace detail {

// Reads an object's keys once each and rejects anything left over.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw spec_error(where_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  template <class T>
  void read(const std::string& k, T& out) {
    if (!j_.contains(k)) return;
    seen_.insert(k);
    try {
      out = j_.at(k).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw spec_error(path(k) + ": wrong type");
    }
  }

  const json& sub(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  std::string path(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw spec_error("unknown key '" + path(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline json law_to_json(const CostLaw& l) {
  switch (l.kind) {
    case CostLaw::Kind::exponential: return json{{"law", "exponential"}, {"mean", l.a}};
    case CostLaw::Kind::uniform: return json{{"law", "uniform"}, {"lo", l.a}, {"hi", l.b}};
    case CostLaw::Kind::constant: return json{{"law", "constant"}, {"value", l.a}};
  }
  return {};
}

inline CostLaw law_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  std::string law = "exponential";
  f.read("law", law);
  CostLaw out;
  if (law == "exponential") {
    double mean = 1.0;
    f.read("mean", mean);
    out = CostLaw::exponential(mean);
  } else if (law == "uniform") {
    double lo = 0.5, hi = 1.5;
    f.read("lo", lo);
    f.read("hi", hi);
    out = CostLaw::uniform(lo, hi);
  } else if (law == "constant") {
    double v = 1.0;
    f.read("value", v);
    out = CostLaw::constant(v);
  } else {
    throw spec_error(f.path("law") + ": unknown law '" + law + "'");
  }
  f.finish();
  return out;
}

inline json region_to_json(const Region& r) {
  if (r.shape == Region::Shape::disc) return json{{"shape", "disc"}, {"radius", r.radius}};
  return json{{"shape", "rectangle"}, {"half_width", r.half_width}, {"half_height", r.half_height}};
}

inline Region region_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  std::string shape = "rectangle";
  f.read("shape", shape);
  Region out;
  try {
    if (shape == "rectangle") {
      double hw = 0.5, hh = 0.5;
      f.read("half_width", hw);
      f.read("half_height", hh);
      out = Region::rectangle({0, 0}, hw, hh);
    } else if (shape == "disc") {
      double r = 0.5;
      f.read("radius", r);
      out = Region::disc({0, 0}, r);
    } else {
      throw spec_error(f.path("shape") + ": unknown shape '" + shape + "'");
    }
  } catch (const spec_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw spec_error(where + ": " + e.what());
  }
  f.finish();
  return out;
}

inline json model_to_json(const ModelSpec& m) {
  json cost;
  switch (m.cost.kind) {
    case CostRule::Kind::euclidean: cost = json{{"kind", "euclidean"}}; break;
    case CostRule::Kind::iid: cost = json{{"kind", "iid"}, {"law", law_to_json(m.cost.law)}}; break;
    case CostRule::Kind::power: cost = json{{"kind", "power"}, {"alpha", m.cost.alpha}}; break;
  }
  json bands = json::array();
  for (const Band& b : m.bands) bands.push_back(json{{"start", b.start}, {"width", b.width}});
  return json{{"name", m.name},         {"spacing", m.spacing}, {"line_rate", m.line_rate},
              {"alpha", m.alpha},       {"cutoff", m.cutoff},   {"degenerate", m.degenerate},
              {"cost", std::move(cost)}, {"bands", std::move(bands)}};
}

inline ModelSpec model_from_json(const json& j) {
  ModelSpec m;
  if (j.is_string()) {
    m.name = j.get<std::string>();
    return m;
  }
  Fields f(j, "model");
  f.read("name", m.name);
  f.read("spacing", m.spacing);
  f.read("line_rate", m.line_rate);
  f.read("alpha", m.alpha);
  f.read("cutoff", m.cutoff);
  f.read("degenerate", m.degenerate);
  if (f.has("cost")) {
    Fields c(f.sub("cost"), "model.cost");
    std::string kind = "euclidean";
    c.read("kind", kind);
    if (kind == "euclidean") {
      m.cost = CostRule::euclidean();
    } else if (kind == "iid") {
      m.cost = CostRule::iid(c.has("law") ? law_from_json(c.sub("law"), "model.cost.law") : CostLaw::exponential(1.0), 0);
    } else if (kind == "power") {
      double a = 1.0;
      c.read("alpha", a);
      m.cost = CostRule::power(a);
    } else {
      throw spec_error("model.cost.kind: unknown cost rule '" + kind + "'");
    }
    c.finish();
  }
  if (f.has("bands")) {
    const json& b = f.sub("bands");
    if (!b.is_array()) throw spec_error("model.bands: expected a list");
    for (std::size_t k = 0; k < b.size(); ++k) {
      Fields bf(b[k], "model.bands[" + std::to_string(k) + "]");
      Band band;
      bf.read("start", band.start);
      bf.read("width", band.width);
      bf.finish();
      m.bands.push_back(band);
    }
  }
  f.finish();
  return m;
}

}  // namespace detail

inline json to_json(const ExperimentSpec& s) {
  json j;
  j["task"] = s.task;
  j["model"] = detail::model_to_json(s.model);
  j["window"] = json{{"width", s.window.width()}, {"height", s.window.height()},
                     {"topology", std::string(to_string(s.window.topology()))}};
  j["intensity"] = s.intensity;
  j["seed"] = s.seed;
  j["replicates"] = s.replicates;
  j["theta_grid"] = s.theta_grid;
  j["r_ladder"] = s.r_ladder;
  j["estimator"] = to_string(s.estimator);
  j["region_a"] = detail::region_to_json(s.region_a);
  j["region_b"] = detail::region_to_json(s.region_b);
  j["theta"] = s.theta;
  j["placements"] = s.placements;
  j["array_source"] = s.array_source;
  j["K_ladder"] = s.K_ladder;
  j["n_ladder"] = s.n_ladder;
  j["delta"] = s.delta;
  j["step_law"] = detail::law_to_json(s.step_law);
  j["r0"] = s.r0;
  j["epsilon"] = s.epsilon;
  j["ell_list"] = s.ell_list;
  j["rho_hat"] = s.rho_hat;
  j["eta_list"] = s.eta_list;
  j["lemma_n"] = s.lemma_n;
  j["lemma_J"] = s.lemma_J;
  j["trials"] = s.trials;
  j["network_file"] = s.network_file;
  j["triples"] = s.triples;
  j["from"] = {s.from.x, s.from.y};
  j["to"] = {s.to.x, s.to.y};
  json e;
  e["rho_min"] = s.expect.rho_min ? json(*s.expect.rho_min) : json(nullptr);
  e["rho_max"] = s.expect.rho_max ? json(*s.expect.rho_max) : json(nullptr);
  e["isotropy"] = s.expect.isotropy;
  e["pass_rate"] = s.expect.pass_rate;
  e["c_value"] = s.expect.c_value ? json(*s.expect.c_value) : json(nullptr);
  e["c_tolerance"] = s.expect.c_tolerance;
  e["rho_cross"] = s.expect.rho_cross;
  j["expect"] = std::move(e);
  j["out"] = s.out;
  return j;
}

/// Checks every field; throws spec_error naming the first problem.
inline void validate(const ExperimentSpec& s) {
  auto fail = [](const std::string& m) { throw spec_error(m); };
  const auto& tasks = ExperimentSpec::tasks();
  if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) fail("task: unknown task '" + s.task + "'");
  try {
    s.model.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("model: ") + e.what());
  }
  if (!(s.intensity >= 0.0) || !std::isfinite(s.intensity)) fail("intensity: must be finite and >= 0");
  const bool statistical = s.task == "rho" || s.task == "lsp" || s.task == "moments" || s.task == "shape" ||
                           s.task == "as-shape" || s.task == "subadd";
  if (s.task != "sample" && s.task != "lemma-l2" && s.task != "validate" && !(s.intensity > 0.0))
    fail("intensity: must be > 0 for task " + s.task);
  if (statistical && s.replicates < 2) fail("replicates: must be >= 2");
  try {
    detail::check_theta_grid(s.theta_grid);
    if (s.task == "rho" || s.task == "lsp" || s.task == "moments" || s.task == "shape" ||
        (s.task == "as-shape" && s.rho_hat.empty()))
      detail::check_ladder(s.r_ladder, Window(s.window.width(), s.window.height(), Topology::torus));
  } catch (const std::invalid_argument& e) {
    fail(std::string("theta_grid/r_ladder: ") + e.what());
  }
  if (s.estimator == Estimator::slope && s.r_ladder.size() < 2 &&
      (s.task == "rho" || s.task == "lsp" || s.task == "moments" || s.task == "shape"))
    fail("estimator: slope needs at least two radii; use terminal");
  if (s.placements == 0) fail("placements: must be >= 1");
  if (!(std::abs(s.theta) <= 2 * std::numbers::pi)) fail("theta: must be in [-2pi, 2pi]");
  if (s.array_source != "synthetic" && s.array_source != "network") fail("array_source: synthetic or network");
  for (std::size_t k = 0; k < s.K_ladder.size(); ++k)
    if (!(s.K_ladder[k] > 0.0) || (k > 0 && !(s.K_ladder[k] > s.K_ladder[k - 1])))
      fail("K_ladder: must be positive and increasing");
  for (std::size_t k = 0; k < s.n_ladder.size(); ++k)
    if (s.n_ladder[k] == 0 || (k > 0 && s.n_ladder[k] <= s.n_ladder[k - 1]))
      fail("n_ladder: must be positive and increasing");
  if (s.task == "subadd") {
    if (s.K_ladder.empty() || s.n_ladder.empty()) fail("K_ladder/n_ladder: must be nonempty");
    if (s.array_source == "synthetic") {
      if (!(s.delta > 0.0 && s.delta <= 1.0)) fail("delta: must be in (0, 1]");
      try {
        s.step_law.validate();
      } catch (const std::invalid_argument& e) {
        fail(std::string("step_law: ") + e.what());
      }
    } else {
      if (!(s.r0 > 0.0)) fail("r0: must be positive");
      if (!detail::regions_disjoint_along(s.region_a, s.r0, s.theta)) fail("r0: translates of region_a overlap");
      if (static_cast<double>(s.n_ladder.back()) * s.r0 > s.window.min_side() / 3.0)
        fail("n_ladder/r0: largest n * r0 exceeds window_side/3");
    }
  }
  if (s.task == "as-shape") {
    if (s.window.is_torus()) fail("window: as-shape needs a plane window");
    if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) fail("epsilon: must be in (0, 1)");
    if (s.ell_list.empty()) fail("ell_list: must be nonempty");
    for (double l : s.ell_list)
      if (!(l >= 0.0) || !std::isfinite(l)) fail("ell_list: entries must be >= 0");
    if (!s.rho_hat.empty() && s.rho_hat.size() != s.theta_grid.size())
      fail("rho_hat: needs one value per theta_grid angle");
    for (double r : s.rho_hat)
      if (!(r > 0.0) || !std::isfinite(r)) fail("rho_hat: values must be > 0");
  }
  if (s.task == "lemma-l2") {
    if (s.eta_list.empty() || s.lemma_n.empty() || s.lemma_J.empty()) fail("lemma: parameter lists must be nonempty");
    for (double e : s.eta_list)
      if (!(e > 0.0 && e < 1.0)) fail("eta_list: entries must be in (0, 1)");
    for (std::size_t n : s.lemma_n)
      if (n < 2) fail("lemma_n: entries must be >= 2");
    for (std::size_t J : s.lemma_J)
      if (J < 2) fail("lemma_J: entries must be >= 2");
  }
  if (s.task == "validate" && s.triples == 0) fail("triples: must be >= 1");
  if (s.task == "route" && (!s.window.contains(s.from) || !s.window.contains(s.to)))
    fail("from/to: must lie in the window");
  if (s.expect.rho_min && s.expect.rho_max && *s.expect.rho_min > *s.expect.rho_max)
    fail("expect: rho_min > rho_max");
  if (!(s.expect.pass_rate >= 0.0 && s.expect.pass_rate <= 1.0)) fail("expect.pass_rate: must be in [0, 1]");
  if (!(s.expect.c_tolerance > 0.0)) fail("expect.c_tolerance: must be > 0");
}

/// Parses and validates a spec document; missing keys take defaults.
inline ExperimentSpec parse_spec(const json& j) {
  ExperimentSpec s;
  detail::Fields f(j, "");
  f.read("task", s.task);
  if (f.has("model")) s.model = detail::model_from_json(f.sub("model"));
  if (f.has("window")) {
    detail::Fields w(f.sub("window"), "window");
    double width = s.window.width(), height = s.window.height();
    std::string topo(to_string(s.window.topology()));
    w.read("width", width);
    w.read("height", height);
    w.read("topology", topo);
    w.finish();
    try {
      s.window = Window(width, height, topology_from_string(topo));
    } catch (const std::invalid_argument& e) {
      throw spec_error(std::string("window: ") + e.what());
    }
  }
  f.read("intensity", s.intensity);
  f.read("seed", s.seed);
  f.read("replicates", s.replicates);
  if (f.has("angles") && f.has("theta_grid")) throw spec_error("give either angles or theta_grid, not both");
  if (f.has("angles")) {
    std::size_t k = 0;
    f.read("angles", k);
    if (k == 0) throw spec_error("angles: must be >= 1");
    s.theta_grid = default_theta_grid(k);
  }
  f.read("theta_grid", s.theta_grid);
  f.read("r_ladder", s.r_ladder);
  if (f.has("estimator")) {
    std::string e;
    f.read("estimator", e);
    try {
      s.estimator = estimator_from_string(e);
    } catch (const std::invalid_argument& ex) {
      throw spec_error(std::string("estimator: ") + ex.what());
    }
  }
  if (f.has("region_a")) s.region_a = detail::region_from_json(f.sub("region_a"), "region_a");
  if (f.has("region_b")) s.region_b = detail::region_from_json(f.sub("region_b"), "region_b");
  f.read("theta", s.theta);
  f.read("placements", s.placements);
  f.read("array_source", s.array_source);
  f.read("K_ladder", s.K_ladder);
  f.read("n_ladder", s.n_ladder);
  f.read("delta", s.delta);
  if (f.has("step_law")) s.step_law = detail::law_from_json(f.sub("step_law"), "step_law");
  f.read("r0", s.r0);
  f.read("epsilon", s.epsilon);
  f.read("ell_list", s.ell_list);
  f.read("rho_hat", s.rho_hat);
  f.read("eta_list", s.eta_list);
  f.read("lemma_n", s.lemma_n);
  f.read("lemma_J", s.lemma_J);
  f.read("trials", s.trials);
  f.read("network_file", s.network_file);
  f.read("triples", s.triples);
  for (auto [key, pt] : {std::pair{"from", &s.from}, std::pair{"to", &s.to}}) {
    if (!f.has(key)) continue;
    std::vector<double> xy;
    f.read(key, xy);
    if (xy.size() != 2) throw spec_error(std::string(key) + ": expected [x, y]");
    *pt = {xy[0], xy[1]};
  }
  if (f.has("expect")) {
    detail::Fields e(f.sub("expect"), "expect");
    auto opt = [&](const char* k, std::optional<double>& out) {
      if (!e.has(k)) return;
      const json& v = e.sub(k);
      if (v.is_null()) {
        out.reset();
      } else if (v.is_number()) {
        out = v.get<double>();
      } else {
        throw spec_error(e.path(k) + ": wrong type");
      }
    };
    opt("rho_min", s.expect.rho_min);
    opt("rho_max", s.expect.rho_max);
    e.read("isotropy", s.expect.isotropy);
    e.read("pass_rate", s.expect.pass_rate);
    opt("c_value", s.expect.c_value);
    e.read("c_tolerance", s.expect.c_tolerance);
    e.read("rho_cross", s.expect.rho_cross);
    e.finish();
  }
  f.read("out", s.out);
  f.finish();
  validate(s);
  return s;
}

inline ExperimentSpec parse_spec_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw spec_error(std::string("spec is not valid JSON: ") + e.what());
  }
  return parse_spec(j);
}

/// SHA-1 of "blob <len>\0" + body, as git hash-object computes it.
inline std::string git_blob_sha1(const std::string& body) {
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  boost::uuids::detail::sha1 h;
  h.process_bytes(blob.data(), blob.size());
  unsigned int d[5];
  h.get_digest(d);
  char hex[41];
  for (int i = 0; i < 5; ++i) std::snprintf(hex + 8 * i, 9, "%08x", d[i]);
  return hex;
}

/// Hash of the canonical spec, output directory excluded.
inline std::string input_hash(const ExperimentSpec& s) {
  json j = to_json(s);
  j.erase("out");
  return git_blob_sha1(j.dump());
}

struct RunSummary {
  json spec;
  std::string input_hash;
  std::string model_tag;
  json verdicts = json::object();  // name -> "PASS" | "FAIL"
  json results = json::object();
  std::vector<std::string> artifacts;
  std::string status = "pass";  // pass | fail | error
  std::string error;
  double wall_clock_seconds = 0.0;

  void verdict(const std::string& name, bool ok) {
    verdicts[name] = ok ? "PASS" : "FAIL";
    if (!ok && status == "pass") status = "fail";
  }

  int exit_code() const { return status == "pass" ? 0 : status == "fail" ? 1 : 3; }

  /// Deterministic part; the wall clock lives in timing.json.
  json to_json() const {
    json j;
    j["status"] = status;
    if (!error.empty()) {
      j["error"] = error;
      j["partial"] = true;
    }
    j["input_hash"] = input_hash;
    j["model_tag"] = model_tag;
    j["verdicts"] = verdicts;
    j["results"] = results;
    j["artifacts"] = artifacts;
    j["spec"] = spec;
    return j;
  }
};

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, RunSummary& sum) : dir_(std::move(dir)), sum_(sum) {
    std::filesystem::create_directories(dir_);
  }

  template <class F>
  void write(const std::string& name, F&& f) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f(os);
    if (!os) throw std::runtime_error("write failed for " + (dir_ / name).string());
    sum_.artifacts.push_back(name);
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  RunSummary& sum_;
};

inline json estimate_json(const ShapeEstimate& e) {
  return json{{"estimator", to_string(e.estimator)},
              {"replicates", e.replicates},
              {"theta_average", e.theta_average},
              {"theta_average_stderr", e.theta_average_stderr},
              {"theta_grid", e.theta_grid},
              {"rho_hat", e.rho_hat},
              {"std_error", e.std_error}};
}

inline json diag_json(const ShapeDiagnostics& d) {
  return json{{"r_ladder", d.r_ladder},   {"s_ratio", d.s_ratio},       {"s_stderr", d.s_stderr},
              {"l2_ratio", d.l2_ratio},   {"l2_stderr", d.l2_stderr},   {"lub_ratio", d.lub_ratio},
              {"lub_stderr", d.lub_stderr}, {"kappa_hat", d.kappa_hat}, {"detail", d.detail}};
}

inline double max_isotropy_excess(const ShapeEstimate& e) {
  double mean = 0;
  for (double r : e.rho_hat) mean += r;
  mean /= static_cast<double>(e.rho_hat.size());
  double worst = -INFINITY;
  for (std::size_t j = 0; j < e.rho_hat.size(); ++j)
    worst = std::max(worst, std::abs(e.rho_hat[j] - mean) - 3.0 * e.std_error[j]);
  return worst;
}

inline RhoOptions rho_options(const ExperimentSpec& s, unsigned workers, std::uint64_t seed) {
  RhoOptions o;
  o.theta_grid = s.theta_grid;
  o.r_ladder = s.r_ladder;
  o.replicates = s.replicates;
  o.seed = seed;
  o.estimator = s.estimator;
  o.workers = workers;
  return o;
}

inline std::shared_ptr<const PointSet> first_points(const ExperimentSpec& s) {
  return replicate_points(s.window, s.intensity, s.seed, 0);
}

// rho for diagnostics: from the spec if given, else estimated on
// realizations independent of the ones being diagnosed
inline ShapeEstimate diagnostic_rho(const ExperimentSpec& s, unsigned workers, RunSummary& sum, ArtifactWriter& out) {
  ShapeEstimate rho;
  if (!s.rho_hat.empty()) {
    rho.theta_grid = s.theta_grid;
    rho.rho_hat = s.rho_hat;
    rho.std_error.assign(s.rho_hat.size(), 0.0);
    return rho;
  }
  Window w = s.window;
  if (!w.is_torus()) w = Window(w.width(), w.height(), Topology::torus);
  rho = estimate_rho(s.model, w, s.intensity, rho_options(s, workers, derive_seed(s.seed, stream::estimate, 0)));
  out.write("rho.csv", [&](std::ostream& os) { write_rho_csv(os, rho); });
  sum.results["rho"] = estimate_json(rho);
  return rho;
}

inline void run_task(const ExperimentSpec& s, unsigned workers, RunSummary& sum, ArtifactWriter& out) {
  const std::string& t = s.task;
  if (t == "sample") {
    const auto ps = first_points(s);
    out.write("points.txt", [&](std::ostream& os) { io::write_points(os, *ps); });
    sum.results["points"] = ps->size();
    sum.verdict("sample", true);
  } else if (t == "build") {
    const auto ps = first_points(s);
    const SpatialNetwork net = build_network(s.model, ps, s.intensity, replicate_model_seed(s.seed, 0));
    out.write("points.txt", [&](std::ostream& os) { io::write_points(os, *ps); });
    out.write("net.txt", [&](std::ostream& os) { io::write_network(os, net); });
    sum.results["vertices"] = net.vertex_count();
    sum.results["edges"] = net.edges().size();
    sum.verdict("build", true);
  } else if (t == "route") {
    const auto ps = first_points(s);
    const Realization real = realize(s.model, ps, s.intensity, replicate_model_seed(s.seed, 0));
    const double d = d_nearest(real, s.from, s.to);
    sum.results["route_length"] = d;
    sum.results["euclidean"] = pair_distance(s.window, ps->operator[](nearest_point(*ps, s.from)),
                                             ps->operator[](nearest_point(*ps, s.to)));
    sum.verdict("route", std::isfinite(d));
  } else if (t == "rho" || t == "shape") {
    const ShapeEstimate est = estimate_rho(s.model, s.window, s.intensity, rho_options(s, workers, s.seed));
    out.write("rho.csv", [&](std::ostream& os) { write_rho_csv(os, est); });
    sum.results["rho"] = estimate_json(est);
    if (s.expect.rho_min) sum.verdict("rho_min", est.theta_average >= *s.expect.rho_min);
    if (s.expect.rho_max) sum.verdict("rho_max", est.theta_average <= *s.expect.rho_max);
    if (s.expect.isotropy) {
      const double ex = max_isotropy_excess(est);
      sum.results["isotropy_excess"] = ex;
      sum.verdict("isotropy", ex <= 0.0);
    }
    if (s.model.dominates_euclid()) {
      bool floor_ok = true;
      for (std::size_t i = 0; i < est.r_ladder.size(); ++i)
        for (std::size_t j = 0; j < est.theta_grid.size(); ++j)
          floor_ok &= est.per_r_means[i][j] >= 1.0 - 3.0 * est.per_r_stderr[i][j];
      sum.verdict("euclid_floor", floor_ok);
    }
    if (t == "shape") {
      if (est.theta_grid.size() >= 2) sum.results["lipschitz_ratio"] = lipschitz_ratio(est);
      const LimitShape B = limit_shape(est);
      out.write("shape.csv", [&](std::ostream& os) { write_shape_csv(os, B); });
      sum.results["convexity_defect"] = B.convexity_defect;
      sum.results["defect_stderr"] = B.defect_stderr;
      sum.verdict("convexity", B.convexity_defect <= 3.0 * B.defect_stderr + 1e-12);
    }
  } else if (t == "lsp" || t == "moments") {
    const ShapeEstimate rho = diagnostic_rho(s, workers, sum, out);
    DiagOptions o;
    o.r_ladder = s.r_ladder;
    o.replicates = s.replicates;
    o.seed = s.seed;
    o.placements = s.placements;
    o.workers = workers;
    ShapeDiagnostics d = shape_diagnostics(s.model, s.window, s.intensity, s.region_a, s.region_b, rho, o);
    if (t == "lsp") judge_lsp(d);
    else judge_moments(d);
    out.write("diag.csv", [&](std::ostream& os) { write_diag_csv(os, d); });
    sum.results["diagnostics"] = diag_json(d);
    sum.verdict(t, d.pass);
  } else if (t == "as-shape") {
    const ShapeEstimate rho = diagnostic_rho(s, workers, sum, out);
    const LimitShape B = limit_shape(rho.theta_grid, rho.rho_hat, rho.std_error);
    out.write("shape.csv", [&](std::ostream& os) { write_shape_csv(os, B); });
    const Point origin = s.window.center();
    auto passes = run_replicates(s.replicates, workers, [&](std::size_t rep) {
      const auto ps = replicate_points(s.window, s.intensity, s.seed, rep, {origin});
      const Realization real = realize(s.model, ps, s.intensity, replicate_model_seed(s.seed, rep));
      const auto res = as_shape_check(real, B, s.ell_list, s.epsilon);
      int ok = 1;
      for (const auto& r : res) ok &= r.pass();
      return ok;
    });
    std::size_t good = 0;
    for (int p : passes) good += static_cast<std::size_t>(p);
    const double rate = static_cast<double>(good) / static_cast<double>(passes.size());
    sum.results["pass_rate"] = rate;
    sum.results["replicates_passing"] = good;
    sum.verdict("as_shape", rate >= s.expect.pass_rate);
  } else if (t == "subadd") {
    ArrayGenerator gen;
    const std::size_t nmax = s.n_ladder.back();
    if (s.array_source == "synthetic") {
      gen = [&](std::size_t rep) {
        return synthetic_array(nmax, s.delta, s.step_law, derive_seed(s.seed, stream::synthetic, rep));
      };
    } else {
      gen = [&](std::size_t rep) {
        const auto ps = replicate_points(s.window, s.intensity, s.seed, rep);
        const Realization real = realize(s.model, ps, s.intensity, replicate_model_seed(s.seed, rep));
        return extract_array(real, s.region_a, s.theta, s.r0, nmax, derive_seed(s.seed, stream::cells, rep));
      };
    }
    const SubaddReport r = verify_prop_sub(gen, s.K_ladder, s.n_ladder, s.replicates, workers);
    out.write("subadd.csv", [&](std::ostream& os) { write_subadd_csv(os, r); });
    sum.results["c_hat"] = r.c_hat;
    sum.results["c_hat_stderr"] = r.c_hat_stderr;
    sum.results["c_hat_per_K"] = r.c_hat_per_K;
    sum.results["good_endpoint_runs"] = r.good_endpoint_runs;
    sum.results["v_surrogate"] = r.v_surrogate;
    sum.verdict("checks", r.checks_ok());
    sum.verdict("v_trend", r.v_trend_ok);
    if (s.expect.c_value)
      sum.verdict("c_recovery", std::abs(r.c_hat - *s.expect.c_value) <= s.expect.c_tolerance * *s.expect.c_value);
    if (s.expect.rho_cross && s.array_source == "network") {
      RhoOptions o = rho_options(s, workers, derive_seed(s.seed, stream::estimate, 1));
      o.theta_grid = {std::fmod(s.theta + 2 * std::numbers::pi, 2 * std::numbers::pi)};
      o.r_ladder = {static_cast<double>(nmax) * s.r0};
      o.estimator = Estimator::terminal;
      const ShapeEstimate est = estimate_rho(s.model, s.window, s.intensity, o);
      const double c = r.c_hat / s.r0, cse = r.c_hat_stderr / s.r0;
      sum.results["c_over_r0"] = c;
      sum.results["rho_at_theta"] = est.rho_hat[0];
      sum.results["rho_at_theta_stderr"] = est.std_error[0];
      sum.verdict("rho_cross", std::abs(c - est.rho_hat[0]) <= 2.0 * std::hypot(cse, est.std_error[0]));
    }
  } else if (t == "lemma-l2") {
    json rows = json::array();
    bool ok = true;
    std::size_t idx = 0;
    for (double eta : s.eta_list)
      for (std::size_t n : s.lemma_n)
        for (std::size_t J : s.lemma_J) {
          const L2Result r = lemma_l2_check(eta, n, J, s.trials, derive_seed(s.seed, stream::sampling, idx++));
          rows.push_back(json{{"eta", eta},
                              {"n", n},
                              {"J", J},
                              {"trials", r.trials},
                              {"violations", r.violations},
                              {"max_slack", r.max_slack},
                              {"extremal_ok", r.extremal_ok},
                              {"extremal_exact", r.extremal_exact}});
          ok &= r.pass();
        }
    sum.results["lemma"] = rows;
    sum.verdict("lemma_l2", ok);
  } else if (t == "validate") {
    std::optional<RouteEngine> eng;
    if (!s.network_file.empty()) {
      std::ifstream is(s.network_file);
      if (!is) throw std::runtime_error("cannot read network file " + s.network_file);
      eng.emplace(io::read_network(is));
    } else {
      eng.emplace(build_network(s.model, first_points(s), s.intensity, replicate_model_seed(s.seed, 0)));
    }
    sum.model_tag = eng->network().model_tag();
    const MetricReport tri = check_triangle(*eng, s.triples, s.seed);
    const MetricReport lb = check_euclid_lb(*eng, s.triples, s.seed);
    sum.results["triangle"] = json{{"samples", tri.samples_checked},
                                   {"violations", tri.violations.size()},
                                   {"max_violation", tri.max_violation}};
    sum.results["euclid_lb"] = json{{"samples", lb.samples_checked},
                                    {"violations", lb.violations.size()},
                                    {"max_violation", lb.max_violation}};
    sum.verdict("triangle", tri.ok());
  }
}

}  // namespace detail

/// Runs a validated spec, writing artifacts and summary.json into out_dir.
/// Module errors are caught and reported as status "error" with the
/// artifacts written so far.
inline RunSummary run(const ExperimentSpec& spec, const std::filesystem::path& out_dir, unsigned workers = 1) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary sum;
  sum.spec = to_json(spec);
  sum.input_hash = input_hash(spec);
  sum.model_tag = spec.model.tag();
  detail::ArtifactWriter out(out_dir, sum);
  try {
    detail::run_task(spec, workers, sum, out);
  } catch (const std::exception& e) {
    sum.status = "error";
    sum.error = e.what();
  }
  if (sum.verdicts.empty() && sum.status == "pass") sum.status = "error";
  sum.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream os(out.dir() / "summary.json", std::ios::binary);
    os << sum.to_json().dump(2) << '\n';
  }
  {
    std::ofstream os(out.dir() / "timing.json", std::ios::binary);
    os << json{{"wall_clock_seconds", sum.wall_clock_seconds}}.dump(2) << '\n';
  }
  return sum;
}

}  // namespace shapeline
