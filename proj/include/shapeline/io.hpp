#pragma once

// Text formats for point sets and networks. Reals are written with 17
// significant digits so reading back reproduces every double exactly.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "network.hpp"
#include "pointset.hpp"

namespace shapeline::io {

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::size_t parse_index(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') throw invalid_argument("not an index: '" + s + "'");
  return static_cast<std::size_t>(v);
}

/// `# shapeline points v1 <width> <height> <plane|torus>`, one `x y` line
/// per point, then `# planted: i1 i2 ...`.
inline void write_points(std::ostream& os, const PointSet& ps) {
  const Window& w = ps.window();
  os << "# shapeline points v1 " << real(w.width()) << ' ' << real(w.height()) << ' ' << to_string(w.topology())
     << '\n';
  for (const Point& p : ps.points()) os << real(p.x) << ' ' << real(p.y) << '\n';
  os << "# planted:";
  for (std::size_t i : ps.planted()) os << ' ' << i;
  os << '\n';
}

inline PointSet read_points(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw invalid_argument("points file: missing header");
  std::istringstream hs(line);
  std::string hash, magic, kind, version, ws, hs_, topo;
  hs >> hash >> magic >> kind >> version >> ws >> hs_ >> topo;
  if (hash != "#" || magic != "shapeline" || kind != "points" || version != "v1")
    throw invalid_argument("points file: bad header '" + line + "'");
  const Window w(parse_real(ws), parse_real(hs_), topology_from_string(topo));
  std::vector<Point> pts;
  std::vector<std::size_t> planted;
  bool seen_planted = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# planted:", 0) == 0) {
      std::istringstream ps(line.substr(10));
      std::string tok;
      while (ps >> tok) planted.push_back(parse_index(tok));
      seen_planted = true;
      continue;
    }
    if (seen_planted) throw invalid_argument("points file: data after planted line");
    std::istringstream ls(line);
    std::string xs, ys, extra;
    if (!(ls >> xs >> ys) || (ls >> extra)) throw invalid_argument("points file: bad point line '" + line + "'");
    pts.push_back({parse_real(xs), parse_real(ys)});
  }
  return PointSet(w, std::move(pts), std::move(planted), 0);
}

/// `# shapeline net v1 <model_tag> window=<w>x<h> <plane|torus>`, vertex
/// lines `v <index> <x> <y> <kind>`, edge lines `e <u> <v> <length>`.
inline void write_network(std::ostream& os, const SpatialNetwork& net) {
  const Window& w = net.window();
  os << "# shapeline net v1 " << net.model_tag() << " window=" << real(w.width()) << 'x' << real(w.height()) << ' '
     << to_string(w.topology()) << '\n';
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const Point p = net.position(v);
    os << "v " << v << ' ' << real(p.x) << ' ' << real(p.y) << ' ' << to_string(net.kind(v)) << '\n';
  }
  for (const NetEdge& e : net.edges()) os << "e " << e.u << ' ' << e.v << ' ' << real(e.length) << '\n';
}

inline SpatialNetwork read_network(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw invalid_argument("network file: missing header");
  std::istringstream hs(line);
  std::string hash, magic, kind, version, tag, win, topo;
  hs >> hash >> magic >> kind >> version >> tag;
  if (hash != "#" || magic != "shapeline" || kind != "net" || version != "v1" || tag.empty())
    throw invalid_argument("network file: bad header '" + line + "'");

  struct RawVertex {
    Point p;
    VertexKind kind;
  };
  std::vector<RawVertex> verts;
  std::vector<NetEdge> edges;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string rec, a, b, c, d, extra;
    ls >> rec;
    if (rec == "v") {
      if (!(ls >> a >> b >> c >> d) || (ls >> extra)) throw invalid_argument("network file: bad vertex line");
      if (parse_index(a) != verts.size()) throw invalid_argument("network file: vertex indices must be dense 0..n-1");
      VertexKind k;
      if (d == "poisson") k = VertexKind::poisson;
      else if (d == "grid") k = VertexKind::grid;
      else if (d == "planted") k = VertexKind::planted;
      else throw invalid_argument("network file: unknown vertex kind '" + d + "'");
      verts.push_back({{parse_real(b), parse_real(c)}, k});
    } else if (rec == "e") {
      if (!(ls >> a >> b >> c) || (ls >> extra)) throw invalid_argument("network file: bad edge line");
      edges.push_back({parse_index(a), parse_index(b), parse_real(c)});
    } else {
      throw invalid_argument("network file: unknown record '" + rec + "'");
    }
  }

  Window w;
  if (hs >> win >> topo) {
    if (win.rfind("window=", 0) != 0) throw invalid_argument("network file: bad window token");
    const std::string dims = win.substr(7);
    const auto x = dims.find('x');
    if (x == std::string::npos) throw invalid_argument("network file: bad window token");
    w = Window(parse_real(dims.substr(0, x)), parse_real(dims.substr(x + 1)), topology_from_string(topo));
  } else {
    double mx = 0.0, my = 0.0;
    for (const auto& rv : verts) {
      mx = std::max(mx, rv.p.x);
      my = std::max(my, rv.p.y);
    }
    w = Window(std::max(mx, 1.0), std::max(my, 1.0), Topology::plane);
  }

  std::vector<Point> pts, extra_pts;
  std::vector<std::size_t> planted;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (verts[i].kind == VertexKind::grid) {
      extra_pts.push_back(verts[i].p);
    } else {
      if (!extra_pts.empty()) throw invalid_argument("network file: point vertices must precede grid vertices");
      if (verts[i].kind == VertexKind::planted) planted.push_back(pts.size());
      pts.push_back(verts[i].p);
    }
  }
  auto ps = std::make_shared<const PointSet>(w, std::move(pts), std::move(planted), 0);
  return SpatialNetwork(std::move(ps), std::move(extra_pts), std::move(edges), tag);
}

}  // namespace shapeline::io
