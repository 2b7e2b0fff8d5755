// Small end-to-end tour: build three proximity graphs on the same points,
// estimate their time constants along a few directions, print the shapes.

#include <cstdio>

#include "shapeline/shapestat.hpp"

int main() {
  using namespace shapeline;
  const Window w(240, 240, Topology::torus);
  RhoOptions o;
  o.theta_grid = default_theta_grid(8);
  o.r_ladder = {20, 40, 80};
  o.replicates = 4;
  o.seed = 7;
  for (const char* name : {"rng", "gabriel", "delaunay"}) {
    ModelSpec m;
    m.name = name;
    const ShapeEstimate est = estimate_rho(m, w, 1.0, o);
    std::printf("%-9s mean rho %.4f +- %.4f\n", name, est.theta_average, est.theta_average_stderr);
    const LimitShape B = limit_shape(est);
    for (std::size_t j = 0; j < B.theta.size(); ++j)
      std::printf("   theta %.3f  radius %.4f\n", B.theta[j], B.radius[j]);
  }
}
