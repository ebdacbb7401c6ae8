#include "gslab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gslab {

GridPtr build_grid(int dim, Point lo, Point hi, std::array<int, 2> n_nodes,
                   bool truncated_unbounded) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("build_grid: dim must be 1 or 2, got " + std::to_string(dim));
  }
  Grid g;
  g.dim = dim;
  g.truncated_unbounded = truncated_unbounded;
  for (int a = 0; a < dim; ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a])) {
      throw std::invalid_argument("build_grid: non-finite bounds on axis " + std::to_string(a));
    }
    if (!(lo[a] < hi[a])) {
      throw std::invalid_argument("build_grid: lo >= hi on axis " + std::to_string(a));
    }
    if (n_nodes[a] < 3) {
      throw std::invalid_argument("build_grid: need at least 3 nodes per axis, got " +
                                  std::to_string(n_nodes[a]));
    }
    g.lo[a] = lo[a];
    g.hi[a] = hi[a];
    g.n_nodes[a] = n_nodes[a];
    g.h[a] = (hi[a] - lo[a]) / static_cast<double>(n_nodes[a] + 1);
  }
  // Unused axis slots stay benign.
  for (int a = dim; a < 2; ++a) {
    g.lo[a] = 0.0;
    g.hi[a] = 0.0;
    g.n_nodes[a] = 1;
    g.h[a] = 1.0;
  }
  return std::make_shared<const Grid>(g);
}

GridPtr build_grid_1d(double lo, double hi, int n_nodes, bool truncated_unbounded) {
  return build_grid(1, Point{lo, 0.0}, Point{hi, 0.0}, {n_nodes, 1}, truncated_unbounded);
}

double euclid_dist(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int ax = 0; ax < dim; ++ax) {
    const double d = a[ax] - b[ax];
    s += d * d;
  }
  return std::sqrt(s);
}

int RegionMask::count() const {
  int c = 0;
  for (auto m : member) c += m ? 1 : 0;
  return c;
}

RegionMask RegionMask::full(GridPtr g) {
  RegionMask r;
  r.member.assign(static_cast<std::size_t>(g->node_count()), 1);
  r.grid = std::move(g);
  return r;
}

RegionMask RegionMask::empty_on(GridPtr g) {
  RegionMask r;
  r.member.assign(static_cast<std::size_t>(g->node_count()), 0);
  r.grid = std::move(g);
  return r;
}

RegionMask RegionMask::complement() const {
  RegionMask r;
  r.grid = grid;
  r.member.resize(member.size());
  for (std::size_t i = 0; i < member.size(); ++i) r.member[i] = member[i] ? 0 : 1;
  return r;
}

RegionMask ball_mask(const GridPtr& grid, const Point& center, double radius, bool complement) {
  return ball_union_mask(grid, {center}, radius, complement);
}

RegionMask ball_union_mask(const GridPtr& grid, const std::vector<Point>& centers, double radius,
                           bool complement) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("ball_mask: radius must be positive, got " +
                                std::to_string(radius));
  }
  RegionMask r = RegionMask::empty_on(grid);
  const int n = grid->node_count();
  for (int i = 0; i < n; ++i) {
    const Point x = grid->node(i);
    bool inside = false;
    for (const auto& c : centers) {
      if (euclid_dist(x, c, grid->dim) < radius) {
        inside = true;
        break;
      }
    }
    r.member[static_cast<std::size_t>(i)] = (inside != complement) ? 1 : 0;
  }
  return r;
}

}  // namespace gslab
