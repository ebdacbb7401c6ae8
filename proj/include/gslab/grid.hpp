#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace gslab {

// A point in the ambient space.  Only the first `dim` entries are meaningful.
using Point = std::array<double, 2>;

/// Uniform rectangular mesh of interior nodes on a box, with homogeneous
/// Dirichlet conditions on all faces.  Along each axis the spacing is
/// h = (hi - lo)/(n + 1); interior node i sits at lo + (i+1)h, so no node
/// lies on the boundary.  Node storage is row-major: in 2D the linear index
/// is i0 * n_nodes[1] + i1.
struct Grid {
  int dim = 1;
  Point lo{};
  Point hi{};
  std::array<int, 2> n_nodes{1, 1};
  Point h{};
  // Records that this box stands in for an unbounded domain (the far
  // boundary is a truncation artifact, not a physical wall).
  bool truncated_unbounded = false;

  int node_count() const {
    int c = 1;
    for (int a = 0; a < dim; ++a) c *= n_nodes[a];
    return c;
  }

  // Node coordinate as a convex blend of the endpoints.  Algebraically equal
  // to lo + (i+1)h, but evaluates to exactly opposite values at mirrored
  // indices when lo == -hi, so symmetric problems stay symmetric in floats.
  double coord(int axis, int idx) const {
    const double k = static_cast<double>(idx + 1);
    const double m = static_cast<double>(n_nodes[axis] + 1);
    return (lo[axis] * (m - k) + hi[axis] * k) / m;
  }

  Point node(int linear) const {
    Point x{0.0, 0.0};
    if (dim == 1) {
      x[0] = coord(0, linear);
    } else {
      x[0] = coord(0, linear / n_nodes[1]);
      x[1] = coord(1, linear % n_nodes[1]);
    }
    return x;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h[a];
    return v;
  }

  double max_spacing() const {
    double m = 0.0;
    for (int a = 0; a < dim; ++a) m = m > h[a] ? m : h[a];
    return m;
  }

  double min_boundary_distance(const Point& x) const {
    double d = hi[0] - lo[0];
    for (int a = 0; a < dim; ++a) {
      const double d1 = x[a] - lo[a];
      const double d2 = hi[a] - x[a];
      if (d1 < d) d = d1;
      if (d2 < d) d = d2;
    }
    return d;
  }

  bool operator==(const Grid& o) const {
    if (dim != o.dim || truncated_unbounded != o.truncated_unbounded) return false;
    for (int a = 0; a < dim; ++a) {
      if (lo[a] != o.lo[a] || hi[a] != o.hi[a] || n_nodes[a] != o.n_nodes[a]) return false;
    }
    return true;
  }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(int dim, Point lo, Point hi, std::array<int, 2> n_nodes,
                   bool truncated_unbounded = false);
GridPtr build_grid_1d(double lo, double hi, int n_nodes, bool truncated_unbounded = false);

double euclid_dist(const Point& a, const Point& b, int dim);

/// Boolean node set on a grid; used for the balls and ball complements the
/// concentration diagnostics integrate over.
struct RegionMask {
  GridPtr grid;
  std::vector<std::uint8_t> member;

  int count() const;
  static RegionMask full(GridPtr g);
  static RegionMask empty_on(GridPtr g);
  RegionMask complement() const;
};

/// Nodes with |x - center| < radius (or >= radius when complement is set).
RegionMask ball_mask(const GridPtr& grid, const Point& center, double radius,
                     bool complement = false);

/// Union of balls of a common radius around several centers (complement flag
/// flips the whole union).
RegionMask ball_union_mask(const GridPtr& grid, const std::vector<Point>& centers,
                           double radius, bool complement = false);

}  // namespace gslab
