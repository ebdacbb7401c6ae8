#include "gslab/field.hpp"

#include <cmath>
#include <limits>

namespace gslab {

ScalarField ScalarField::from_function(GridPtr g, const std::function<double(const Point&)>& f) {
  ScalarField out(std::move(g));
  const int n = out.grid->node_count();
  for (int i = 0; i < n; ++i) {
    out.values[static_cast<std::size_t>(i)] = f(out.grid->node(i));
  }
  return out;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.grid || !b.grid || !(*a.grid == *b.grid)) {
    throw GridMismatchError(what);
  }
}

void require_same_grid(const ScalarField& a, const RegionMask& m, const char* what) {
  if (!a.grid || !m.grid || !(*a.grid == *m.grid)) {
    throw GridMismatchError(what);
  }
}

void require_finite(const ScalarField& f, const char* what) {
  for (double v : f.values) {
    if (!std::isfinite(v)) {
      throw Error(std::string(what) + ": field has non-finite entries");
    }
  }
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) {
    const double a = std::fabs(v);
    if (a > m) m = a;
  }
  return m;
}

double max_value(const ScalarField& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f.values) {
    if (v > m) m = v;
  }
  return m;
}

double min_value(const ScalarField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : f.values) {
    if (v < m) m = v;
  }
  return m;
}

}  // namespace gslab
