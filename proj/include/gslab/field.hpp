#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gslab/grid.hpp"

namespace gslab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridMismatchError : Error {
  explicit GridMismatchError(const std::string& what) : Error("grid mismatch: " + what) {}
};

struct NoAdmissibleStartError : Error {
  explicit NoAdmissibleStartError(const std::string& what) : Error("no admissible start: " + what) {}
};

/// Real values at the interior nodes of a Grid, row-major.
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(static_cast<std::size_t>(grid->node_count()), fill) {}

  static ScalarField from_function(GridPtr g, const std::function<double(const Point&)>& f);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what);
void require_same_grid(const ScalarField& a, const RegionMask& m, const char* what);

/// Throws if any entry is NaN or infinite.
void require_finite(const ScalarField& f, const char* what);

double max_abs(const ScalarField& f);
double max_value(const ScalarField& f);
double min_value(const ScalarField& f);

}  // namespace gslab
