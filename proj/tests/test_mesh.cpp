#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gslab/field_io.hpp"
#include "gslab/mesh_ops.hpp"
#include "test_helpers.hpp"

using namespace gslab;
using gslab::testing::random_field;

namespace {
const double kPi = std::acos(-1.0);

ScalarField sin_pi_x(const GridPtr& g) {
  return ScalarField::from_function(g, [](const Point& x) { return std::sin(kPi * x[0]); });
}
}  // namespace

TEST_CASE("build_grid basics") {
  GridPtr g = build_grid_1d(-1.0, 1.0, 3);
  CHECK(g->h[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g->node_count() == 3);
  CHECK(g->coord(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g->coord(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g->coord(0, 2) == doctest::Approx(0.5).epsilon(1e-15));

  GridPtr g2 = build_grid(2, Point{0.0, 0.0}, Point{1.0, 1.0}, {9, 9});
  CHECK(g2->h[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g2->h[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g2->node_count() == 81);

  CHECK_THROWS_AS(build_grid_1d(1.0, -1.0, 9), std::invalid_argument);
  CHECK_THROWS_AS(build_grid_1d(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_grid_1d(0.0, std::numeric_limits<double>::infinity(), 9),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid(3, Point{0, 0}, Point{1, 1}, {4, 4}), std::invalid_argument);
}

TEST_CASE("node coordinates are exactly mirror-antisymmetric on symmetric boxes") {
  for (int n : {4, 2000, 2001}) {
    GridPtr g = build_grid_1d(-1.0, 1.0, n);
    for (int i = 0; i < n; ++i) {
      CHECK(g->coord(0, i) == -g->coord(0, n - 1 - i));
    }
  }
}

TEST_CASE("ball_mask membership") {
  GridPtr g = build_grid_1d(-1.0, 1.0, 3);
  RegionMask m = ball_mask(g, Point{0.0, 0.0}, 0.4);
  CHECK(m.member == std::vector<std::uint8_t>{0, 1, 0});
  RegionMask mc = ball_mask(g, Point{0.0, 0.0}, 0.4, true);
  CHECK(mc.member == std::vector<std::uint8_t>{1, 0, 1});
  RegionMask all = ball_mask(g, Point{0.0, 0.0}, 10.0);
  CHECK(all.count() == 3);
  CHECK_THROWS_AS(ball_mask(g, Point{0.0, 0.0}, 0.0), std::invalid_argument);
  CHECK(RegionMask::full(g).complement().count() == 0);
}

TEST_CASE("apply_operator stencil") {
  GridPtr g = build_grid_1d(-1.0, 1.0, 3);
  ScalarField zero(g, 0.0);
  ScalarField v(g, 0.0);
  v.values = {0.0, 1.0, 0.0};
  ScalarField av = apply_operator(zero, v);
  CHECK(av.values[0] == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(av.values[1] == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(av.values[2] == doctest::Approx(-4.0).epsilon(1e-14));

  ScalarField z(g, 0.0);
  ScalarField az = apply_operator(zero, z);
  for (double x : az.values) CHECK(x == 0.0);

  GridPtr gother = build_grid_1d(-1.0, 1.0, 4);
  CHECK_THROWS_AS(apply_operator(zero, ScalarField(gother, 0.0)), GridMismatchError);
}

TEST_CASE("apply_operator reproduces the sine eigenfunction to O(h^2)") {
  double prev_err = 0.0;
  int idx = 0;
  for (int n : {200, 400}) {
    GridPtr g = build_grid_1d(0.0, 1.0, n);
    ScalarField zero(g, 0.0);
    ScalarField v = sin_pi_x(g);
    ScalarField av = apply_operator(zero, v);
    double err = 0.0;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      err = std::max(err, std::fabs(av.values[i] - kPi * kPi * v.values[i]));
    }
    CHECK(err < 10.0 * g->h[0] * g->h[0] * kPi * kPi);
    if (idx++ > 0) {
      const double order = std::log2(prev_err / err);
      CHECK(order == doctest::Approx(2.0).epsilon(0.1));
    }
    prev_err = err;
  }
}

TEST_CASE("integrate") {
  GridPtr g = build_grid_1d(0.0, 1.0, 999);
  ScalarField one(g, 1.0);
  CHECK(integrate(one) == doctest::Approx(0.999).epsilon(1e-13));

  ScalarField s2 = ScalarField::from_function(
      g, [](const Point& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[0]); });
  CHECK(integrate(s2) == doctest::Approx(0.5).epsilon(2e-4));

  CHECK(integrate(one, RegionMask::empty_on(g)) == 0.0);
  GridPtr gother = build_grid_1d(0.0, 1.0, 500);
  CHECK_THROWS_AS(integrate(one, RegionMask::full(gother)), GridMismatchError);
}

TEST_CASE("norm_n against analytic gradient energies") {
  GridPtr g = build_grid_1d(0.0, 1.0, 999);
  ScalarField v = sin_pi_x(g);
  ScalarField zero(g, 0.0);
  CHECK(norm_n(v, zero) == doctest::Approx(std::sqrt(kPi * kPi / 2.0)).epsilon(1e-3));
  CHECK(norm_n(ScalarField(g, 0.0), zero) == 0.0);
  ScalarField onef(g, 1.0);
  CHECK(norm_n(v, onef) == doctest::Approx(std::sqrt(kPi * kPi / 2.0 + 0.5)).epsilon(1e-3));
}

TEST_CASE("lq_norm") {
  GridPtr g = build_grid_1d(0.0, 1.0, 999);
  const RegionMask full = RegionMask::full(g);
  ScalarField two(g, 2.0);
  CHECK(lq_norm(two, std::numeric_limits<double>::infinity(), full) == 2.0);

  ScalarField v = sin_pi_x(g);
  CHECK(lq_norm(v, 4.0, full) == doctest::Approx(std::pow(3.0 / 8.0, 0.25)).epsilon(1e-3));

  ScalarField pos = random_field(g, 7, 0.0, 1.0);
  CHECK(lq_norm(pos, 1.0, full) == doctest::Approx(integrate(pos)).epsilon(1e-13));

  CHECK_THROWS_AS(lq_norm(v, 0.5, full), std::invalid_argument);
}

TEST_CASE("summation by parts: norm_n^2 equals the operator quadratic form") {
  for (int seed = 0; seed < 5; ++seed) {
    GridPtr g = build_grid_1d(-2.0, 1.0, 173);
    ScalarField v = random_field(g, 100 + seed);
    ScalarField c = random_field(g, 200 + seed, 0.0, 3.0);
    const double lhs = norm_n_sq(v, c);
    const double rhs = dot(apply_operator(c, v), v) * g->cell_volume();
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::fabs(lhs));
  }
  GridPtr g2 = build_grid(2, Point{-1.0, 0.0}, Point{1.0, 3.0}, {23, 31});
  for (int seed = 0; seed < 5; ++seed) {
    ScalarField v = random_field(g2, 300 + seed);
    ScalarField c = random_field(g2, 400 + seed, 0.0, 2.0);
    const double lhs = norm_n_sq(v, c);
    const double rhs = dot(apply_operator(c, v), v) * g2->cell_volume();
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::fabs(lhs));
  }
}

TEST_CASE("operator symmetry <Av,w> = <v,Aw>") {
  GridPtr g = build_grid(2, Point{0.0, 0.0}, Point{1.0, 2.0}, {19, 27});
  ScalarField c = random_field(g, 1, -1.0, 1.0);
  for (int seed = 0; seed < 5; ++seed) {
    ScalarField v = random_field(g, 500 + seed);
    ScalarField w = random_field(g, 600 + seed);
    const double a = dot(apply_operator(c, v), w);
    const double b = dot(v, apply_operator(c, w));
    CHECK(std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), 1.0));
  }
}

TEST_CASE("lq monotonicity in the region and scaling") {
  GridPtr g = build_grid_1d(-1.0, 1.0, 240);
  ScalarField v = random_field(g, 9);
  const RegionMask small = ball_mask(g, Point{0.1, 0.0}, 0.3);
  const RegionMask big = ball_mask(g, Point{0.1, 0.0}, 0.7);
  for (double q : {1.0, 2.0, 3.5, std::numeric_limits<double>::infinity()}) {
    CHECK(lq_norm(v, q, small) <= lq_norm(v, q, big) + 1e-15);
  }
  ScalarField cv = v;
  for (double& x : cv.values) x *= -3.25;
  ScalarField vn = random_field(g, 10, 0.0, 2.0);
  CHECK(lq_norm(cv, 2.5, big) == doctest::Approx(3.25 * lq_norm(v, 2.5, big)).epsilon(1e-13));
  CHECK(norm_n(cv, vn) == doctest::Approx(3.25 * norm_n(v, vn)).epsilon(1e-13));
}

TEST_CASE("mesh refinement converges at second order") {
  // Quadrature of a boundary-compatible parabola (the sine-squared family is
  // summed exactly by this rule, so it cannot carry a rate measurement) and
  // the gradient energy of the sine mode.
  double prev_quad = 0.0, prev_norm = 0.0;
  int idx = 0;
  for (int n : {125, 250, 500, 1000}) {
    GridPtr g = build_grid_1d(0.0, 1.0, n);
    ScalarField v = sin_pi_x(g);
    ScalarField zero(g, 0.0);
    ScalarField parab = ScalarField::from_function(
        g, [](const Point& x) { return x[0] * (1.0 - x[0]); });
    const double quad_err = std::fabs(integrate(parab) - 1.0 / 6.0);
    const double norm_err = std::fabs(norm_n_sq(v, zero) - kPi * kPi / 2.0);
    if (idx > 0) {
      CHECK(std::log2(prev_quad / quad_err) == doctest::Approx(2.0).epsilon(0.15));
      CHECK(std::log2(prev_norm / norm_err) == doctest::Approx(2.0).epsilon(0.15));
    }
    prev_quad = quad_err;
    prev_norm = norm_err;
    ++idx;
  }
}

TEST_CASE("gradient energy density conserves the total and localizes") {
  GridPtr g = build_grid(2, Point{-1.0, -1.0}, Point{1.0, 1.0}, {21, 21});
  ScalarField v = random_field(g, 42);
  ScalarField zero(g, 0.0);
  ScalarField e = grad_energy_density(v);
  double total = 0.0;
  for (double x : e.values) {
    CHECK(x >= 0.0);
    total += x;
  }
  CHECK(std::fabs(total - norm_n_sq(v, zero)) <= 1e-12 * total);

  ScalarField vn = random_field(g, 43, 0.0, 1.0);
  CHECK(h1_energy(v, vn, RegionMask::full(g)) == doctest::Approx(norm_n_sq(v, vn)).epsilon(1e-12));
  const RegionMask half = ball_mask(g, Point{0.0, 0.0}, 0.8);
  const double inside = h1_energy(v, vn, half);
  const double outside = h1_energy(v, vn, half.complement());
  CHECK(inside + outside == doctest::Approx(norm_n_sq(v, vn)).epsilon(1e-12));
}

TEST_CASE("field dumps round-trip losslessly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gslab_mesh_io_test";
  fs::create_directories(dir);
  GridPtr g = build_grid(2, Point{-1.5, 0.25}, Point{0.5, 2.0}, {11, 7}, true);
  ScalarField f = random_field(g, 99, -3.0, 3.0);

  const std::string stem = (dir / "field").string();
  save_field(f, stem, "u");
  std::string name;
  ScalarField f2 = load_field(stem, &name);
  CHECK(name == "u");
  CHECK(*f2.grid == *f.grid);
  CHECK(f2.values == f.values);

  const std::string csv = (dir / "field.csv").string();
  save_field_csv(f, csv, "u");
  ScalarField f3 = load_field_csv(csv, &name);
  CHECK(name == "u");
  CHECK(*f3.grid == *f.grid);
  CHECK(f3.values == f.values);
  fs::remove_all(dir);
}

TEST_CASE("field loaders reject missing or truncated inputs") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gslab_mesh_io_errors";
  fs::create_directories(dir);
  CHECK_THROWS_AS(load_field((dir / "absent").string()), Error);
  CHECK_THROWS_AS(load_field_csv((dir / "absent.csv").string()), Error);

  GridPtr g = build_grid_1d(0.0, 1.0, 16);
  ScalarField f = random_field(g, 3);
  const std::string stem = (dir / "short").string();
  save_field(f, stem, "u");
  {
    std::ofstream trunc(stem + ".bin", std::ios::binary | std::ios::trunc);
    trunc << "xx";
  }
  CHECK_THROWS_AS(load_field(stem), Error);

  {
    std::ofstream bad(dir / "noheader.csv");
    bad << "0.5,1.0\n";
  }
  CHECK_THROWS_AS(load_field_csv((dir / "noheader.csv").string()), Error);
  fs::remove_all(dir);
}
