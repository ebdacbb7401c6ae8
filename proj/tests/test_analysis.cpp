#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gslab/analysis.hpp"
#include "gslab/mesh_ops.hpp"
#include "test_helpers.hpp"

using namespace gslab;
using gslab::testing::composite_kerr_family;
using gslab::testing::reference_instance;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

// A hand-built GroundState wrapper for diagnostics that only need fields.
GroundState fake_state(const ProblemInstance& inst, const ScalarField& u) {
  GroundState gs;
  gs.instance = std::make_shared<const ProblemInstance>(inst);
  gs.u = u;
  gs.v = u;
  gs.s = 1.0;
  const ScalarField vn = inst.Vn();
  gs.norm_u_sq = norm_n_sq(u, vn);
  return gs;
}
}  // namespace

TEST_CASE("ratio extremes: supported inside vs spread out") {
  ProblemInstance inst = reference_instance(500);
  // Field vanishing outside B_eps: exterior ratios are zero.
  ScalarField inside = ScalarField::from_function(inst.grid, [](const Point& x) {
    const double r = std::fabs(x[0]);
    return r < 0.2 ? (0.2 - r) : 0.0;
  });
  auto rows = h1_lp_ratios(fake_state(inst, inside), {0.25});
  CHECK(rows[0].lp_ratio == 0.0);
  CHECK(rows[0].h1_ratio < 0.02);  // boundary edges at the support edge only

  // A domain-spanning profile leaves most mass outside a small ball.
  ScalarField spread = ScalarField::from_function(inst.grid, [](const Point& x) {
    return std::cos(0.5 * std::acos(-1.0) * x[0]);
  });
  auto rows2 = h1_lp_ratios(fake_state(inst, spread), {0.05});
  CHECK(rows2[0].h1_ratio > 0.8);
  CHECK(rows2[0].lp_ratio > 0.8);
  for (const auto& r : {rows[0], rows2[0]}) {
    CHECK(r.h1_ratio >= 0.0);
    CHECK(r.h1_ratio <= 1.0);
    CHECK(r.lp_ratio >= 0.0);
    CHECK(r.lp_ratio <= 1.0);
  }

  // Larger excluded balls can only shrink the exterior ratio.
  auto sweep = h1_lp_ratios(fake_state(inst, spread), {0.1, 0.3, 0.6});
  CHECK(sweep[0].h1_ratio >= sweep[1].h1_ratio);
  CHECK(sweep[1].h1_ratio >= sweep[2].h1_ratio);

  // Sub-mesh balls are flagged.
  auto tiny = h1_lp_ratios(fake_state(inst, spread), {1e-4});
  CHECK(tiny[0].core_empty);
}

TEST_CASE("exponent thresholds are exact") {
  CHECK(lq_thresholds(1, 4.0).q_star == 1.0);
  CHECK(lq_thresholds(2, 4.0).q_star == 2.0);
  CHECK(lq_thresholds(3, 3.0).q_star == 1.5);
  CHECK(lq_thresholds(1, 4.0).two_star == kInf);
  CHECK(lq_thresholds(2, 4.0).two_star == kInf);
  CHECK(lq_thresholds(3, 3.0).two_star == 6.0);
  CHECK(lq_thresholds(3, 3.0).lower_exp == 4.0);
  // N = 3, p = 3: p below (2N-2)/(N-2) = 4, the vanishing range fails.
  CHECK_FALSE(lq_thresholds(3, 3.0).uniform_vanishing_range);
  CHECK(lq_thresholds(3, 4.5).uniform_vanishing_range);
  CHECK_THROWS_AS(lq_thresholds(0, 4.0), std::invalid_argument);
}

TEST_CASE("tail scan inserts q_star and bounds ratios") {
  ProblemInstance inst = reference_instance(500);
  ScalarField u = ScalarField::from_function(inst.grid, [](const Point& x) {
    return std::exp(-10.0 * x[0] * x[0]);
  });
  auto rows = lq_tail_scan(fake_state(inst, u), {2.0, kInf}, {0.25});
  bool saw_qstar = false;
  for (const auto& r : rows) {
    if (r.q == 1.0) saw_qstar = true;  // q* = N(p-2)/2 = 1
    CHECK(r.ratio >= 0.0);
    CHECK(r.ratio <= 1.0);
    CHECK(r.tail <= r.total * (1.0 + 1e-12));
  }
  CHECK(saw_qstar);
  CHECK_THROWS_AS(lq_tail_scan(fake_state(inst, u), {0.5}, {0.25}), std::invalid_argument);
}

TEST_CASE("decay envelope check") {
  GridPtr g = build_grid_1d(-10.0, 10.0, 2000, true);
  ProblemInstance inst;
  inst.grid = g;
  inst.V = ScalarField::from_function(
      g, [](const Point& x) { return std::fabs(x[0]) < 0.5 ? 0.0 : 1.0; });
  inst.K = ScalarField(g, 0.0);
  inst.Q = ScalarField::from_function(
      g, [](const Point& x) { return std::fabs(x[0]) < 0.25 ? 1.0 : -1.0; });
  inst.p = 4.0;
  inst.n = 1;
  inst.centers = {Point{0.0, 0.0}};
  inst.core_radius = 0.25;

  // Zero field: the envelope holds with zero margin.
  auto z = decay_envelope_check(fake_state(inst, ScalarField(g, 0.0)), 0.5, 1.0, 0.1);
  CHECK(z.margin >= 0.0);
  CHECK(z.bound_M == 0.0);

  // Exact exponential with the matching M: equality case at zero slack.
  ScalarField expf = ScalarField::from_function(
      g, [](const Point& x) { return std::exp(-std::fabs(x[0])); });
  auto e = decay_envelope_check(fake_state(inst, expf), 0.5, 1.0, 0.0);
  CHECK(e.alpha == 1.0);
  CHECK(e.margin >= -1e-12);
  CHECK(std::fabs(e.margin) < 1e-10);

  // Faster-decaying fields clear the relaxed envelope strictly beyond the
  // anchor; the anchor node itself sits exactly on it.
  ScalarField fast = ScalarField::from_function(
      g, [](const Point& x) { return std::exp(-2.0 * std::fabs(x[0])); });
  auto f = decay_envelope_check(fake_state(inst, fast), 0.5, 1.0, 0.1);
  CHECK(f.margin >= 0.0);

  CHECK_THROWS_AS(decay_envelope_check(fake_state(inst, expf), 11.0, 1.0, 0.1),
                  std::invalid_argument);  // no nodes beyond R
  CHECK_THROWS_AS(decay_envelope_check(fake_state(inst, expf), 0.5, 2.0, 0.1),
                  std::invalid_argument);  // V < lambda outside
  ProblemInstance bounded = inst;
  GridPtr gb = build_grid_1d(-10.0, 10.0, 2000, false);
  bounded.grid = gb;
  bounded.V.grid = gb;
  bounded.K.grid = gb;
  bounded.Q.grid = gb;
  CHECK_THROWS_AS(decay_envelope_check(fake_state(bounded, ScalarField(gb, 0.0)), 0.5, 1.0, 0.1),
                  std::invalid_argument);  // not a truncated-unbounded grid
}

TEST_CASE("singular constant closed forms") {
  const SingularSolution a = singular_constant(3, 3.0, 1.0);
  CHECK(a.c_p == 2.0);
  CHECK(a.beta == 2.0);
  CHECK_FALSE(a.sign_flipped);
  for (double r : {0.5, 1.0, 2.0}) {
    CHECK(singular_ode_residual(3, 3.0, 1.0, a, r) < 1e-10);
  }

  const SingularSolution b = singular_constant(3, 3.0, 4.0);
  CHECK(b.c_p == doctest::Approx(0.5).epsilon(1e-15));

  // p = 5 > (2N-2)/(N-2) = 4: the sign-flipped regime, reported not rejected.
  const SingularSolution c = singular_constant(3, 5.0, 1.0);
  CHECK(c.sign_flipped);
  for (double r : {0.5, 1.0, 2.0}) {
    CHECK(singular_ode_residual(3, 5.0, 1.0, c, r) < 1e-10);
  }

  // Independent finite-difference confirmation of the radial ODE.
  {
    const SingularSolution s = singular_constant(4, 3.5, 2.0);
    auto w = [&s](double r) { return s.c_p * std::pow(r, -s.beta); };
    const double r = 1.3;
    const double h = 1e-5;
    const double lap = (w(r + h) - 2.0 * w(r) + w(r - h)) / (h * h) +
                       (4.0 - 1.0) / r * (w(r + h) - w(r - h)) / (2.0 * h);
    const double delta_eff = s.sign_flipped ? -2.0 : 2.0;
    CHECK(-lap + delta_eff * std::pow(w(r), 3.5 - 1.0) == doctest::Approx(0.0).epsilon(1e-6));
  }

  CHECK_THROWS_AS(singular_constant(2, 3.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(singular_constant(3, 3.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(singular_constant(3, 4.0, 1.0), std::invalid_argument);  // degenerate exponent
}

TEST_CASE("two-point mass split") {
  GridPtr g = build_grid_1d(-1.0, 1.0, 1000);
  ScalarField V(g, 0.0);
  auto fam = make_two_point_family(g, {0.1}, 1.0, -1.0, V, 4.0, Point{-0.5, 0.0},
                                   Point{0.5, 0.0}, std::nullopt, 1);
  const ProblemInstance& inst = fam.front();

  ScalarField left = ScalarField::from_function(g, [](const Point& x) {
    const double d = std::fabs(x[0] + 0.5);
    return d < 0.15 ? (0.15 - d) : 0.0;
  });
  MassSplit ml = two_point_mass_split(fake_state(inst, left), 0.25);
  CHECK(ml.m1 > 0.95);
  CHECK(ml.m2 == 0.0);
  CHECK(ml.selected == 1);
  CHECK(ml.m1 + ml.m2 <= 1.0 + 1e-12);
  CHECK(ml.j_tail1 < 0.2);

  // Exact index symmetry gives an exact tie.
  ScalarField both = ScalarField::from_function(g, [](const Point& x) {
    const double d1 = std::fabs(x[0] + 0.5);
    const double d2 = std::fabs(x[0] - 0.5);
    const double b1 = d1 < 0.15 ? (0.15 - d1) : 0.0;
    const double b2 = d2 < 0.15 ? (0.15 - d2) : 0.0;
    return b1 + b2;
  });
  MassSplit mb = two_point_mass_split(fake_state(inst, both), 0.25);
  CHECK(mb.selected == 0);
  CHECK(mb.m1 == doctest::Approx(mb.m2).epsilon(1e-12));

  CHECK_THROWS_AS(two_point_mass_split(fake_state(inst, left), 0.6), std::invalid_argument);
  ProblemInstance one_center = reference_instance(1000);
  CHECK_THROWS_AS(two_point_mass_split(fake_state(one_center, left), 0.25),
                  std::invalid_argument);
}

TEST_CASE("concentration study end to end on a short family") {
  auto fam = composite_kerr_family(1200, 2, 4);
  SolverConfig cfg;
  StudyOptions opts;
  opts.eps_list = {0.25};
  opts.q_list = {2.0, kInf};
  ConcentrationReport rep = run_concentration_study(fam, cfg, opts, 2);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& row : rep.rows) {
    CHECK(row.solved);
    CHECK(row.w_norm_check == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(row.alpha_check) <= 1e-8 * row.norm_n * row.norm_n);
  }
  CHECK(rep.verdicts.norm_increasing);
  CHECK(rep.verdicts.h1_decreasing);
  CHECK(rep.verdicts.lp_decreasing);
  CHECK(rep.verdicts.qstar_bounded_below);
  CHECK(rep.verdicts.all_pass());
  // q* = 1 inserted automatically.
  CHECK(rep.q_list.front() == 1.0);

  std::ostringstream csv;
  write_report_csv(rep, csv);
  const std::string text = csv.str();
  CHECK(text.find("n,eps,q,h1_ratio,lp_ratio,tail_q,total_q,norm_n,m1,m2,selected,margin") == 0);

  const std::string verdicts = verdicts_json(rep);
  CHECK(verdicts.find("\"all_pass\": true") != std::string::npos);
}

TEST_CASE("2D family shows the same concentration trends") {
  GridPtr g = build_grid(2, Point{-1.0, -1.0}, Point{1.0, 1.0}, {61, 61});
  ScalarField V(g, 25.0);
  KSpec k;
  k.amplitude = -25.0;
  auto fam = make_family_shrinking_ball(g, {0.3, 0.15, 0.075}, 1.0, -1.0, V, k, 4.0,
                                        Point{0.0, 0.0}, 1);
  SolverConfig cfg;
  StudyOptions opts;
  opts.eps_list = {0.35};
  opts.q_list = {4.0};
  ConcentrationReport rep = run_concentration_study(fam, cfg, opts, 2);
  for (const auto& row : rep.rows) REQUIRE(row.solved);
  CHECK(rep.thresholds.q_star == 2.0);  // N = 2, p = 4: the open borderline
  CHECK(rep.verdicts.norm_increasing);
  CHECK(rep.verdicts.h1_decreasing);
  CHECK(rep.verdicts.lp_decreasing);
  // The q = 2 borderline is reported without a pass/fail verdict: only
  // exponents above q_star get growth verdicts.
  CHECK(rep.verdicts.totalq_increasing.count(2.0) == 0);
  CHECK(rep.verdicts.totalq_increasing.count(4.0) == 1);
}

TEST_CASE("study flags short families and infeasible members") {
  auto fam1 = composite_kerr_family(600, 3, 3);
  SolverConfig cfg;
  StudyOptions opts;
  opts.eps_list = {0.25};
  ConcentrationReport rep1 = run_concentration_study(fam1, cfg, opts, 1);
  CHECK(rep1.verdicts.insufficient_n);
  CHECK_FALSE(rep1.verdicts.all_pass());

  // A member whose positive core falls below the mesh resolution is marked
  // while the rest of the family fills in.
  GridPtr g = build_grid_1d(-1.0, 1.0, 60);
  ScalarField V(g, 0.0);
  auto fam2 = make_family_shrinking_ball(g, {0.5, 0.25, 0.001}, 1.0, -1.0, V, KSpec{}, 4.0,
                                         Point{0.0, 0.0}, 1);
  ConcentrationReport rep2 = run_concentration_study(fam2, cfg, opts, 1);
  CHECK(rep2.rows[0].solved);
  CHECK(rep2.rows[1].solved);
  CHECK_FALSE(rep2.rows[2].solved);
  CHECK(rep2.rows[2].status == "sub_resolution");
  CHECK_FALSE(rep2.verdicts.all_solved);
}
