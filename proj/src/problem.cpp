#include "gslab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gslab/spectral.hpp"

namespace gslab {

namespace {

void check_exponent(double p) {
  if (!(p > 2.0)) {
    throw std::invalid_argument("exponent p must exceed 2, got " + std::to_string(p));
  }
}

void check_decreasing_to_zero(const std::vector<double>& eps_seq) {
  if (eps_seq.empty()) throw std::invalid_argument("empty eps sequence");
  for (std::size_t i = 0; i < eps_seq.size(); ++i) {
    if (!(eps_seq[i] > 0.0)) throw std::invalid_argument("eps sequence must be positive");
    if (i > 0 && !(eps_seq[i] < eps_seq[i - 1])) {
      throw std::invalid_argument("eps sequence must be strictly decreasing");
    }
  }
}

// Bounding-box diagonal of the node set {Q > 0}; 0 when empty or singleton.
double positive_set_diameter(const ScalarField& q) {
  const Grid& g = *q.grid;
  Point mn{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point mx{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (int i = 0; i < g.node_count(); ++i) {
    if (q.values[static_cast<std::size_t>(i)] > 0.0) {
      const Point x = g.node(i);
      any = true;
      for (int a = 0; a < g.dim; ++a) {
        mn[a] = std::min(mn[a], x[a]);
        mx[a] = std::max(mx[a], x[a]);
      }
    }
  }
  if (!any) return 0.0;
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) s += (mx[a] - mn[a]) * (mx[a] - mn[a]);
  return std::sqrt(s);
}

}  // namespace

ScalarField ProblemInstance::Vn() const {
  ScalarField out = V;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += K.values[i];
  return out;
}

bool ProblemInstance::feasible() const { return positive_node_count() > 0; }

int ProblemInstance::positive_node_count() const {
  int c = 0;
  for (double q : Q.values) c += (q > 0.0) ? 1 : 0;
  return c;
}

std::vector<ProblemInstance> make_family_shrinking_ball(
    const GridPtr& grid, const std::vector<double>& eps_seq, double q_plus, double q_minus,
    const ScalarField& V, const KSpec& k_spec, double p, const Point& center, int first_label) {
  check_exponent(p);
  check_decreasing_to_zero(eps_seq);
  if (!(q_plus > 0.0)) throw std::invalid_argument("q_plus must be positive");
  if (!(q_minus < 0.0)) throw std::invalid_argument("q_minus must be negative");
  require_finite(V, "make_family_shrinking_ball: V");
  if (!(V.grid && *V.grid == *grid)) throw GridMismatchError("make_family_shrinking_ball: V");
  const double dist = grid->min_boundary_distance(center);
  if (!(dist > 0.0)) throw std::invalid_argument("center outside the grid box");
  if (!(eps_seq.front() < dist)) {
    throw std::invalid_argument("eps_1 must be smaller than the center's boundary distance");
  }
  if (!(k_spec.support_fraction > 0.0) || k_spec.support_fraction > 1.0) {
    throw std::invalid_argument("K support fraction must lie in (0, 1]");
  }

  std::vector<ProblemInstance> family;
  family.reserve(eps_seq.size());
  for (std::size_t j = 0; j < eps_seq.size(); ++j) {
    const double eps = eps_seq[j];
    ProblemInstance inst;
    inst.grid = grid;
    inst.V = V;
    inst.K = ScalarField(grid, 0.0);
    inst.Q = ScalarField(grid, 0.0);
    inst.p = p;
    inst.n = first_label + static_cast<int>(j);
    inst.centers = {center};
    inst.core_radius = eps;
    const double k_radius = eps * k_spec.support_fraction;
    int inside = 0;
    for (int i = 0; i < grid->node_count(); ++i) {
      const double d = euclid_dist(grid->node(i), center, grid->dim);
      const auto k = static_cast<std::size_t>(i);
      inst.Q.values[k] = (d < eps) ? q_plus : q_minus;
      if (d < eps) ++inside;
      if (k_spec.amplitude != 0.0 && d < k_radius) inst.K.values[k] = k_spec.amplitude;
    }
    inst.sub_resolution = (inside == 0);
    family.push_back(std::move(inst));
  }
  return family;
}

std::vector<ProblemInstance> make_family_level_shift(
    const GridPtr& grid, const ScalarField& q_profile, const std::vector<double>& lambda_seq,
    const ScalarField& V, double p, const Point& center, int first_label) {
  check_exponent(p);
  if (lambda_seq.empty()) throw std::invalid_argument("empty lambda sequence");
  require_finite(q_profile, "make_family_level_shift: Q profile");
  if (!(q_profile.grid && *q_profile.grid == *grid)) {
    throw GridMismatchError("make_family_level_shift: Q profile");
  }
  if (!(V.grid && *V.grid == *grid)) throw GridMismatchError("make_family_level_shift: V");

  // The profile must attain its maximum at exactly one node, the one nearest
  // to the stated center.
  const double peak = max_value(q_profile);
  int peak_idx = -1;
  int peak_count = 0;
  for (int i = 0; i < grid->node_count(); ++i) {
    if (q_profile.values[static_cast<std::size_t>(i)] == peak) {
      ++peak_count;
      peak_idx = i;
    }
  }
  if (peak_count != 1) {
    throw std::invalid_argument("Q profile must have a strict unique maximum (found " +
                                std::to_string(peak_count) + " maximizing nodes)");
  }
  int nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid->node_count(); ++i) {
    const double d = euclid_dist(grid->node(i), center, grid->dim);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  if (nearest != peak_idx) {
    throw std::invalid_argument("Q profile maximum is not at the stated center");
  }
  for (std::size_t j = 0; j < lambda_seq.size(); ++j) {
    if (!(lambda_seq[j] < peak)) {
      throw std::invalid_argument("lambda_n must stay below the profile maximum");
    }
    if (j > 0 && !(lambda_seq[j] > lambda_seq[j - 1])) {
      throw std::invalid_argument("lambda sequence must be strictly increasing");
    }
  }

  std::vector<ProblemInstance> family;
  family.reserve(lambda_seq.size());
  for (std::size_t j = 0; j < lambda_seq.size(); ++j) {
    ProblemInstance inst;
    inst.grid = grid;
    inst.V = V;
    inst.K = ScalarField(grid, 0.0);
    inst.Q = q_profile;
    for (double& q : inst.Q.values) q -= lambda_seq[j];
    inst.p = p;
    inst.n = first_label + static_cast<int>(j);
    inst.centers = {grid->node(peak_idx)};
    // Radius of the positive set, measured from the peak node.
    double r = 0.0;
    for (int i = 0; i < grid->node_count(); ++i) {
      if (inst.Q.values[static_cast<std::size_t>(i)] > 0.0) {
        r = std::max(r, euclid_dist(grid->node(i), inst.centers[0], grid->dim));
      }
    }
    inst.core_radius = std::max(r, grid->max_spacing());
    inst.sub_resolution = false;  // the peak node is always strictly positive
    family.push_back(std::move(inst));
  }
  return family;
}

std::vector<ProblemInstance> make_two_point_family(
    const GridPtr& grid, const std::vector<double>& eps_seq, double q_plus, double q_minus,
    const ScalarField& V, double p, const Point& x1, const Point& x2,
    std::optional<double> q_plus_second, int first_label) {
  check_exponent(p);
  check_decreasing_to_zero(eps_seq);
  if (!(q_plus > 0.0)) throw std::invalid_argument("q_plus must be positive");
  if (q_plus_second && !(*q_plus_second > 0.0)) {
    throw std::invalid_argument("second-ball amplitude must be positive");
  }
  if (!(q_minus < 0.0)) throw std::invalid_argument("q_minus must be negative");
  if (!(V.grid && *V.grid == *grid)) throw GridMismatchError("make_two_point_family: V");
  const double eps1 = eps_seq.front();
  const double sep = euclid_dist(x1, x2, grid->dim);
  if (!(sep > 2.0 * eps1)) {
    throw std::invalid_argument("the eps_1 balls around x1 and x2 overlap (|x1-x2| = " +
                                std::to_string(sep) + ")");
  }
  if (!(eps1 < grid->min_boundary_distance(x1)) || !(eps1 < grid->min_boundary_distance(x2))) {
    throw std::invalid_argument("the eps_1 balls are not contained in the grid box");
  }
  const double q2 = q_plus_second.value_or(q_plus);

  std::vector<ProblemInstance> family;
  family.reserve(eps_seq.size());
  for (std::size_t j = 0; j < eps_seq.size(); ++j) {
    const double eps = eps_seq[j];
    ProblemInstance inst;
    inst.grid = grid;
    inst.V = V;
    inst.K = ScalarField(grid, 0.0);
    inst.Q = ScalarField(grid, 0.0);
    inst.p = p;
    inst.n = first_label + static_cast<int>(j);
    inst.centers = {x1, x2};
    inst.core_radius = eps;
    int inside = 0;
    for (int i = 0; i < grid->node_count(); ++i) {
      const Point x = grid->node(i);
      const auto k = static_cast<std::size_t>(i);
      if (euclid_dist(x, x1, grid->dim) < eps) {
        inst.Q.values[k] = q_plus;
        ++inside;
      } else if (euclid_dist(x, x2, grid->dim) < eps) {
        inst.Q.values[k] = q2;
        ++inside;
      } else {
        inst.Q.values[k] = q_minus;
      }
    }
    inst.sub_resolution = (inside == 0);
    family.push_back(std::move(inst));
  }
  return family;
}

AssumptionReport validate_assumptions(const std::vector<ProblemInstance>& family,
                                      const std::vector<double>& eps_probes) {
  if (family.empty()) throw std::invalid_argument("validate_assumptions: empty family");
  const GridPtr grid = family.front().grid;
  AssumptionReport rep;
  rep.h_max = grid->max_spacing();
  double box_r = 0.0;
  for (int a = 0; a < grid->dim; ++a) {
    box_r = std::max(box_r, std::max(std::fabs(grid->lo[a]), std::fabs(grid->hi[a])));
  }
  rep.box_radius = box_r;

  bool all_v_nonneg = true;
  for (const auto& inst : family) {
    InstanceRow row;
    row.n = inst.n;
    row.v_nonneg = min_value(inst.V) >= 0.0;
    row.feasible = inst.feasible();
    row.sub_resolution = inst.sub_resolution;
    row.k_inf = max_abs(inst.K);
    row.q_inf = max_abs(inst.Q);
    row.diam_positive = positive_set_diameter(inst.Q);
    rep.B = std::max(rep.B, row.k_inf);
    rep.C = std::max(rep.C, row.q_inf);
    all_v_nonneg = all_v_nonneg && row.v_nonneg;
    rep.any_unresolved = rep.any_unresolved || row.sub_resolution;
    rep.instances.push_back(row);
  }

  const std::vector<Point>& centers = family.front().centers;
  for (double eps : eps_probes) {
    ProbeRow probe;
    probe.eps = eps;
    const RegionMask outside = ball_union_mask(grid, centers, eps, /*complement=*/true);
    // For each member: Q < 0 everywhere outside and supp K inside the ball(s).
    std::vector<bool> ok(family.size(), false);
    std::vector<double> neg_margin(family.size(), 0.0);
    for (std::size_t m = 0; m < family.size(); ++m) {
      double qmax = -std::numeric_limits<double>::infinity();
      bool k_confined = true;
      for (std::size_t i = 0; i < outside.member.size(); ++i) {
        if (!outside.member[i]) continue;
        qmax = std::max(qmax, family[m].Q.values[i]);
        if (family[m].K.values[i] != 0.0) k_confined = false;
      }
      const bool empty_outside = !std::isfinite(qmax);
      ok[m] = k_confined && (empty_outside || qmax < 0.0);
      neg_margin[m] = empty_outside ? std::numeric_limits<double>::infinity() : -qmax;
    }
    // Least label from which every later member satisfies the condition.
    int threshold = -1;
    for (std::size_t m = 0; m < family.size(); ++m) {
      bool tail_ok = true;
      for (std::size_t k = m; k < family.size(); ++k) tail_ok = tail_ok && ok[k];
      if (tail_ok) {
        threshold = static_cast<int>(m);
        break;
      }
    }
    if (threshold >= 0) {
      probe.satisfied = true;
      probe.n_threshold = family[static_cast<std::size_t>(threshold)].n;
      double delta = std::numeric_limits<double>::infinity();
      for (std::size_t k = static_cast<std::size_t>(threshold); k < family.size(); ++k) {
        delta = std::min(delta, neg_margin[k]);
      }
      probe.delta = delta;
    }
    rep.probes.push_back(probe);
  }

  bool all_probes = !rep.probes.empty();
  for (const auto& pr : rep.probes) all_probes = all_probes && pr.satisfied;
  if (all_probes) {
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -std::numeric_limits<double>::infinity();
    for (const auto& pr : rep.probes) {
      dmin = std::min(dmin, pr.delta);
      dmax = std::max(dmax, pr.delta);
    }
    if (std::isfinite(dmin) && dmax - dmin <= 1e-12 * std::max(1.0, std::fabs(dmax))) {
      rep.uniform_delta = dmin;
    }
  }

  // Scan for (lambda, R) with V >= lambda > 0 outside B_R(0).
  {
    const ScalarField& V = family.front().V;
    for (int k = 1; k <= 15; ++k) {
      const double R = box_r * static_cast<double>(k) / 16.0;
      double vmin = std::numeric_limits<double>::infinity();
      bool any = false;
      for (int i = 0; i < grid->node_count(); ++i) {
        const Point x = grid->node(i);
        if (euclid_dist(x, Point{0.0, 0.0}, grid->dim) > R) {
          any = true;
          vmin = std::min(vmin, V.values[static_cast<std::size_t>(i)]);
        }
      }
      if (any && vmin > 0.0) {
        rep.lambda_out = vmin;
        rep.R_out = R;
        break;
      }
    }
  }

  const SpectralResult spec = smallest_eigenvalue(family.front().V, 1e-10, 400);
  rep.min_eig = spec.min_eig;
  rep.min_eig_ok = spec.converged;

  bool all_feasible_or_flagged = true;
  for (const auto& row : rep.instances) {
    all_feasible_or_flagged = all_feasible_or_flagged && (row.feasible || row.sub_resolution);
  }
  rep.a1_pass = all_v_nonneg && rep.min_eig_ok && rep.min_eig > 0.0 && all_probes;
  rep.a2_pass = all_probes && all_feasible_or_flagged;
  return rep;
}

}  // namespace gslab
