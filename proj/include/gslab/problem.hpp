#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gslab/field.hpp"
#include "gslab/mesh_ops.hpp"

namespace gslab {

/// Optional bump added to V inside the shrinking core: K_n = amplitude on the
/// ball of radius support_fraction * eps_n around the core center.
struct KSpec {
  double amplitude = 0.0;
  double support_fraction = 1.0;
};

/// One member of a coefficient family: -Laplace u + (V + K) u = Q |u|^{p-2} u.
struct ProblemInstance {
  GridPtr grid;
  ScalarField V;
  ScalarField K;
  ScalarField Q;
  double p = 4.0;
  int n = 1;                     // family label
  std::vector<Point> centers;    // concentration points (1 or 2)
  double core_radius = 0.0;      // radius of the intended positivity region (0 = unknown)
  bool sub_resolution = false;   // positivity region holds no node at this h

  ScalarField Vn() const;
  bool feasible() const;         // Q > 0 at some node
  int positive_node_count() const;
};

std::vector<ProblemInstance> make_family_shrinking_ball(
    const GridPtr& grid, const std::vector<double>& eps_seq, double q_plus, double q_minus,
    const ScalarField& V, const KSpec& k_spec, double p, const Point& center, int first_label = 1);

std::vector<ProblemInstance> make_family_level_shift(
    const GridPtr& grid, const ScalarField& q_profile, const std::vector<double>& lambda_seq,
    const ScalarField& V, double p, const Point& center, int first_label = 1);

std::vector<ProblemInstance> make_two_point_family(
    const GridPtr& grid, const std::vector<double>& eps_seq, double q_plus, double q_minus,
    const ScalarField& V, double p, const Point& x1, const Point& x2,
    std::optional<double> q_plus_second = std::nullopt, int first_label = 1);

/// One probe of the decay hypotheses: the least family label from which Q
/// stays strictly negative outside the eps-ball(s) and K stays supported
/// inside, together with the realized margin delta = min over that tail of
/// (-max Q outside).
struct ProbeRow {
  double eps = 0.0;
  bool satisfied = false;
  int n_threshold = 0;
  double delta = 0.0;
};

struct InstanceRow {
  int n = 0;
  bool v_nonneg = false;
  bool feasible = false;
  bool sub_resolution = false;
  double k_inf = 0.0;
  double q_inf = 0.0;
  double diam_positive = 0.0;  // bounding-box diagonal of {Q > 0}
};

struct AssumptionReport {
  double B = 0.0;  // sup_n ||K_n||_inf
  double C = 0.0;  // sup_n ||Q_n||_inf
  std::vector<ProbeRow> probes;
  std::optional<double> uniform_delta;
  std::optional<double> lambda_out;  // V >= lambda_out outside B_{R_out}(0)
  std::optional<double> R_out;
  double min_eig = 0.0;
  bool min_eig_ok = false;
  std::vector<InstanceRow> instances;
  bool a1_pass = false;
  bool a2_pass = false;
  bool any_unresolved = false;
  double h_max = 0.0;
  double box_radius = 0.0;
};

AssumptionReport validate_assumptions(const std::vector<ProblemInstance>& family,
                                      const std::vector<double>& eps_probes);

}  // namespace gslab
