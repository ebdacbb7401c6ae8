#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gslab/field.hpp"
#include "gslab/problem.hpp"

namespace gslab {

/// Continuum description of a 1D even-symmetric instance on (-L, L); kept
/// independent of any grid so the shooting solver cross-checks the mesh path
/// rather than re-deriving from it.  Breakpoints list the radii where V or Q
/// jump, so integration steps land on them exactly.
struct Coefficients1D {
  std::function<double(double)> V;
  std::function<double(double)> Q;
  double p = 4.0;
  double half_width = 1.0;
  std::vector<double> breakpoints;
};

struct ShootingResult {
  double u0 = 0.0;               // center value of the even profile
  std::vector<double> xs;        // sample abscissas on [0, L]
  std::vector<double> us;        // u samples
  std::vector<double> dus;       // u' samples
  double s_value = 0.0;          // Rayleigh value of the profile
  double match_norm = 0.0;       // |u(L)| achieved by the bisection
  int bisection_steps = 0;
  bool capped = false;           // some trial integration hit the blow-up cap
};

/// Shoots the even solution u'(0) = 0 of -u'' + V u = Q |u|^{p-2} u from
/// u(0) = u0, bisecting u0 over the bracket until the boundary mismatch
/// u(L; u0) drops below 1e-10.  Classical 4th-order integration at rk_step.
ShootingResult shoot_1d(const Coefficients1D& coeffs, std::pair<double, double> u0_bracket,
                        double rk_step);

/// Scans u0 upward from u0_start by the given factor until the boundary
/// mismatch changes sign; returns a bracket for shoot_1d.
std::pair<double, double> find_shooting_bracket(const Coefficients1D& coeffs, double u0_start,
                                                double factor, int max_steps, double rk_step);

/// Evaluates the even profile at x by cubic Hermite interpolation.
double eval_profile(const ShootingResult& profile, double x);

/// Samples the profile onto a 1D grid.
ScalarField sample_profile(const ShootingResult& profile, const GridPtr& grid);

/// Eigenvalues of a dense symmetric matrix (row-major, n x n) by cyclic
/// Jacobi rotations, ascending.  In-repo so the oracle does not share code
/// with the iterative path it certifies.
std::vector<double> dense_sym_eigenvalues(std::vector<double> a, int n);

/// Dense operator matrix of -Laplace_h + V (row-major).
std::vector<double> dense_operator_matrix(const ScalarField& V);

/// Smallest eigenvalue of -Laplace_h + V by the dense route; grids of at most
/// 200 nodes.
double dense_min_eig(const ScalarField& V);

/// Max over random unit perturbations delta of
/// rayleigh(v_star) - rayleigh(v_star + t delta); below grad_tol * t at a
/// first-order local minimizer.  Directions that leave the admissible cone
/// J_n > 0 are skipped.
double minimality_probe(const ProblemInstance& inst, const ScalarField& v_star, int trials,
                        double t, std::uint64_t seed = 12345);

}  // namespace gslab
