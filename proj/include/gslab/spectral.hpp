#pragma once

#include <string>

#include "gslab/field.hpp"

namespace gslab {

struct SpectralResult {
  double min_eig = 0.0;
  ScalarField eigvec;
  int iterations = 0;
  double residual = 0.0;  // ||A v - min_eig v||_2 with ||v||_2 = 1
  bool converged = false;
  std::string method;
};

/// Smallest eigenpair of A = -Laplace_h + V.  Inverse iteration with
/// conjugate-gradient inner solves while A is positive definite; a CG
/// breakdown (indefinite A) switches to a shifted Lanczos sweep.
SpectralResult smallest_eigenvalue(const ScalarField& V, double tol = 1e-10, int max_iter = 400);

struct NormEquivalence {
  double c1 = 0.0;
  double c2 = 0.0;
  bool valid = false;  // false when the crude bound degenerates (c1 == 0)
  double min_eig = 0.0;
};

/// Certified constants with c1 ||u|| <= ||u||_n <= c2 ||u|| for all discrete u,
/// from min_eig(-Laplace_h + V) and the sup norms of the positive/negative
/// parts of K_n:  c1 = sqrt(max(0, 1 - ||K^-||_inf / min_eig)),
/// c2 = sqrt(1 + ||K^+||_inf / min_eig).
NormEquivalence norm_equivalence_bounds(const ScalarField& V, const ScalarField& K_n);

}  // namespace gslab
