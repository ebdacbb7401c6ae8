#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gslab/problem.hpp"

namespace gslab {

/// Projected-gradient settings: Barzilai-Borwein trial steps, Armijo
/// backtracking, and the exact retraction v <- v / J_n(v)^{1/p}.
struct SolverConfig {
  int max_iter = 20000;
  double grad_tol = 1e-6;     // relative projected-gradient norm
  double energy_tol = 1e-12;  // relative energy decrease
  double armijo = 1e-4;
  double backtrack_shrink = 0.5;
  int max_backtracks = 60;
  bool abs_retraction = true;  // replace the iterate by its absolute value
  std::vector<std::string> multistart = {"bump", "symmetric", "random"};
  std::uint64_t seed = 1;
  double residual_tol = 1e-3;  // PDE residual accepted as "solved"
};

struct IterRecord {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct StartOutcome {
  std::string label;
  bool admissible = false;
  bool converged = false;
  double s = 0.0;
  int iterations = 0;
};

struct MinimizeResult {
  std::vector<double> v;  // J_n(v) = 1
  double s = 0.0;         // ||v||_n^2
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<IterRecord> trace;
};

struct GroundState {
  std::shared_ptr<const ProblemInstance> instance;
  ScalarField v;              // normalized minimizer, J_n(v) = 1
  double s = 0.0;             // Rayleigh value ||v||_n^2
  ScalarField u;              // rescaled PDE solution u = s^{1/(p-2)} v
  double residual = 0.0;      // relative discrete PDE residual at u
  double alpha_check = 0.0;   // ||u||_n^2 - integral(Q |u|^p), should vanish
  double norm_u_sq = 0.0;     // ||u||_n^2 (denominator for alpha_check)
  bool converged = false;
  std::string start_label;
  std::vector<StartOutcome> starts;
  std::vector<IterRecord> trace;  // winning run
};

/// J_n(v) = integral of Q_n |v|^p.
double J_n(const ProblemInstance& inst, const ScalarField& v);

/// ||v||_n^2 / J_n(v)^{2/p}; throws on J_n(v) <= 0 (inadmissible direction).
double rayleigh(const ProblemInstance& inst, const ScalarField& v);

/// Minimizes ||v||_n^2 over {J_n = 1} from v0.  An inadmissible v0 is retried
/// restricted to the positivity set of Q_n before giving up.
MinimizeResult minimize_rayleigh(const ProblemInstance& inst, const SolverConfig& cfg,
                                 const ScalarField& v0);

/// u = s^{1/(p-2)} v; the multiplier algebra behind it is validated by the
/// residual check, not assumed.
ScalarField rescale_to_solution(const ProblemInstance& inst, const ScalarField& v, double s);

/// ||A u - Q_n |u|^{p-2} u||_2 / max(||A u||_2, floor), A = -Laplace + V_n.
double residual_norm(const ProblemInstance& inst, const ScalarField& u);

/// Multistart minimization (per-center bumps, symmetric sum, random starts);
/// keeps the run with the smallest s, ties broken toward the earlier start.
GroundState solve_ground_state(const ProblemInstance& inst, const SolverConfig& cfg);

/// Largest measured |v|_p / ||v||_n: random probes refined by running the
/// quotient minimization with Q == 1, whose value bounds the ratio sharply.
double measure_sobolev_constant(const ProblemInstance& inst, const SolverConfig& cfg,
                                int random_trials, std::uint64_t seed);

}  // namespace gslab
