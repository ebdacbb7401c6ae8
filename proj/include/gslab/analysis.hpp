#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gslab/solver.hpp"

namespace gslab {

struct EpsRatioRow {
  double eps = 0.0;
  double h1_ratio = 0.0;  // exterior-to-total H^1 energy
  double lp_ratio = 0.0;  // exterior-to-total L^p mass
  bool core_empty = false;  // the excluded ball holds no node at this h
};

/// Exterior-to-total ratios around the instance's concentration point(s).
std::vector<EpsRatioRow> h1_lp_ratios(const GroundState& gs, const std::vector<double>& eps_list);

struct TailRow {
  double q = 0.0;  // infinity allowed
  double eps = 0.0;
  double tail = 0.0;   // |u|_{q, complement of the eps-ball union}
  double total = 0.0;  // |u|_q
  double ratio = 0.0;  // tail / total
};

/// Exponent thresholds for dimension N and growth p.  two_star and lower_exp
/// are +infinity for N < 3 where the embeddings impose no ceiling.
struct LqThresholds {
  double q_star = 0.0;    // N (p - 2) / 2
  double two_star = 0.0;  // 2N / (N - 2)
  double lower_exp = 0.0; // (2N - 2) / (N - 2)
  bool uniform_vanishing_range = false;  // p in [lower_exp, two_star), N >= 3
};
LqThresholds lq_thresholds(int N, double p);

/// Tail scan over (q, eps); q_star is inserted automatically.
std::vector<TailRow> lq_tail_scan(const GroundState& gs, std::vector<double> q_list,
                                  const std::vector<double>& eps_list);

struct DecayCheck {
  double margin = 0.0;         // min over |x| > R of envelope - |u|
  double bound_M = 0.0;        // max |u| over the anchor shell [R, R + h]
  double anchor_radius = 0.0;  // radius where the shell maximum is attained
  double alpha = 0.0;          // sqrt(lambda)
  int tail_nodes = 0;
};

/// Envelope check of |u| <= M exp(-(1 - slack) alpha (|x| - anchor)) outside
/// B_R(0), with M sampled on the first node shell past R and the envelope
/// anchored where that maximum is attained (the discrete stand-in for the
/// sphere |x| = R).
DecayCheck decay_envelope_check(const GroundState& gs, double R, double lambda, double rate_slack);

struct SingularSolution {
  double c_p = 0.0;
  double beta = 0.0;         // 2 / (p - 2)
  bool sign_flipped = false; // w solves the equation with -delta instead
};

/// The constant making w = c_p |x|^{-2/(p-2)} solve -Laplace w = -delta w^{p-1}
/// away from the origin (N >= 3).  For p above (2N-2)/(N-2) the sign-flipped
/// regime is reported rather than rejected.
SingularSolution singular_constant(int N, double p, double delta);

/// Pointwise residual of the singular solution at radius r, using the closed
/// form of the radial Laplacian of r^{-beta}.
double singular_ode_residual(int N, double p, double delta, const SingularSolution& sol, double r);

struct MassSplit {
  double m1 = 0.0;  // H^1 energy fraction in B_eps(x1)
  double m2 = 0.0;
  int selected = 0;  // 1 or 2; 0 on a tie
  double j_tail1 = 0.0;  // J_n mass outside B_eps(x1), over total J_n mass
  double j_tail2 = 0.0;
};

MassSplit two_point_mass_split(const GroundState& gs, double eps);

struct StudyOptions {
  std::vector<double> eps_list;  // empty: geometric from the first core radius, floored at 3h
  std::vector<double> q_list = {2.0};
  double rate_slack = 0.1;
  std::optional<std::pair<double, double>> decay_R_lambda;  // (R, lambda)
  double qstar_lower_factor = 0.5;  // total_{q*}(n) >= factor * total_{q*}(first n)
  double mass_threshold = 0.9;      // single-point verdict at the largest n
};

struct StudyVerdicts {
  bool insufficient_n = false;
  bool norm_increasing = false;
  bool h1_decreasing = false;
  bool lp_decreasing = false;
  std::map<double, bool> totalq_increasing;  // per q > q_star
  bool qstar_bounded_below = false;
  bool single_point = false;
  bool single_point_applicable = false;
  bool decay_ok = false;
  bool decay_applicable = false;
  bool all_solved = false;
  bool all_pass() const;
};

struct InstanceDiag {
  int n = 0;
  std::string status;  // "ok", "infeasible", "sub_resolution", or an error note
  bool solved = false;
  double s = 0.0;
  double norm_n = 0.0;
  double w_norm_check = 0.0;  // ||u / ||u||_n||_n, identically 1 up to rounding
  double residual = 0.0;
  double alpha_check = 0.0;
  std::string start_label;
  std::vector<EpsRatioRow> ratios;
  std::vector<TailRow> tails;
  std::optional<DecayCheck> decay;
  std::vector<std::pair<double, MassSplit>> mass;  // per eps, two-point instances
};

struct ConcentrationReport {
  LqThresholds thresholds;
  std::vector<double> eps_list;
  std::vector<double> q_list;  // with q_star inserted
  std::vector<InstanceDiag> rows;
  StudyVerdicts verdicts;
  std::vector<std::optional<GroundState>> states;  // aligned with rows
};

/// Solves each family member and assembles every diagnostic plus the trend
/// verdicts.  Partial failures mark their row and leave the rest intact.
ConcentrationReport run_concentration_study(const std::vector<ProblemInstance>& family,
                                            const SolverConfig& solver_cfg,
                                            const StudyOptions& opts, int jobs = 1);

/// CSV with exactly the columns
/// n,eps,q,h1_ratio,lp_ratio,tail_q,total_q,norm_n,m1,m2,selected,margin —
/// one row per (n, eps, q), nan-filled for unsolved rows.
void write_report_csv(const ConcentrationReport& report, std::ostream& os);

std::string verdicts_json(const ConcentrationReport& report);

}  // namespace gslab
