#include "gslab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "gslab/mesh_ops.hpp"

namespace gslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Masked H^1 energy from a precomputed gradient density.
double masked_energy(const ScalarField& density, const ScalarField& vn, const ScalarField& u,
                     const RegionMask& mask) {
  const double vol = u.grid->cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (mask.member[i]) {
      s += density.values[i] + vn.values[i] * u.values[i] * u.values[i] * vol;
    }
  }
  return s;
}

double masked_lp_mass(const ScalarField& u, double p, const RegionMask& mask) {
  const double vol = u.grid->cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (mask.member[i]) s += std::pow(std::fabs(u.values[i]), p);
  }
  return s * vol;
}

}  // namespace

std::vector<EpsRatioRow> h1_lp_ratios(const GroundState& gs, const std::vector<double>& eps_list) {
  const ProblemInstance& inst = *gs.instance;
  const ScalarField vn = inst.Vn();
  const ScalarField density = grad_energy_density(gs.u);
  const RegionMask full = RegionMask::full(inst.grid);
  const double den_h1 = masked_energy(density, vn, gs.u, full);
  const double den_lp = masked_lp_mass(gs.u, inst.p, full);
  std::vector<EpsRatioRow> out;
  out.reserve(eps_list.size());
  for (double eps : eps_list) {
    const RegionMask core = ball_union_mask(inst.grid, inst.centers, eps, false);
    const RegionMask outside = core.complement();
    EpsRatioRow row;
    row.eps = eps;
    row.core_empty = core.count() == 0;
    row.h1_ratio = den_h1 > 0.0 ? masked_energy(density, vn, gs.u, outside) / den_h1 : 0.0;
    row.lp_ratio = den_lp > 0.0 ? masked_lp_mass(gs.u, inst.p, outside) / den_lp : 0.0;
    out.push_back(row);
  }
  return out;
}

LqThresholds lq_thresholds(int N, double p) {
  if (N < 1 || !(p > 2.0)) {
    throw std::invalid_argument("lq_thresholds: need N >= 1 and p > 2");
  }
  LqThresholds t;
  t.q_star = static_cast<double>(N) * (p - 2.0) / 2.0;
  if (N >= 3) {
    t.two_star = 2.0 * N / (N - 2.0);
    t.lower_exp = (2.0 * N - 2.0) / (N - 2.0);
    t.uniform_vanishing_range = p >= t.lower_exp && p < t.two_star;
  } else {
    t.two_star = kInf;
    t.lower_exp = kInf;
    t.uniform_vanishing_range = false;
  }
  return t;
}

std::vector<TailRow> lq_tail_scan(const GroundState& gs, std::vector<double> q_list,
                                  const std::vector<double>& eps_list) {
  const ProblemInstance& inst = *gs.instance;
  const LqThresholds t = lq_thresholds(inst.grid->dim, inst.p);
  bool has_qstar = false;
  for (double q : q_list) {
    if (q == t.q_star) has_qstar = true;
    if (!std::isinf(q) && !(q >= 1.0)) {
      throw std::invalid_argument("lq_tail_scan: q must be >= 1 or infinity");
    }
  }
  if (!has_qstar && t.q_star >= 1.0) q_list.push_back(t.q_star);
  std::sort(q_list.begin(), q_list.end());

  std::vector<TailRow> out;
  const RegionMask full = RegionMask::full(inst.grid);
  for (double q : q_list) {
    const double total = lq_norm(gs.u, q, full);
    for (double eps : eps_list) {
      const RegionMask outside = ball_union_mask(inst.grid, inst.centers, eps, true);
      TailRow row;
      row.q = q;
      row.eps = eps;
      row.total = total;
      row.tail = lq_norm(gs.u, q, outside);
      row.ratio = total > 0.0 ? row.tail / total : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

DecayCheck decay_envelope_check(const GroundState& gs, double R, double lambda,
                                double rate_slack) {
  const ProblemInstance& inst = *gs.instance;
  const Grid& g = *inst.grid;
  if (!g.truncated_unbounded) {
    throw std::invalid_argument(
        "decay_envelope_check: grid does not truncate an unbounded domain");
  }
  if (!(lambda > 0.0) || !(R > 0.0)) {
    throw std::invalid_argument("decay_envelope_check: need R > 0 and lambda > 0");
  }
  if (!(rate_slack >= 0.0) || rate_slack >= 1.0) {
    throw std::invalid_argument("decay_envelope_check: rate_slack must lie in [0, 1)");
  }
  const Point origin{0.0, 0.0};
  // The hypothesis V >= lambda outside B_R(0) is checked directly.
  for (int i = 0; i < g.node_count(); ++i) {
    const double r = euclid_dist(g.node(i), origin, g.dim);
    if (r > R && inst.V.values[static_cast<std::size_t>(i)] < lambda - 1e-12) {
      throw std::invalid_argument("decay_envelope_check: V < lambda at |x| = " + fmt(r));
    }
  }

  DecayCheck out;
  out.alpha = std::sqrt(lambda);
  const double shell_hi = R + g.max_spacing();
  double m = -1.0;
  double anchor = R;
  double nearest_r = kInf;
  int nearest_idx = -1;
  int tail_nodes = 0;
  for (int i = 0; i < g.node_count(); ++i) {
    const double r = euclid_dist(g.node(i), origin, g.dim);
    if (r <= R) continue;
    ++tail_nodes;
    if (r < nearest_r) {
      nearest_r = r;
      nearest_idx = i;
    }
    if (r <= shell_hi) {
      const double a = std::fabs(gs.u.values[static_cast<std::size_t>(i)]);
      if (a > m) {
        m = a;
        anchor = r;
      }
    }
  }
  if (tail_nodes == 0) {
    throw std::invalid_argument("decay_envelope_check: no nodes beyond |x| = " + fmt(R));
  }
  if (m < 0.0) {  // empty shell; anchor on the nearest exterior node
    m = std::fabs(gs.u.values[static_cast<std::size_t>(nearest_idx)]);
    anchor = nearest_r;
  }
  out.bound_M = m;
  out.anchor_radius = anchor;
  out.tail_nodes = tail_nodes;
  const double rate = (1.0 - rate_slack) * out.alpha;
  double margin = kInf;
  for (int i = 0; i < g.node_count(); ++i) {
    const double r = euclid_dist(g.node(i), origin, g.dim);
    if (r <= R) continue;
    const double envelope = m * std::exp(-rate * std::max(0.0, r - anchor));
    margin = std::min(margin, envelope - std::fabs(gs.u.values[static_cast<std::size_t>(i)]));
  }
  out.margin = margin;
  return out;
}

SingularSolution singular_constant(int N, double p, double delta) {
  if (N < 3) throw std::invalid_argument("singular_constant: requires N >= 3");
  if (!(p > 2.0)) throw std::invalid_argument("singular_constant: requires p > 2");
  if (!(delta > 0.0)) throw std::invalid_argument("singular_constant: requires delta > 0");
  SingularSolution sol;
  sol.beta = 2.0 / (p - 2.0);
  const double coef = sol.beta * (sol.beta + 2.0 - static_cast<double>(N));
  if (coef == 0.0) {
    throw std::invalid_argument("singular_constant: degenerate exponent p = (2N-2)/(N-2)");
  }
  sol.sign_flipped = coef < 0.0;
  sol.c_p = std::pow(std::fabs(coef) / delta, 1.0 / (p - 2.0));
  return sol;
}

double singular_ode_residual(int N, double p, double delta, const SingularSolution& sol,
                             double r) {
  if (!(r > 0.0)) throw std::invalid_argument("singular_ode_residual: r must be positive");
  const double beta = sol.beta;
  const double w = sol.c_p * std::pow(r, -beta);
  // Radial Laplacian of r^{-beta}: beta (beta + 2 - N) r^{-beta-2}.
  const double lap = sol.c_p * beta * (beta + 2.0 - static_cast<double>(N)) *
                     std::pow(r, -beta - 2.0);
  const double delta_eff = sol.sign_flipped ? -delta : delta;
  return std::fabs(-lap + delta_eff * std::pow(w, p - 1.0));
}

MassSplit two_point_mass_split(const GroundState& gs, double eps) {
  const ProblemInstance& inst = *gs.instance;
  if (inst.centers.size() != 2) {
    throw std::invalid_argument("two_point_mass_split: instance has " +
                                std::to_string(inst.centers.size()) + " centers, needs 2");
  }
  const double sep = euclid_dist(inst.centers[0], inst.centers[1], inst.grid->dim);
  if (!(sep > 2.0 * eps)) {
    throw std::invalid_argument("two_point_mass_split: the eps-balls overlap (eps = " + fmt(eps) +
                                ", separation = " + fmt(sep) + ")");
  }
  const ScalarField vn = inst.Vn();
  const ScalarField density = grad_energy_density(gs.u);
  const RegionMask full = RegionMask::full(inst.grid);
  const RegionMask ball1 = ball_mask(inst.grid, inst.centers[0], eps, false);
  const RegionMask ball2 = ball_mask(inst.grid, inst.centers[1], eps, false);
  const double total = masked_energy(density, vn, gs.u, full);
  MassSplit out;
  out.m1 = total > 0.0 ? masked_energy(density, vn, gs.u, ball1) / total : 0.0;
  out.m2 = total > 0.0 ? masked_energy(density, vn, gs.u, ball2) / total : 0.0;
  if (std::fabs(out.m1 - out.m2) > 1e-12) {
    out.selected = out.m1 > out.m2 ? 1 : 2;
  }
  // J_n split of the solution identity mass:
  // integral over the complement of B_eps(x_j) of Q |u|^p, over the total.
  const double vol = inst.grid->cell_volume();
  double j_total = 0.0, j_in1 = 0.0, j_in2 = 0.0;
  for (std::size_t i = 0; i < gs.u.values.size(); ++i) {
    const double m = inst.Q.values[i] * std::pow(std::fabs(gs.u.values[i]), inst.p) * vol;
    j_total += m;
    if (ball1.member[i]) j_in1 += m;
    if (ball2.member[i]) j_in2 += m;
  }
  if (j_total != 0.0) {
    out.j_tail1 = (j_total - j_in1) / j_total;
    out.j_tail2 = (j_total - j_in2) / j_total;
  }
  return out;
}

bool StudyVerdicts::all_pass() const {
  if (insufficient_n || !all_solved) return false;
  bool ok = norm_increasing && h1_decreasing && lp_decreasing && qstar_bounded_below;
  for (const auto& [q, v] : totalq_increasing) ok = ok && v;
  if (single_point_applicable) ok = ok && single_point;
  if (decay_applicable) ok = ok && decay_ok;
  return ok;
}

ConcentrationReport run_concentration_study(const std::vector<ProblemInstance>& family,
                                            const SolverConfig& solver_cfg,
                                            const StudyOptions& opts, int jobs) {
  if (family.empty()) throw std::invalid_argument("run_concentration_study: empty family");
  const GridPtr grid = family.front().grid;
  ConcentrationReport rep;
  rep.thresholds = lq_thresholds(grid->dim, family.front().p);

  rep.eps_list = opts.eps_list;
  if (rep.eps_list.empty()) {
    // Geometric defaults from the first core radius, floored at 3h.
    const double floor_eps = 3.0 * grid->max_spacing();
    double eps = family.front().core_radius > 0.0 ? family.front().core_radius
                                                  : grid->min_boundary_distance(
                                                        family.front().centers.front()) / 2.0;
    for (int k = 0; k < 6 && eps > floor_eps; ++k, eps *= 0.5) {
      rep.eps_list.push_back(eps);
    }
    if (rep.eps_list.empty()) rep.eps_list.push_back(std::max(eps, floor_eps));
  }
  rep.q_list = opts.q_list;
  if (rep.thresholds.q_star >= 1.0 &&
      std::find(rep.q_list.begin(), rep.q_list.end(), rep.thresholds.q_star) ==
          rep.q_list.end()) {
    rep.q_list.push_back(rep.thresholds.q_star);
  }
  std::sort(rep.q_list.begin(), rep.q_list.end());

  rep.rows.resize(family.size());
  rep.states.resize(family.size());

  // Rows solve independently; assembly below is ordered by family index.
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= family.size()) return;
      const ProblemInstance& inst = family[k];
      InstanceDiag diag;
      diag.n = inst.n;
      if (!inst.feasible()) {
        diag.status = inst.sub_resolution ? "sub_resolution" : "infeasible";
        rep.rows[k] = std::move(diag);
        continue;
      }
      try {
        GroundState gs = solve_ground_state(inst, solver_cfg);
        diag.status = "ok";
        diag.solved = true;
        diag.s = gs.s;
        const ScalarField vn = inst.Vn();
        diag.norm_n = norm_n(gs.u, vn);
        ScalarField w = gs.u;
        for (double& x : w.values) x /= diag.norm_n;
        diag.w_norm_check = norm_n(w, vn);
        diag.residual = gs.residual;
        diag.alpha_check = gs.alpha_check;
        diag.start_label = gs.start_label;
        diag.ratios = h1_lp_ratios(gs, rep.eps_list);
        diag.tails = lq_tail_scan(gs, rep.q_list, rep.eps_list);
        if (opts.decay_R_lambda) {
          diag.decay = decay_envelope_check(gs, opts.decay_R_lambda->first,
                                            opts.decay_R_lambda->second, opts.rate_slack);
        }
        if (inst.centers.size() == 2) {
          for (double eps : rep.eps_list) {
            const double sep = euclid_dist(inst.centers[0], inst.centers[1], grid->dim);
            if (sep > 2.0 * eps) {
              diag.mass.emplace_back(eps, two_point_mass_split(gs, eps));
            }
          }
        }
        rep.states[k] = std::move(gs);
      } catch (const std::exception& e) {
        diag.status = std::string("error: ") + e.what();
      }
      rep.rows[k] = std::move(diag);
    }
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(family.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Trend verdicts over the solved rows, ordered by n.
  StudyVerdicts& v = rep.verdicts;
  std::vector<const InstanceDiag*> solved;
  for (const auto& row : rep.rows) {
    if (row.solved) solved.push_back(&row);
  }
  v.all_solved = solved.size() == rep.rows.size();
  if (solved.size() < 2) {
    v.insufficient_n = true;
    return rep;
  }
  v.norm_increasing = true;
  for (std::size_t k = 1; k < solved.size(); ++k) {
    v.norm_increasing = v.norm_increasing && solved[k]->norm_n > solved[k - 1]->norm_n;
  }
  v.h1_decreasing = true;
  v.lp_decreasing = true;
  for (std::size_t e = 0; e < rep.eps_list.size(); ++e) {
    for (std::size_t k = 1; k < solved.size(); ++k) {
      if (solved[k]->ratios[e].core_empty || solved[k - 1]->ratios[e].core_empty) continue;
      v.h1_decreasing =
          v.h1_decreasing && solved[k]->ratios[e].h1_ratio < solved[k - 1]->ratios[e].h1_ratio;
      v.lp_decreasing =
          v.lp_decreasing && solved[k]->ratios[e].lp_ratio < solved[k - 1]->ratios[e].lp_ratio;
    }
  }
  auto total_of = [&](const InstanceDiag* d, double q) {
    for (const auto& row : d->tails) {
      if (row.q == q) return row.total;
    }
    return 0.0;
  };
  for (double q : rep.q_list) {
    if (q <= rep.thresholds.q_star) continue;
    bool inc = true;
    for (std::size_t k = 1; k < solved.size(); ++k) {
      inc = inc && total_of(solved[k], q) > total_of(solved[k - 1], q);
    }
    v.totalq_increasing[q] = inc;
  }
  if (rep.thresholds.q_star >= 1.0) {
    const double base = total_of(solved.front(), rep.thresholds.q_star);
    v.qstar_bounded_below = true;
    for (const auto* d : solved) {
      v.qstar_bounded_below = v.qstar_bounded_below &&
                              total_of(d, rep.thresholds.q_star) >= opts.qstar_lower_factor * base;
    }
  } else {
    v.qstar_bounded_below = true;  // no q* >= 1 to track
  }
  v.single_point_applicable = family.front().centers.size() == 2;
  if (v.single_point_applicable && !solved.empty() && !solved.back()->mass.empty()) {
    const MassSplit& m = solved.back()->mass.front().second;
    v.single_point = std::max(m.m1, m.m2) >= opts.mass_threshold && m.selected != 0;
  }
  v.decay_applicable = opts.decay_R_lambda.has_value();
  if (v.decay_applicable) {
    v.decay_ok = true;
    for (const auto* d : solved) {
      v.decay_ok = v.decay_ok && d->decay && d->decay->margin >= 0.0;
    }
  }
  return rep;
}

void write_report_csv(const ConcentrationReport& rep, std::ostream& os) {
  os << "n,eps,q,h1_ratio,lp_ratio,tail_q,total_q,norm_n,m1,m2,selected,margin\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rep.rows) {
    for (std::size_t e = 0; e < rep.eps_list.size(); ++e) {
      for (double q : rep.q_list) {
        double h1 = nan, lp = nan, tail = nan, total = nan, m1 = nan, m2 = nan, margin = nan;
        int selected = 0;
        if (row.solved) {
          h1 = row.ratios[e].h1_ratio;
          lp = row.ratios[e].lp_ratio;
          for (const auto& t : row.tails) {
            if (t.q == q && t.eps == rep.eps_list[e]) {
              tail = t.tail;
              total = t.total;
            }
          }
          for (const auto& [meps, split] : row.mass) {
            if (meps == rep.eps_list[e]) {
              m1 = split.m1;
              m2 = split.m2;
              selected = split.selected;
            }
          }
          if (row.decay) margin = row.decay->margin;
        }
        os << row.n << ',' << fmt(rep.eps_list[e]) << ',' << fmt(q) << ',' << fmt(h1) << ','
           << fmt(lp) << ',' << fmt(tail) << ',' << fmt(total) << ','
           << fmt(row.solved ? row.norm_n : nan) << ',' << fmt(m1) << ',' << fmt(m2) << ','
           << selected << ',' << fmt(margin) << '\n';
      }
    }
  }
}

std::string verdicts_json(const ConcentrationReport& rep) {
  nlohmann::json j;
  const StudyVerdicts& v = rep.verdicts;
  j["insufficient_n"] = v.insufficient_n;
  j["all_solved"] = v.all_solved;
  j["norm_increasing"] = v.norm_increasing;
  j["h1_ratios_decreasing"] = v.h1_decreasing;
  j["lp_ratios_decreasing"] = v.lp_decreasing;
  nlohmann::json tq = nlohmann::json::object();
  for (const auto& [q, ok] : v.totalq_increasing) tq[fmt(q)] = ok;
  j["totalq_increasing"] = tq;
  j["qstar_bounded_below"] = v.qstar_bounded_below;
  j["q_star"] = rep.thresholds.q_star;
  if (v.single_point_applicable) j["single_point_concentration"] = v.single_point;
  if (v.decay_applicable) j["decay_margins_nonnegative"] = v.decay_ok;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    nlohmann::json r;
    r["n"] = row.n;
    r["status"] = row.status;
    if (row.solved) {
      r["s"] = row.s;
      r["norm_n"] = row.norm_n;
      r["residual"] = row.residual;
      r["alpha_check"] = row.alpha_check;
      r["start"] = row.start_label;
    }
    rows.push_back(r);
  }
  j["instances"] = rows;
  j["all_pass"] = v.all_pass();
  return j.dump(2);
}

}  // namespace gslab
