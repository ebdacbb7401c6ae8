// gslab: ground states of -Laplace u + V_n u = Q_n |u|^{p-2} u with
// sign-indefinite Q_n, plus the concentration diagnostics of the library.
//
// Subcommands: validate, solve, study, spectrum, oracle.  Studies are driven
// by declarative JSON configs; flags only override output dir, seed, jobs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gslab/analysis.hpp"
#include "gslab/field_io.hpp"
#include "gslab/oracle.hpp"
#include "gslab/problem.hpp"
#include "gslab/solver.hpp"
#include "gslab/spectral.hpp"
#include "gslab/study_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // assumption/verdict/solver failure
constexpr int kExitBadInput = 2;  // schema errors, bad indices, missing files

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int jobs = 1;
  int n_index = std::numeric_limits<int>::min();
};

StudyConfig load_config_or_exit(const CommonOpts& opts) {
  StudyConfig cfg = load_study_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.solver.seed = cfg.seed;
  }
  return cfg;
}

const ProblemInstance& pick_instance(const std::vector<ProblemInstance>& family, int n) {
  for (const auto& inst : family) {
    if (inst.n == n) return inst;
  }
  throw std::out_of_range("family has no member n = " + std::to_string(n) + " (labels " +
                          std::to_string(family.front().n) + ".." +
                          std::to_string(family.back().n) + ")");
}

json report_json(const AssumptionReport& rep) {
  json j;
  j["B"] = rep.B;
  j["C"] = rep.C;
  j["min_eig"] = rep.min_eig;
  j["min_eig_converged"] = rep.min_eig_ok;
  j["a1_pass"] = rep.a1_pass;
  j["a2_pass"] = rep.a2_pass;
  j["any_unresolved"] = rep.any_unresolved;
  j["h_max"] = rep.h_max;
  j["box_radius"] = rep.box_radius;
  if (rep.uniform_delta) j["uniform_delta"] = *rep.uniform_delta;
  if (rep.lambda_out) j["lambda"] = *rep.lambda_out;
  if (rep.R_out) j["R"] = *rep.R_out;
  json probes = json::array();
  for (const auto& p : rep.probes) {
    probes.push_back({{"eps", p.eps},
                      {"satisfied", p.satisfied},
                      {"N_eps", p.n_threshold},
                      {"delta", std::isfinite(p.delta) ? json(p.delta) : json("inf")}});
  }
  j["probes"] = probes;
  json instances = json::array();
  for (const auto& r : rep.instances) {
    instances.push_back({{"n", r.n},
                         {"v_nonneg", r.v_nonneg},
                         {"feasible", r.feasible},
                         {"sub_resolution", r.sub_resolution},
                         {"K_inf", r.k_inf},
                         {"Q_inf", r.q_inf},
                         {"diam_positive", r.diam_positive}});
  }
  j["instances"] = instances;
  return j;
}

std::vector<double> default_probes(const std::vector<ProblemInstance>& family) {
  std::vector<double> probes;
  for (const auto& inst : family) {
    if (inst.core_radius > 0.0) probes.push_back(inst.core_radius);
  }
  if (probes.empty()) probes.push_back(family.front().grid->max_spacing() * 4.0);
  return probes;
}

int cmd_validate(const CommonOpts& opts) {
  StudyConfig cfg = load_config_or_exit(opts);
  auto family = build_family(cfg);
  auto probes = cfg.analysis.eps_list.empty() ? default_probes(family) : cfg.analysis.eps_list;
  AssumptionReport rep = validate_assumptions(family, probes);

  std::printf("assumption report: %zu instances, %zu probes\n", rep.instances.size(),
              rep.probes.size());
  std::printf("  B = %.6g   C = %.6g   min_eig = %.8g (%s)\n", rep.B, rep.C, rep.min_eig,
              rep.min_eig_ok ? "converged" : "not converged");
  if (rep.uniform_delta) std::printf("  uniform delta = %.6g\n", *rep.uniform_delta);
  if (rep.lambda_out) std::printf("  V >= %.6g outside B_%.4g(0)\n", *rep.lambda_out, *rep.R_out);
  for (const auto& p : rep.probes) {
    std::printf("  probe eps = %-8.4g  %s  N_eps = %d  delta = %.6g\n", p.eps,
                p.satisfied ? "ok  " : "FAIL", p.n_threshold, p.delta);
  }
  for (const auto& r : rep.instances) {
    std::printf("  n = %-3d V>=0:%d feasible:%d%s ||K||=%.4g ||Q||=%.4g diam{Q>0}=%.4g\n", r.n,
                r.v_nonneg ? 1 : 0, r.feasible ? 1 : 0,
                r.sub_resolution ? " (unresolved at this resolution)" : "", r.k_inf, r.q_inf,
                r.diam_positive);
  }
  std::printf("A1: %s   A2: %s\n", rep.a1_pass ? "pass" : "FAIL", rep.a2_pass ? "pass" : "FAIL");

  fs::create_directories(cfg.output_dir);
  std::ofstream os(fs::path(cfg.output_dir) / "assumptions.json");
  os << report_json(rep).dump(2) << "\n";
  return (rep.a1_pass && rep.a2_pass) ? kExitOk : kExitFailure;
}

int cmd_solve(const CommonOpts& opts) {
  StudyConfig cfg = load_config_or_exit(opts);
  auto family = build_family(cfg);
  const int n = (opts.n_index == std::numeric_limits<int>::min()) ? family.front().n
                                                                  : opts.n_index;
  const ProblemInstance& inst = pick_instance(family, n);
  GroundState gs = solve_ground_state(inst, cfg.solver);

  fs::create_directories(cfg.output_dir);
  const std::string tag = "ground_state_n" + std::to_string(n);
  const fs::path stem = fs::path(cfg.output_dir) / tag;
  save_field(gs.u, stem.string(), "u");
  save_field_csv(gs.u, stem.string() + ".csv", "u");

  json side;
  side["n"] = n;
  side["s"] = gs.s;
  side["residual"] = gs.residual;
  side["alpha_check"] = gs.alpha_check;
  side["norm_u_sq"] = gs.norm_u_sq;
  side["iterations"] = gs.trace.empty() ? 0 : gs.trace.back().iter;
  side["start_label"] = gs.start_label;
  side["config_hash"] = config_hash(cfg);
  json starts = json::array();
  for (const auto& st : gs.starts) {
    starts.push_back({{"label", st.label},
                      {"admissible", st.admissible},
                      {"converged", st.converged},
                      {"s", st.s},
                      {"iterations", st.iterations}});
  }
  side["starts"] = starts;
  std::ofstream os(stem.string() + ".meta.json");
  os << side.dump(2) << "\n";

  std::printf("n = %d: s = %.12g  residual = %.3e  alpha_check = %.3e (rel %.3e)\n", n, gs.s,
              gs.residual, gs.alpha_check, std::fabs(gs.alpha_check) / gs.norm_u_sq);
  std::printf("winning start: %s; artifacts under %s\n", gs.start_label.c_str(),
              cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_study(const CommonOpts& opts) {
  StudyConfig cfg = load_config_or_exit(opts);
  auto family = build_family(cfg);
  StudyOptions sopts = study_options_from(cfg);
  ConcentrationReport rep = run_concentration_study(family, cfg.solver, sopts, opts.jobs);

  fs::create_directories(cfg.output_dir);
  {
    std::ofstream csv(fs::path(cfg.output_dir) / "report.csv");
    write_report_csv(rep, csv);
  }
  {
    std::ofstream vs(fs::path(cfg.output_dir) / "verdicts.json");
    vs << verdicts_json(rep) << "\n";
  }
  int failures = 0;
  for (const auto& row : rep.rows) {
    std::printf("n = %-3d %-16s", row.n, row.status.c_str());
    if (row.solved) {
      std::printf(" s = %-12.6g ||u||_n = %-12.6g residual = %.2e start = %s", row.s, row.norm_n,
                  row.residual, row.start_label.c_str());
    } else {
      ++failures;
    }
    std::printf("\n");
  }
  const bool pass = rep.verdicts.all_pass();
  std::printf("verdicts: %s (details in verdicts.json)\n", pass ? "all pass" : "FAIL");
  return pass && failures == 0 ? kExitOk : kExitFailure;
}

int cmd_spectrum(const CommonOpts& opts) {
  StudyConfig cfg = load_config_or_exit(opts);
  auto family = build_family(cfg);
  const SpectralResult spec = smallest_eigenvalue(family.front().V);
  std::printf("min_eig(-Laplace_h + V) = %.10g  residual = %.2e  %s (%d iterations, %s)\n",
              spec.min_eig, spec.residual, spec.converged ? "converged" : "NOT converged",
              spec.iterations, spec.method.c_str());
  for (const auto& inst : family) {
    if (opts.n_index != std::numeric_limits<int>::min() && inst.n != opts.n_index) continue;
    const NormEquivalence ne = norm_equivalence_bounds(inst.V, inst.K);
    std::printf("n = %-3d c1 = %.8g  c2 = %.8g%s\n", inst.n, ne.c1, ne.c2,
                ne.valid ? "" : "  (degenerate: c1 = 0)");
  }
  return spec.converged && spec.min_eig > 0.0 ? kExitOk : kExitFailure;
}

int cmd_oracle(const CommonOpts& opts) {
  StudyConfig cfg = load_config_or_exit(opts);
  const int first = cfg.family.first_n;
  const int n = (opts.n_index == std::numeric_limits<int>::min()) ? first : opts.n_index;
  if (n < first) throw std::out_of_range("family member label below first_n");
  const std::size_t index = static_cast<std::size_t>(n - first);
  Coefficients1D coeffs = continuum_coefficients_1d(cfg, index);
  const auto bracket = find_shooting_bracket(coeffs, 0.05, 1.3, 80, 1e-4);
  const ShootingResult sh = shoot_1d(coeffs, bracket, 1e-4);
  std::printf("n = %d: u0 = %.12g  s* = %.12g  boundary mismatch = %.3e (%d bisection steps)\n",
              n, sh.u0, sh.s_value, sh.match_norm, sh.bisection_steps);

  fs::create_directories(cfg.output_dir);
  GridPtr grid = build_grid_from(cfg.grid);
  ScalarField u = sample_profile(sh, grid);
  const fs::path stem = fs::path(cfg.output_dir) / ("oracle_n" + std::to_string(n));
  save_field(u, stem.string(), "oracle_u");
  json side;
  side["provenance"] = "oracle";
  side["n"] = n;
  side["u0"] = sh.u0;
  side["s_value"] = sh.s_value;
  side["match_norm"] = sh.match_norm;
  side["config_hash"] = config_hash(cfg);
  std::ofstream os(stem.string() + ".meta.json");
  os << side.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground-state laboratory for sign-indefinite semilinear problems"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&opts](CLI::App* sub, bool with_n) {
    sub->add_option("--config", opts.config_path, "study config (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "override the config output directory");
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--jobs", opts.jobs, "parallel study rows");
    if (with_n) sub->add_option("--n", opts.n_index, "family member label");
  };

  CLI::App* validate = app.add_subcommand("validate", "check (A1)-(A4) on the family");
  add_common(validate, false);
  CLI::App* solve = app.add_subcommand("solve", "compute one ground state");
  add_common(solve, true);
  CLI::App* study = app.add_subcommand("study", "run the full concentration study");
  add_common(study, false);
  CLI::App* spectrum = app.add_subcommand("spectrum", "print min_eig and (c1, c2)");
  add_common(spectrum, true);
  CLI::App* oracle = app.add_subcommand("oracle", "run the 1D shooting oracle");
  add_common(oracle, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (solve->parsed()) return cmd_solve(opts);
    if (study->parsed()) return cmd_study(opts);
    if (spectrum->parsed()) return cmd_spectrum(opts);
    if (oracle->parsed()) return cmd_oracle(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const NoAdmissibleStartError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitBadInput;
}
