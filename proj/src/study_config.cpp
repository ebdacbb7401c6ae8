#include "gslab/study_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gslab/field_io.hpp"

namespace gslab {

using nlohmann::json;

namespace {

std::vector<double> parse_sequence(const json& j, const char* what, bool gaps_from = false,
                                   double peak = 0.0) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_number()) throw ConfigError(std::string(what) + ": sequence entries must be numbers");
      out.push_back(x.get<double>());
    }
  } else if (j.is_object()) {
    if (!j.contains("start") || !j.contains("ratio") || !j.contains("count")) {
      throw ConfigError(std::string(what) + ": geometric descriptor needs start, ratio, count");
    }
    const double start = j.at("start").get<double>();
    const double ratio = j.at("ratio").get<double>();
    const int count = j.at("count").get<int>();
    if (count <= 0) throw ConfigError(std::string(what) + ": count must be positive");
    double v = start;
    for (int k = 0; k < count; ++k, v *= ratio) {
      out.push_back(gaps_from ? peak - v : v);
    }
  } else {
    throw ConfigError(std::string(what) + ": expected a list or a geometric descriptor");
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty sequence");
  return out;
}

Point parse_point(const json& j, int dim, const char* what) {
  Point p{0.0, 0.0};
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(std::string(what) + ": expected an array of length " + std::to_string(dim));
  }
  for (int a = 0; a < dim; ++a) p[static_cast<std::size_t>(a)] = j.at(a).get<double>();
  return p;
}

VSpec parse_vspec(const json& j, const std::string& base_dir, const char* what) {
  VSpec v;
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    v.kind = VSpec::Kind::Constant;
    v.value = j.value("value", 0.0);
  } else if (kind == "well") {
    v.kind = VSpec::Kind::Well;
    v.inside = j.at("inside").get<double>();
    v.outside = j.at("outside").get<double>();
    v.radius = j.at("radius").get<double>();
    if (!(v.radius > 0.0)) throw ConfigError(std::string(what) + ": well radius must be positive");
  } else if (kind == "custom_dump") {
    v.kind = VSpec::Kind::CustomDump;
    v.path = j.at("path").get<std::string>();
    if (!base_dir.empty() && !v.path.empty() && v.path.front() != '/') {
      v.path = base_dir + "/" + v.path;
    }
  } else {
    throw ConfigError(std::string(what) + ": unknown profile kind '" + kind + "'");
  }
  return v;
}

json vspec_json(const VSpec& v) {
  json j;
  switch (v.kind) {
    case VSpec::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = v.value;
      break;
    case VSpec::Kind::Well:
      j["kind"] = "well";
      j["inside"] = v.inside;
      j["outside"] = v.outside;
      j["radius"] = v.radius;
      break;
    case VSpec::Kind::CustomDump:
      j["kind"] = "custom_dump";
      j["path"] = v.path;
      break;
  }
  return j;
}

double parse_q_entry(const json& x) {
  if (x.is_string()) {
    if (x.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("q_list: unknown entry '" + x.get<std::string>() + "'");
  }
  return x.get<double>();
}

}  // namespace

StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  try {
    StudyConfig cfg;
    const json& jg = j.at("grid");
    cfg.grid.dim = jg.at("dim").get<int>();
    if (cfg.grid.dim != 1 && cfg.grid.dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    cfg.grid.lo = parse_point(jg.at("lo"), cfg.grid.dim, "grid.lo");
    cfg.grid.hi = parse_point(jg.at("hi"), cfg.grid.dim, "grid.hi");
    const json& jn = jg.at("n_nodes");
    if (!jn.is_array() || static_cast<int>(jn.size()) != cfg.grid.dim) {
      throw ConfigError("grid.n_nodes must have one entry per axis");
    }
    for (int a = 0; a < cfg.grid.dim; ++a) {
      cfg.grid.n_nodes[static_cast<std::size_t>(a)] = jn.at(a).get<int>();
    }
    if (cfg.grid.dim == 1) cfg.grid.n_nodes[1] = 1;
    cfg.grid.truncated_unbounded = jg.value("truncated_unbounded", false);

    const json& jf = j.at("family");
    FamilyConfig& fam = cfg.family;
    fam.kind = jf.at("kind").get<std::string>();
    fam.p = jf.at("p").get<double>();
    fam.V = jf.contains("V") ? parse_vspec(jf.at("V"), base_dir, "family.V") : VSpec{};
    fam.first_n = jf.value("first_n", 1);
    if (fam.kind == "shrinking_ball" || fam.kind == "two_point") {
      fam.eps = parse_sequence(jf.at("eps"), "family.eps");
      fam.q_plus = jf.at("q_plus").get<double>();
      fam.q_minus = jf.at("q_minus").get<double>();
    }
    if (fam.kind == "shrinking_ball") {
      fam.center = jf.contains("center") ? parse_point(jf.at("center"), cfg.grid.dim, "center")
                                         : Point{0.0, 0.0};
      if (jf.contains("K")) {
        fam.K.amplitude = jf.at("K").value("amplitude", 0.0);
        fam.K.support_fraction = jf.at("K").value("support_fraction", 1.0);
      }
    } else if (fam.kind == "two_point") {
      const json& jc = jf.at("centers");
      if (!jc.is_array() || jc.size() != 2) throw ConfigError("two_point needs two centers");
      fam.center = parse_point(jc.at(0), cfg.grid.dim, "centers[0]");
      fam.center2 = parse_point(jc.at(1), cfg.grid.dim, "centers[1]");
      if (jf.contains("q_plus_2")) fam.q_plus_2 = jf.at("q_plus_2").get<double>();
    } else if (fam.kind == "level_shift") {
      fam.center = jf.contains("center") ? parse_point(jf.at("center"), cfg.grid.dim, "center")
                                         : Point{0.0, 0.0};
      fam.q_profile.peak = jf.at("Q_profile").value("peak", 1.0);
      fam.q_profile.curvature = jf.at("Q_profile").value("curvature", 1.0);
      fam.lambdas = parse_sequence(jf.at("lambda"), "family.lambda",
                                   /*gaps_from=*/jf.at("lambda").is_object(),
                                   fam.q_profile.peak);
    } else if (fam.kind == "custom") {
      fam.q_custom = parse_vspec(jf.at("Q"), base_dir, "family.Q");
      fam.center = jf.contains("center") ? parse_point(jf.at("center"), cfg.grid.dim, "center")
                                         : Point{0.0, 0.0};
    } else {
      throw ConfigError("unknown family kind '" + fam.kind + "'");
    }

    if (j.contains("solver")) {
      const json& js = j.at("solver");
      cfg.solver.max_iter = js.value("max_iter", cfg.solver.max_iter);
      cfg.solver.grad_tol = js.value("grad_tol", cfg.solver.grad_tol);
      cfg.solver.energy_tol = js.value("energy_tol", cfg.solver.energy_tol);
      cfg.solver.armijo = js.value("armijo", cfg.solver.armijo);
      cfg.solver.backtrack_shrink = js.value("shrink", cfg.solver.backtrack_shrink);
      cfg.solver.abs_retraction = js.value("abs_retraction", cfg.solver.abs_retraction);
      cfg.solver.residual_tol = js.value("residual_tol", cfg.solver.residual_tol);
      if (js.contains("multistart")) {
        cfg.solver.multistart.clear();
        for (const auto& s : js.at("multistart")) {
          cfg.solver.multistart.push_back(s.get<std::string>());
        }
      }
      if (!(cfg.solver.grad_tol > 0.0) || !(cfg.solver.energy_tol > 0.0)) {
        throw ConfigError("solver tolerances must be positive");
      }
      if (!(cfg.solver.armijo > 0.0 && cfg.solver.armijo < 1.0)) {
        throw ConfigError("solver.armijo must lie in (0, 1)");
      }
    }
    if (j.contains("analysis")) {
      const json& ja = j.at("analysis");
      if (ja.contains("eps_list")) {
        cfg.analysis.eps_list = parse_sequence(ja.at("eps_list"), "analysis.eps_list");
      }
      if (ja.contains("q_list")) {
        cfg.analysis.q_list.clear();
        for (const auto& x : ja.at("q_list")) cfg.analysis.q_list.push_back(parse_q_entry(x));
      }
      cfg.analysis.rate_slack = ja.value("rate_slack", cfg.analysis.rate_slack);
      cfg.analysis.qstar_lower_factor =
          ja.value("qstar_lower_factor", cfg.analysis.qstar_lower_factor);
      cfg.analysis.mass_threshold = ja.value("mass_threshold", cfg.analysis.mass_threshold);
      if (ja.contains("decay")) {
        cfg.analysis.decay_R_lambda = {ja.at("decay").at("R").get<double>(),
                                       ja.at("decay").at("lambda").get<double>()};
      }
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.solver.seed = cfg.seed;
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string base_dir;
  const auto slash = path.rfind('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return parse_study_config(ss.str(), base_dir);
}

std::string serialize_study_config(const StudyConfig& cfg) {
  json j;
  j["grid"] = {{"dim", cfg.grid.dim},
               {"lo", std::vector<double>(cfg.grid.lo.begin(), cfg.grid.lo.begin() + cfg.grid.dim)},
               {"hi", std::vector<double>(cfg.grid.hi.begin(), cfg.grid.hi.begin() + cfg.grid.dim)},
               {"n_nodes", std::vector<int>(cfg.grid.n_nodes.begin(),
                                            cfg.grid.n_nodes.begin() + cfg.grid.dim)},
               {"truncated_unbounded", cfg.grid.truncated_unbounded}};
  json jf;
  jf["kind"] = cfg.family.kind;
  jf["p"] = cfg.family.p;
  jf["V"] = vspec_json(cfg.family.V);
  jf["first_n"] = cfg.family.first_n;
  auto point_json = [&cfg](const Point& p) {
    return std::vector<double>(p.begin(), p.begin() + cfg.grid.dim);
  };
  if (cfg.family.kind == "shrinking_ball" || cfg.family.kind == "two_point") {
    jf["eps"] = cfg.family.eps;
    jf["q_plus"] = cfg.family.q_plus;
    jf["q_minus"] = cfg.family.q_minus;
  }
  if (cfg.family.kind == "shrinking_ball") {
    jf["center"] = point_json(cfg.family.center);
    jf["K"] = {{"amplitude", cfg.family.K.amplitude},
               {"support_fraction", cfg.family.K.support_fraction}};
  } else if (cfg.family.kind == "two_point") {
    jf["centers"] = {point_json(cfg.family.center), point_json(cfg.family.center2)};
    if (cfg.family.q_plus_2) jf["q_plus_2"] = *cfg.family.q_plus_2;
  } else if (cfg.family.kind == "level_shift") {
    jf["center"] = point_json(cfg.family.center);
    jf["Q_profile"] = {{"peak", cfg.family.q_profile.peak},
                       {"curvature", cfg.family.q_profile.curvature}};
    jf["lambda"] = cfg.family.lambdas;
  } else if (cfg.family.kind == "custom") {
    jf["Q"] = vspec_json(cfg.family.q_custom);
    jf["center"] = point_json(cfg.family.center);
  }
  j["family"] = jf;
  j["solver"] = {{"max_iter", cfg.solver.max_iter},
                 {"grad_tol", cfg.solver.grad_tol},
                 {"energy_tol", cfg.solver.energy_tol},
                 {"armijo", cfg.solver.armijo},
                 {"shrink", cfg.solver.backtrack_shrink},
                 {"abs_retraction", cfg.solver.abs_retraction},
                 {"residual_tol", cfg.solver.residual_tol},
                 {"multistart", cfg.solver.multistart}};
  json ja;
  if (!cfg.analysis.eps_list.empty()) ja["eps_list"] = cfg.analysis.eps_list;
  json jq = json::array();
  for (double q : cfg.analysis.q_list) {
    if (std::isinf(q)) {
      jq.push_back("inf");
    } else {
      jq.push_back(q);
    }
  }
  ja["q_list"] = jq;
  ja["rate_slack"] = cfg.analysis.rate_slack;
  ja["qstar_lower_factor"] = cfg.analysis.qstar_lower_factor;
  ja["mass_threshold"] = cfg.analysis.mass_threshold;
  if (cfg.analysis.decay_R_lambda) {
    ja["decay"] = {{"R", cfg.analysis.decay_R_lambda->first},
                   {"lambda", cfg.analysis.decay_R_lambda->second}};
  }
  j["analysis"] = ja;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

GridPtr build_grid_from(const GridSpec& spec) {
  return build_grid(spec.dim, spec.lo, spec.hi, spec.n_nodes, spec.truncated_unbounded);
}

ScalarField build_v_field(const VSpec& spec, const GridPtr& grid) {
  switch (spec.kind) {
    case VSpec::Kind::Constant:
      return ScalarField(grid, spec.value);
    case VSpec::Kind::Well: {
      const double r = spec.radius;
      return ScalarField::from_function(grid, [&spec, r, &grid](const Point& x) {
        return euclid_dist(x, Point{0.0, 0.0}, grid->dim) < r ? spec.inside : spec.outside;
      });
    }
    case VSpec::Kind::CustomDump: {
      ScalarField f = load_field(spec.path);
      if (!(*f.grid == *grid)) {
        throw ConfigError("custom dump " + spec.path + " lives on a different grid");
      }
      f.grid = grid;
      return f;
    }
  }
  throw ConfigError("unreachable V kind");
}

std::vector<ProblemInstance> build_family(const StudyConfig& cfg) {
  const GridPtr grid = build_grid_from(cfg.grid);
  const ScalarField V = build_v_field(cfg.family.V, grid);
  const FamilyConfig& fam = cfg.family;
  if (fam.kind == "shrinking_ball") {
    return make_family_shrinking_ball(grid, fam.eps, fam.q_plus, fam.q_minus, V, fam.K, fam.p,
                                      fam.center, fam.first_n);
  }
  if (fam.kind == "two_point") {
    return make_two_point_family(grid, fam.eps, fam.q_plus, fam.q_minus, V, fam.p, fam.center,
                                 fam.center2, fam.q_plus_2, fam.first_n);
  }
  if (fam.kind == "level_shift") {
    const ScalarField profile = ScalarField::from_function(
        grid, [&fam, &grid](const Point& x) {
          const double d = euclid_dist(x, fam.center, grid->dim);
          return fam.q_profile.peak - fam.q_profile.curvature * d * d;
        });
    return make_family_level_shift(grid, profile, fam.lambdas, V, fam.p, fam.center, fam.first_n);
  }
  if (fam.kind == "custom") {
    ProblemInstance inst;
    inst.grid = grid;
    inst.V = V;
    inst.K = ScalarField(grid, 0.0);
    inst.Q = build_v_field(fam.q_custom, grid);
    inst.p = fam.p;
    inst.n = fam.first_n;
    inst.centers = {fam.center};
    inst.core_radius = 0.0;
    inst.sub_resolution = false;
    return {inst};
  }
  throw ConfigError("unknown family kind '" + fam.kind + "'");
}

StudyOptions study_options_from(const StudyConfig& cfg) {
  StudyOptions opts;
  opts.eps_list = cfg.analysis.eps_list;
  opts.q_list = cfg.analysis.q_list;
  opts.rate_slack = cfg.analysis.rate_slack;
  opts.decay_R_lambda = cfg.analysis.decay_R_lambda;
  opts.qstar_lower_factor = cfg.analysis.qstar_lower_factor;
  opts.mass_threshold = cfg.analysis.mass_threshold;
  return opts;
}

Coefficients1D continuum_coefficients_1d(const StudyConfig& cfg, std::size_t index) {
  if (cfg.grid.dim != 1) throw ConfigError("continuum coefficients: 1D configs only");
  const FamilyConfig& fam = cfg.family;
  Coefficients1D c;
  c.p = fam.p;
  c.half_width = std::max(std::fabs(cfg.grid.lo[0]), std::fabs(cfg.grid.hi[0]));

  const VSpec& vs = fam.V;
  if (vs.kind == VSpec::Kind::Constant) {
    const double v = vs.value;
    c.V = [v](double) { return v; };
  } else if (vs.kind == VSpec::Kind::Well) {
    const double inside = vs.inside, outside = vs.outside, r = vs.radius;
    c.V = [inside, outside, r](double x) { return std::fabs(x) < r ? inside : outside; };
    c.breakpoints.push_back(r);
  } else {
    throw ConfigError("continuum coefficients: custom-dump V has no analytic form");
  }

  if (fam.kind == "shrinking_ball") {
    if (index >= fam.eps.size()) throw ConfigError("family index out of range");
    if (std::fabs(fam.center[0]) > 1e-14 || fam.K.amplitude != 0.0) {
      throw ConfigError("continuum coefficients: shooting needs an even instance "
                        "(center 0, K == 0)");
    }
    const double eps = fam.eps[index];
    const double qp = fam.q_plus, qm = fam.q_minus;
    c.Q = [eps, qp, qm](double x) { return std::fabs(x) < eps ? qp : qm; };
    c.breakpoints.push_back(eps);
  } else if (fam.kind == "level_shift") {
    if (index >= fam.lambdas.size()) throw ConfigError("family index out of range");
    if (std::fabs(fam.center[0]) > 1e-14) {
      throw ConfigError("continuum coefficients: shooting needs an even instance");
    }
    const double peak = fam.q_profile.peak, curv = fam.q_profile.curvature;
    const double lam = fam.lambdas[index];
    c.Q = [peak, curv, lam](double x) { return peak - curv * x * x - lam; };
  } else if (fam.kind == "custom") {
    if (index != 0) throw ConfigError("family index out of range");
    const VSpec& qs = fam.q_custom;
    if (qs.kind == VSpec::Kind::Constant) {
      const double q = qs.value;
      c.Q = [q](double) { return q; };
    } else if (qs.kind == VSpec::Kind::Well) {
      const double inside = qs.inside, outside = qs.outside, r = qs.radius;
      c.Q = [inside, outside, r](double x) { return std::fabs(x) < r ? inside : outside; };
      c.breakpoints.push_back(r);
    } else {
      throw ConfigError("continuum coefficients: custom-dump Q has no analytic form");
    }
  } else {
    throw ConfigError("continuum coefficients: two-point instances are not even about 0");
  }
  return c;
}

std::string config_hash(const StudyConfig& cfg) {
  const std::string s = serialize_study_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gslab
