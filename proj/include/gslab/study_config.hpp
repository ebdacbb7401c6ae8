#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gslab/analysis.hpp"
#include "gslab/oracle.hpp"
#include "gslab/problem.hpp"
#include "gslab/solver.hpp"

namespace gslab {

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

struct GridSpec {
  int dim = 1;
  Point lo{-1.0, 0.0};
  Point hi{1.0, 0.0};
  std::array<int, 2> n_nodes{200, 1};
  bool truncated_unbounded = false;
};

struct VSpec {
  enum class Kind { Constant, Well, CustomDump };
  Kind kind = Kind::Constant;
  double value = 0.0;             // Constant
  double inside = 0.0;            // Well: value on |x| < radius
  double outside = 0.0;           // Well: value on |x| >= radius
  double radius = 0.0;            // Well
  std::string path;               // CustomDump: field dump stem
};

struct QProfileSpec {
  double peak = 1.0;
  double curvature = 1.0;  // Q(x) = peak - curvature |x - center|^2
};

struct FamilyConfig {
  std::string kind = "shrinking_ball";  // shrinking_ball | level_shift | two_point | custom
  double p = 4.0;
  VSpec V;
  std::vector<double> eps;      // shrinking_ball, two_point
  std::vector<double> lambdas;  // level_shift
  double q_plus = 1.0;
  double q_minus = -1.0;
  std::optional<double> q_plus_2;  // two_point per-ball amplitude
  Point center{0.0, 0.0};
  Point center2{0.0, 0.0};  // two_point
  KSpec K;
  QProfileSpec q_profile;  // level_shift
  VSpec q_custom;          // custom: Q built like a V profile
  int first_n = 1;
};

struct AnalysisConfig {
  std::vector<double> eps_list;
  std::vector<double> q_list = {2.0};
  double rate_slack = 0.1;
  std::optional<std::pair<double, double>> decay_R_lambda;
  double qstar_lower_factor = 0.5;
  double mass_threshold = 0.9;
};

struct StudyConfig {
  GridSpec grid;
  FamilyConfig family;
  SolverConfig solver;
  AnalysisConfig analysis;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

/// Parses the declarative study config.  Sequences accept explicit lists or
/// {start, ratio, count} geometric descriptors (for lambda sequences the
/// descriptor gives the gaps below the profile peak).  Throws ConfigError on
/// schema violations.
StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir = "");
StudyConfig load_study_config(const std::string& path);
std::string serialize_study_config(const StudyConfig& cfg);

GridPtr build_grid_from(const GridSpec& spec);
ScalarField build_v_field(const VSpec& spec, const GridPtr& grid);
std::vector<ProblemInstance> build_family(const StudyConfig& cfg);
StudyOptions study_options_from(const StudyConfig& cfg);

/// Continuum coefficients of family member `index` (0-based), for the 1D
/// shooting oracle.  Only analytic V/Q kinds are supported.
Coefficients1D continuum_coefficients_1d(const StudyConfig& cfg, std::size_t index);

/// FNV-1a hash of the canonical serialized config, for artifact sidecars.
std::string config_hash(const StudyConfig& cfg);

}  // namespace gslab
