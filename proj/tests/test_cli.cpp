// Exercises the installed CLI end to end: exit codes, artifacts on disk, and
// byte-level determinism of study outputs.  The binary path arrives in
// argv[1] via CTest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gslab/field_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;

int run_cli(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path sandbox() {
  const fs::path dir = fs::temp_directory_path() / "gslab_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

const char* kStudyConfig = R"json({
  "grid": {"dim": 1, "lo": [-1.0], "hi": [1.0], "n_nodes": [600]},
  "family": {
    "kind": "shrinking_ball", "p": 4.0, "first_n": 2,
    "V": {"kind": "constant", "value": 225.0},
    "K": {"amplitude": -225.0, "support_fraction": 1.0},
    "eps": {"start": 0.25, "ratio": 0.5, "count": 3},
    "q_plus": 1.0, "q_minus": -1.0,
    "center": [0.0]
  },
  "analysis": {"eps_list": [0.25], "q_list": [2, "inf"]},
  "output_dir": "OUTDIR", "seed": 11
})json";

const char* kInfeasibleConfig = R"json({
  "grid": {"dim": 1, "lo": [-1.0], "hi": [1.0], "n_nodes": [120]},
  "family": {
    "kind": "custom", "p": 4.0,
    "V": {"kind": "constant", "value": 0.0},
    "Q": {"kind": "constant", "value": -1.0}
  },
  "output_dir": "OUTDIR", "seed": 1
})json";

const char* kNegativeVConfig = R"json({
  "grid": {"dim": 1, "lo": [-1.0], "hi": [1.0], "n_nodes": [120]},
  "family": {
    "kind": "shrinking_ball", "p": 4.0,
    "V": {"kind": "constant", "value": -0.5},
    "eps": [0.25],
    "q_plus": 1.0, "q_minus": -1.0,
    "center": [0.0]
  },
  "output_dir": "OUTDIR", "seed": 1
})json";

std::string with_outdir(const char* text, const fs::path& out) {
  std::string s(text);
  const std::string key = "OUTDIR";
  s.replace(s.find(key), key.size(), out.string());
  return s;
}

}  // namespace

TEST_CASE("validate: pass, assumption failure, schema failure") {
  const fs::path dir = sandbox();
  write_file(dir / "ok.json", with_outdir(kStudyConfig, dir / "ok_out"));
  CHECK(run_cli("validate --config " + (dir / "ok.json").string()) == 0);
  CHECK(fs::exists(dir / "ok_out" / "assumptions.json"));

  write_file(dir / "negv.json", with_outdir(kNegativeVConfig, dir / "negv_out"));
  CHECK(run_cli("validate --config " + (dir / "negv.json").string()) == 1);

  write_file(dir / "broken.json", "{ this is not json");
  CHECK(run_cli("validate --config " + (dir / "broken.json").string()) == 2);
  CHECK(run_cli("validate --config " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("solve: artifacts, determinism, error exits") {
  const fs::path dir = sandbox();
  write_file(dir / "study.json", with_outdir(kStudyConfig, dir / "solve_out"));
  const std::string cfg = (dir / "study.json").string();
  CHECK(run_cli("solve --config " + cfg + " --n 3") == 0);
  CHECK(fs::exists(dir / "solve_out" / "ground_state_n3.json"));
  CHECK(fs::exists(dir / "solve_out" / "ground_state_n3.bin"));
  CHECK(fs::exists(dir / "solve_out" / "ground_state_n3.meta.json"));

  // The dumped field loads back exactly, and a rerun with the same seed is
  // bit-identical.
  gslab::ScalarField u1 = gslab::load_field((dir / "solve_out" / "ground_state_n3").string());
  const std::string meta1 = slurp(dir / "solve_out" / "ground_state_n3.meta.json");
  CHECK(run_cli("solve --config " + cfg + " --n 3") == 0);
  gslab::ScalarField u2 = gslab::load_field((dir / "solve_out" / "ground_state_n3").string());
  CHECK(u1.values == u2.values);
  CHECK(slurp(dir / "solve_out" / "ground_state_n3.meta.json") == meta1);

  CHECK(run_cli("solve --config " + cfg + " --n 99") == 2);  // out of range

  write_file(dir / "infeasible.json", with_outdir(kInfeasibleConfig, dir / "inf_out"));
  CHECK(run_cli("solve --config " + (dir / "infeasible.json").string()) == 1);
}

TEST_CASE("study: verdicts, CSV determinism across reruns") {
  const fs::path dir = sandbox();
  write_file(dir / "study_a.json", with_outdir(kStudyConfig, dir / "out_a"));
  write_file(dir / "study_b.json", with_outdir(kStudyConfig, dir / "out_b"));
  CHECK(run_cli("study --config " + (dir / "study_a.json").string()) == 0);
  CHECK(run_cli("study --config " + (dir / "study_b.json").string() + " --jobs 2") == 0);
  const std::string csv_a = slurp(dir / "out_a" / "report.csv");
  const std::string csv_b = slurp(dir / "out_b" / "report.csv");
  REQUIRE(!csv_a.empty());
  CHECK(csv_a == csv_b);
  CHECK(csv_a.find("n,eps,q,h1_ratio,lp_ratio,tail_q,total_q,norm_n,m1,m2,selected,margin") == 0);
  const std::string verdicts = slurp(dir / "out_a" / "verdicts.json");
  CHECK(verdicts.find("\"all_pass\": true") != std::string::npos);

  // A single-member family cannot support trend verdicts.
  std::string one = with_outdir(kStudyConfig, dir / "out_one");
  one.replace(one.find("\"count\": 3"), 10, "\"count\": 1");
  write_file(dir / "one.json", one);
  CHECK(run_cli("study --config " + (dir / "one.json").string()) == 1);
}

TEST_CASE("spectrum and oracle subcommands") {
  const fs::path dir = sandbox();
  write_file(dir / "study.json", with_outdir(kStudyConfig, dir / "spec_out"));
  CHECK(run_cli("spectrum --config " + (dir / "study.json").string()) == 0);

  // The oracle needs an even instance with K == 0.
  std::string no_k = with_outdir(kStudyConfig, dir / "oracle_out");
  no_k.replace(no_k.find("-225.0"), 6, "0.0");
  write_file(dir / "oracle.json", no_k);
  CHECK(run_cli("oracle --config " + (dir / "oracle.json").string() + " --n 2") == 0);
  CHECK(fs::exists(dir / "oracle_out" / "oracle_n2.json"));
  CHECK(fs::exists(dir / "oracle_out" / "oracle_n2.meta.json"));
  const std::string meta = slurp(dir / "oracle_out" / "oracle_n2.meta.json");
  CHECK(meta.find("\"provenance\": \"oracle\"") != std::string::npos);
}

TEST_CASE("unknown flags exit with the schema code") {
  CHECK(run_cli("solve --nonsense") == 2);
  CHECK(run_cli("") == 2);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-gslab-binary>\n");
    return 1;
  }
  g_binary = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}
