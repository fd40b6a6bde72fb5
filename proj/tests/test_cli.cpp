#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"
#include "mbkdv/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Scratch space inside the build tree, unique per process.
fs::path scratch() {
  static const fs::path root = fs::current_path() / ("cli_scratch_" + std::to_string(::getpid()));
  fs::create_directories(root);
  return root;
}

// Removes the scratch tree once every test has run.
class ScratchCleanup : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(scratch()); }
};
const auto* const kCleanup = ::testing::AddGlobalTestEnvironment(new ScratchCleanup);

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mbkdv_cli");
  args.emplace_back("--quiet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mbkdv::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Run run_config(const std::string& cmd, const json& cfg, const fs::path& out_dir, std::vector<std::string> extra = {}) {
  const fs::path p = write_config(out_dir.filename().string(), cfg);
  std::vector<std::string> args{cmd, "--config", p.string(), "--out", out_dir.string()};
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json simulate_cfg() {
  return {{"command", "simulate"},
          {"seed", 3},
          {"simulate", {{"n_max", 8}, {"t_end", 0.01}, {"record_every", 2}}}};
}

json verify_cfg(bool corrupt) {
  json v = {{"identities", {{"n_max", 8}, {"n_cut", 4}, {"t_values", {0.0, 0.37}}, {"samples", 3}, {"oracle_samples", 1}}},
            {"residuals", {{"n_max", 6}, {"n_cut", 3}, {"dt", 1e-4}, {"t_end", 0.004}, {"amplitude", 0.1}}}};
  if (corrupt) v["_inject_corruption"] = true;
  return {{"command", "verify"}, {"seed", 4}, {"verify", v}};
}

json contract_cfg(double t_star) {
  return {{"command", "contract"},
          {"seed", 5},
          {"contract",
           {{"n_max", 8},
            {"n_cut", 4},
            {"t_star", t_star},
            {"m_grid", 9},
            {"initial", {{"random", {{"s", 3.0}, {"amplitude", 1.0}}}, {"normalize", {{"s", 1.0}, {"norm", 0.1}}}}}}}};
}

json bounds_cfg(json n_values) {
  return {{"command", "bounds"},
          {"seed", 6},
          {"bounds", {{"n_values", n_values}, {"samples", 3}, {"cases", {{{"op", "B2"}, {"s", 0.0}}}}}}};
}

json converge_cfg(json n_list) {
  return {{"command", "converge"},
          {"seed", 7},
          {"converge", {{"n_max", 16}, {"t_end", 0.01}, {"n_list", n_list}, {"initial", {{"random", {{"s", 2.0}}}}}}}};
}

}  // namespace

TEST(Cli, SimulateWritesOutputsAndManifest) {
  const fs::path out = scratch() / "sim";
  const auto r = run_config("simulate", simulate_cfg(), out);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.rfind("status=ok command=simulate exit_code=0", 0), 0u) << r.out;
  ASSERT_TRUE(fs::exists(out / "manifest.json"));
  const json m = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["tool_version"], mbkdv::cli::kToolVersion);
  EXPECT_TRUE(m.contains("wall_time_s"));
  EXPECT_TRUE(fs::exists(out / "trajectory" / "config.json"));
  EXPECT_TRUE(fs::exists(out / "trajectory" / "snapshot_000000.json"));

  std::istringstream csv(slurp(out / "diagnostics.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,energy_cal,hamiltonian,norm_s0,norm_s05,norm_s1,max_mode_amp");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_GE(rows, 2);

  // No staging directory is left behind.
  for (const auto& e : fs::directory_iterator(scratch()))
    EXPECT_EQ(e.path().filename().string().find(".partial-"), std::string::npos) << e.path();
}

TEST(Cli, OutputsAreReproducible) {
  const fs::path a = scratch() / "rep_a", b = scratch() / "rep_b";
  ASSERT_EQ(run_config("simulate", simulate_cfg(), a).code, 0);
  ASSERT_EQ(run_config("simulate", simulate_cfg(), b).code, 0);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 3);
}

TEST(Cli, RefusesNonEmptyOutputDir) {
  const fs::path out = scratch() / "taken";
  fs::create_directories(out);
  std::ofstream(out / "keep.txt") << "x";
  EXPECT_EQ(run_config("simulate", simulate_cfg(), out).code, 1);
  EXPECT_EQ(slurp(out / "keep.txt"), "x");
}

TEST(Cli, StepAboveBoundIsUsageErrorNamingBound) {
  json cfg = simulate_cfg();
  cfg["simulate"]["dt"] = 10.0;
  const auto r = run_config("simulate", cfg, scratch() / "bad_dt");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("stability bound"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(scratch() / "bad_dt"));
}

TEST(Cli, ZeroEndTimeIsUsageError) {
  json cfg = simulate_cfg();
  cfg["simulate"]["t_end"] = 0.0;
  EXPECT_EQ(run_config("simulate", cfg, scratch() / "t0").code, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"simulate", "--config", (scratch() / "missing.json").string()}).code, 1);
  EXPECT_EQ(run({"simulate"}).code, 1);
  EXPECT_EQ(run({"frobnicate", "--config", "x.json"}).code, 1);
  const fs::path v = write_config("verify_suite", verify_cfg(false));
  EXPECT_EQ(run({"verify", "bogus", "--config", v.string(), "--out", (scratch() / "bogus").string()}).code, 1);
  json unknown = simulate_cfg();
  unknown["simulate"]["n_maxx"] = 8;
  EXPECT_EQ(run_config("simulate", unknown, scratch() / "unknown_key").code, 1);
  // A config written for another command.
  EXPECT_EQ(run_config("contract", simulate_cfg(), scratch() / "wrong_cmd").code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, VerifyPassesAndCatchesCorruption) {
  const auto ok = run_config("verify", verify_cfg(false), scratch() / "verify_ok");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_TRUE(fs::exists(scratch() / "verify_ok" / "verify_report.json"));
  EXPECT_TRUE(fs::exists(scratch() / "verify_ok" / "verify_summary.csv"));
  const auto bad = run_config("verify", verify_cfg(true), scratch() / "verify_bad", {"identities"});
  EXPECT_EQ(bad.code, 3) << bad.out << bad.err;
  EXPECT_EQ(bad.out.rfind("status=fail", 0), 0u) << bad.out;
  const json m = json::parse(slurp(scratch() / "verify_bad" / "manifest.json"));
  EXPECT_EQ(m["exit_code"], 3);
}

TEST(Cli, ContractExitCodes) {
  const auto ok = run_config("contract", contract_cfg(0.02), scratch() / "contract_ok");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_TRUE(fs::exists(scratch() / "contract_ok" / "solution.csv"));
  // Default data and sizes on a long horizon leave the ball.
  const json long_horizon = {{"command", "contract"}, {"seed", 5}, {"contract", {{"t_star", 10.0}}}};
  const auto fail = run_config("contract", long_horizon, scratch() / "contract_fail");
  EXPECT_EQ(fail.code, 4) << fail.out << fail.err;
  const json rep = json::parse(slurp(scratch() / "contract_fail" / "solver_report.json"));
  EXPECT_NE(rep["status"], "converged");
}

TEST(Cli, BoundsNeedsFourCutoffs) {
  EXPECT_EQ(run_config("bounds", bounds_cfg(json::array({8})), scratch() / "bounds_one").code, 1);
  EXPECT_EQ(run_config("bounds", bounds_cfg(json::array()), scratch() / "bounds_empty").code, 1);
  const auto ok = run_config("bounds", bounds_cfg({4, 6, 8, 12}), scratch() / "bounds_ok");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_TRUE(fs::exists(scratch() / "bounds_ok" / "bounds.csv"));
}

TEST(Cli, ConvergeRejectsEmptyListAndRuns) {
  EXPECT_EQ(run_config("converge", converge_cfg(json::array()), scratch() / "conv_empty").code, 1);
  const auto ok = run_config("converge", converge_cfg({4, 8}), scratch() / "conv_ok");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  const json j = json::parse(slurp(scratch() / "conv_ok" / "convergence.json"));
  EXPECT_EQ(j["errors"].size(), 2u);
}

TEST(Cli, SeedOverrideChangesData) {
  const auto a = run_config("simulate", simulate_cfg(), scratch() / "seed_a", {});
  const auto b = run_config("simulate", simulate_cfg(), scratch() / "seed_b");
  ASSERT_EQ(a.code, 0);
  const fs::path p = write_config("seed_c_cfg", simulate_cfg());
  const auto c = run({"simulate", "--seed", "99", "--config", p.string(), "--out", (scratch() / "seed_c").string()});
  ASSERT_EQ(c.code, 0);
  const fs::path snap = fs::path("trajectory") / "snapshot_000000.json";
  EXPECT_EQ(slurp(scratch() / "seed_a" / snap), slurp(scratch() / "seed_b" / snap));
  EXPECT_NE(slurp(scratch() / "seed_a" / snap), slurp(scratch() / "seed_c" / snap));
  EXPECT_EQ(json::parse(slurp(scratch() / "seed_c" / "manifest.json"))["seed"], 99);
}
