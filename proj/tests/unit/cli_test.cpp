#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nlcouple/cli.hpp"
#include "nlcouple/error.hpp"

namespace nlc {
namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nlcouple_cli_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(RunConfig, DefaultsAndOverrides) {
  const auto c = parse_config("");
  EXPECT_EQ(c.mode, GeometryMode::Interval1D);
  EXPECT_EQ(*c.case_id, "mc1");
  EXPECT_DOUBLE_EQ(c.mesh_sizes().first, 0.0125);
  const auto r = parse_config(R"(
geometry: {mode: radial, r1: 0.4, r2: 1.0}
kernel: {delta: 0.05}
mesh: {h_nonlocal: 0.01}
problem: {case: mcR1, lambda1: 2.0}
solver: {method: iterative, tol: 1.0e-10}
study: {deltas: [0.1, 0.05, 0.025], h_ratio: 0.25}
run: {seed: 3, threads: 2}
)");
  EXPECT_EQ(r.mode, GeometryMode::RadialDisk2D);
  EXPECT_DOUBLE_EQ(r.interface_position, 0.4);
  EXPECT_DOUBLE_EQ(r.mesh_sizes().first, 0.0125);
  EXPECT_DOUBLE_EQ(r.mesh_sizes().second, 0.01);
  EXPECT_EQ(r.solver.method, SolverMethod::Iterative);
  EXPECT_EQ(r.deltas.size(), 3u);
  EXPECT_EQ(r.seed, 3u);
  EXPECT_EQ(r.threads, 2u);
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(parse_config("kernel: {dleta: 0.1}"), ConfigError);
  EXPECT_THROW(parse_config("kernels: {delta: 0.1}"), ConfigError);
  EXPECT_THROW(parse_config("kernel: {delta: -0.1}"), ConfigError);
  EXPECT_THROW(parse_config("kernel: {delta: abc}"), ConfigError);
  EXPECT_THROW(parse_config("kernel: {profile: nosuch}"), ConfigError);
  EXPECT_THROW(parse_config("study: {deltas: [0.1, 0.1, 0.05]}"), ConfigError);
  EXPECT_THROW(parse_config("study: {deltas: [0.05, 0.1]}"), ConfigError);
  EXPECT_THROW(parse_config("problem: {case: mc1, source: cos_pi}"), ConfigError);
  EXPECT_THROW(parse_config("problem: {case: mcR1}"), ConfigError);
  EXPECT_THROW(parse_config("geometry: {a: 1.5, outer: 1.0}"), ConfigError);
  EXPECT_THROW(parse_config("solver: {method: cholesky}"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
  EXPECT_THROW(parse_config("kernel: {delta: 0.3}").problem_spec(), ConfigError);
}

TEST(Commands, SolveWritesFiles) {
  const auto dir = scratch("solve");
  auto c = parse_config("");
  c.output_dir = dir;
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_solve(c, out, err), cli::kOk);
  const auto csv = slurp(dir / "solution.csv");
  EXPECT_EQ(csv.rfind("point,value,region\n", 0), 0u);
  EXPECT_NE(csv.find(",gamma\n"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "errors.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "solution_local.dat"));
  EXPECT_FALSE(std::filesystem::exists(dir / "solution.csv.tmp"));
}

TEST(Commands, SolveIsDeterministic) {
  auto c = parse_config("problem: {source: random}\nrun: {seed: 5}");
  std::ostringstream out, err;
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  c.output_dir = a;
  cli::cmd_solve(c, out, err);
  c.output_dir = b;
  cli::cmd_solve(c, out, err);
  EXPECT_EQ(slurp(a / "solution.csv"), slurp(b / "solution.csv"));
  c.seed = 6;
  c.output_dir = scratch("det_c");
  cli::cmd_solve(c, out, err);
  EXPECT_NE(slurp(a / "solution.csv"), slurp(c.output_dir / "solution.csv"));
}

TEST(Commands, ConvergenceSinglePointWarns) {
  auto c = parse_config("study: {deltas: [0.1]}");
  c.output_dir = scratch("single");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_convergence(c, out, err), cli::kOk);
  EXPECT_NE(err.str().find("slopes need at least 3"), std::string::npos);
  EXPECT_NE(slurp(c.output_dir / "rates.csv").find("# slopes: unavailable"), std::string::npos);
}

TEST(Commands, VerifyDefaultPassesAndGuardFails) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_verify(parse_config(""), out, err), cli::kOk);
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);

  std::ostringstream out2;
  EXPECT_EQ(cli::cmd_verify(parse_config("mesh: {h_nonlocal: 0.1}"), out2, err), cli::kVerifyFailed);
  EXPECT_NE(out2.str().find("FAIL resolution guard"), std::string::npos);
}

TEST(Commands, VerifySeedChangesSamplesNotStatus) {
  std::ostringstream a, b, err;
  EXPECT_EQ(cli::cmd_verify(parse_config("run: {seed: 1}"), a, err), cli::kOk);
  EXPECT_EQ(cli::cmd_verify(parse_config("run: {seed: 2}"), b, err), cli::kOk);
  EXPECT_NE(a.str(), b.str());
}

TEST(Commands, KernelInfo) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_kernel_info("quadratic", 1, out, err), cli::kOk);
  EXPECT_NE(out.str().find("alpha_1 = 1.640625"), std::string::npos);
  std::ostringstream out2;
  cli::cmd_kernel_info("quadratic", 2, out2, err);
  EXPECT_NE(out2.str().find("alpha_2 = 0.9549296"), std::string::npos);
  EXPECT_THROW(cli::cmd_kernel_info("nosuch", 1, out, err), ConfigError);
}

TEST(Commands, ExitCodes) {
  std::ostringstream out, err;
  auto call = [&](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  EXPECT_EQ(call({"nlcouple", "kernel-info", "--profile", "nosuch"}), cli::kConfigError);
  EXPECT_EQ(call({"nlcouple", "solve", "--config", "/nonexistent.yaml"}), cli::kConfigError);
  EXPECT_EQ(call({"nlcouple", "bogus"}), cli::kConfigError);
  const auto dir = scratch("exit");
  std::ofstream(dir / "big.yaml") << "kernel: {delta: 0.3}\n";
  EXPECT_EQ(call({"nlcouple", "solve", "--config", (dir / "big.yaml").string()}), cli::kConfigError);
  EXPECT_NE(err.str().find("2*delta"), std::string::npos);
  EXPECT_EQ(call({"nlcouple", "kernel-info", "--dim", "2"}), cli::kOk);
}

}  // namespace
}  // namespace nlc
