#include <ostream>

#include <CLI11.hpp>
#include <fmt/ostream.h>

#include "nlcouple/cli.hpp"
#include "nlcouple/error.hpp"
#include "nlcouple/parallel.hpp"

namespace nlc::cli {

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "YAML run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Override run.seed");
  cmd->add_option("--out", flags.out, "Override output.dir");
  cmd->add_option("--threads", flags.threads, "Worker threads (0 = hardware concurrency)");
}

RunConfig resolve(const RunFlags& flags) {
  RunConfig c = flags.config.empty() ? parse_config("") : load_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.output_dir = *flags.out;
  if (flags.threads) c.threads = *flags.threads;
  set_thread_count(c.threads);
  return c;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local-nonlocal coupled diffusion solver and verification harness", "nlcouple"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* solve = app.add_subcommand("solve", "Assemble and solve one configuration");
  auto* conv = app.add_subcommand("convergence", "Sweep the horizon and fit convergence rates");
  auto* verify = app.add_subcommand("verify", "Run the property suite (PASS/FAIL per item)");
  for (auto* cmd : {solve, conv, verify}) add_run_flags(cmd, flags);

  std::string profile = "quadratic";
  int dimension = 1;
  auto* info = app.add_subcommand("kernel-info", "Print kernel constants and consistency residuals");
  info->add_option("--profile", profile, "Built-in profile name");
  info->add_option("--dim", dimension, "Spatial dimension (1 or 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*info) return cmd_kernel_info(profile, dimension, out, err);
    const RunConfig config = resolve(flags);
    if (*solve) return cmd_solve(config, out, err);
    if (*conv) return cmd_convergence(config, out, err);
    return cmd_verify(config, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const SolverError& e) {
    fmt::print(err, "solver error: {}\n", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kSolverError;
  }
}

}  // namespace nlc::cli
