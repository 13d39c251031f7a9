#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlcouple/analysis.hpp"
#include "nlcouple/assembly.hpp"
#include "nlcouple/kernel.hpp"
#include "nlcouple/reference.hpp"

namespace nlc {

/// Everything one CLI run needs, validated on load.
///
/// The file is YAML with the blocks geometry, kernel, mesh, problem, solver,
/// study, output and run. Unknown blocks or keys are errors.
struct RunConfig {
  GeometryMode mode = GeometryMode::Interval1D;
  double interface_position = 0.5;  // a, or R1
  double outer = 1.0;               // outer half-length, or R2

  std::string profile = "quadratic";
  std::optional<std::filesystem::path> kernel_table;
  double delta = 0.1;

  /// Absent sizes default to delta * h_ratio.
  std::optional<double> h_local;
  std::optional<double> h_nonlocal;

  double lambda1 = 1.0;
  double lambda2 = 2.0;
  /// Exactly one of these is set after validation; case "mc1" by default.
  std::optional<std::string> case_id;
  std::optional<std::string> source;

  SolverOptions solver;

  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  double h_ratio = 0.125;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 7;
  unsigned threads = 1;

  KernelProfile kernel_profile() const;
  ScaledKernel kernel() const;
  ScaledKernel kernel(double delta) const;
  /// (h_local, h_nonlocal) at the configured delta.
  std::pair<double, double> mesh_sizes() const;
  /// Throws ConfigError when delta is too large for the geometry.
  ProblemSpec problem_spec() const;
  /// The manufactured case, if one is configured.
  std::optional<ManufacturedSolution> exact() const;
  /// Source function: the manufactured source, a named source, or a seeded
  /// random band-limited source ("random").
  ScalarFn source_function() const;
  HRule h_rule() const;
};

/// Throws ConfigError with the offending key on any problem.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace nlc
