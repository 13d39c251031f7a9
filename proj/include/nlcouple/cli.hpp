#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "nlcouple/config.hpp"

namespace nlc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kConfigError = 2,
  kSolverError = 3,
};

/// One solve. Writes solution.csv plus gnuplot files per region, and
/// errors.csv when the problem is a manufactured case.
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Convergence sweep over study.deltas. Writes rates.csv and one gnuplot
/// file per metric.
int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Property suite; one PASS/FAIL line per item, exit 0 iff all pass.
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Normalization constant, nondegeneracy bound and antiderivative residuals
/// of a profile.
int cmd_kernel_info(std::string_view profile, int dimension, std::ostream& out, std::ostream& err);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Full command line: subcommand, flags, error-to-exit-code mapping.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nlc::cli
