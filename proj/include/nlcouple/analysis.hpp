#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nlcouple/assembly.hpp"
#include "nlcouple/reference.hpp"

namespace nlc {

/// Broken H^1 and interface errors of one coupled solve.
struct ErrorReport {
  double h1_L = 0.0;
  double h1_NL = 0.0;
  double l2_gamma = 0.0;
  double combined = 0.0;  // sqrt(h1_L^2 + h1_NL^2 + delta l2_gamma^2)
};

/// Central-difference gradient of NL cell data (second-order one-sided at
/// the ends of each run of cells; reflection at the radial center).
Eigen::VectorXd recovered_gradient(const VolumeMesh& mesh, const Eigen::VectorXd& u);

/// Discrete H^1 norm on Omega_NL from cell values and recovered gradients.
double discrete_h1_nonlocal(const VolumeMesh& mesh, const Eigen::VectorXd& u);

/// H^1 norm of a P1 field by three-point Gauss per element.
double h1_norm(const P1Space& space, const Eigen::VectorXd& u);

ErrorReport error_report(const CoupledModel& model, const FieldTriple& solution,
                         const ManufacturedSolution& exact);

/// Kernel integrals by dense quadrature that is independent of the solver
/// meshes: composite Gauss on the kernel window in 1D; in radial mode, local
/// polar coordinates around x (2048 angular nodes, radius cut at Gamma) for
/// volume integrals and a windowed angular rule for Gamma integrals.
class DenseIntegrals {
 public:
  DenseIntegrals(const Geometry& geometry, const ScaledKernel& kernel);

  /// int_{Omega_NL} K_v(x(s), y) g(y) dy for each variant/function pair, in a
  /// single pass over the quadrature nodes. g takes the reduced coordinate of
  /// y (x in 1D, |y| in radial mode).
  std::vector<double> volume(double s, const std::vector<std::pair<Variant, ScalarFn>>& terms) const;
  double volume(Variant v, double s, const ScalarFn& g) const;
  /// int_Gamma K_v(x(s), y) g(y) dS_y, with g given by the reduced coordinate on Gamma.
  double surface(Variant v, double s, const ScalarFn& g) const;

  /// wbar_delta at a Gamma coordinate, precomputed by the same dense rule.
  double wbar_at_gamma(double coord) const;

  const Geometry& geometry() const { return geometry_; }
  const ScaledKernel& kernel() const { return kernel_; }

 private:
  Geometry geometry_;
  ScaledKernel kernel_;
  std::vector<std::pair<double, double>> wbar_gamma_;  // (coord, wbar)
};

/// r_Gamma at one Gamma node: -lambda2 (u - u barbar) + lambda2 zeta du/dn,
/// with all averages by dense quadrature.
double interface_truncation_at(const DenseIntegrals& dense, const ManufacturedSolution& exact,
                               const SurfaceNode& node);

/// ||r_Gamma||_{L^2(Gamma)}.
double truncation_interface(const ManufacturedSolution& exact, const ScaledKernel& kernel,
                            const Geometry& geometry);

struct NonlocalTruncation {
  double r_nl1 = 0.0;
  double r_nl2 = 0.0;
};

/// Pointwise nonlocal truncation pieces at x(s):
///   r_NL1 = lambda2/delta^2 int R (u(x) - u(y)) - 2 lambda2 int_Gamma Rbar du/dn - int Rbar f,
///   r_NL2 = lambda2 int_Gamma Rbar du/dn (2 wbar - 1) / wbar.
NonlocalTruncation nonlocal_truncation_at(const DenseIntegrals& dense,
                                          const ManufacturedSolution& exact, double s,
                                          bool with_r_nl1 = true);

/// L^2(Omega_NL) norms of r_NL1 and r_NL2. Without r_NL1 only the 2 delta band
/// next to Gamma is sampled.
NonlocalTruncation truncation_nonlocal(const ManufacturedSolution& exact,
                                       const ScaledKernel& kernel, const Geometry& geometry,
                                       bool with_r_nl1 = true);

struct TruncationReport {
  double r_gamma_l2 = 0.0;
  double r_nl1_l2 = 0.0;
  double r_nl2_l2 = 0.0;
  double half_integral_max = 0.0;
};

/// max over Gamma nodes of |2 wbar - 1|.
double half_integral_check(const NonlocalWeights& weights);

/// Least-squares line through (log x, log y).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log residuals
  bool at_roundoff = false;  // every value below 1e-11; the slope is noise
  bool preasymptotic() const { return residual > 0.1; }
  std::string_view status() const {
    return at_roundoff ? "roundoff" : preasymptotic() ? "preasymptotic" : "ok";
  }
};

/// Needs at least 3 points with positive values.
std::optional<RateFit> fit_rate(const std::vector<double>& x, const std::vector<double>& y);

struct RateRow {
  double delta = 0.0;
  double h_local = 0.0;
  double h_nl = 0.0;
  ErrorReport errors;
  double r_gamma = 0.0;
  double r_nl2 = 0.0;
  double half_integral = 0.0;
  double nl_recovery = 0.0;     // relative to ||u_NL||_inf
  double energy_identity = 0.0; // relative mismatch of the diagonal identity
};

struct RateTable {
  std::vector<RateRow> rows;
  std::vector<std::pair<std::string, RateFit>> slopes;
  std::string error;  // non-empty when the study aborted

  std::vector<double> column(const std::string& name) const;
  std::optional<RateFit> slope(const std::string& name) const;
  void write_csv(std::ostream& out) const;
};

/// Maps delta to (h_local, h_nonlocal).
using HRule = std::function<std::pair<double, double>(double)>;

HRule proportional_h_rule(double ratio);

struct StudyOptions {
  std::string profile = "quadratic";
  SolverOptions solver;
  bool truncation = true;  // compute the r_gamma / r_nl2 columns
};

/// Assemble, solve and measure for every delta, then fit slopes. A solver
/// error stops the sweep and is reported in `RateTable::error`.
RateTable convergence_study(const ManufacturedSolution& exact, const std::vector<double>& deltas,
                            const HRule& h_rule, const StudyOptions& options = {});

/// Discrete norm used for coercivity: ||w_L||_{H^1}^2 + ||w_NL||_{L^2}^2.
double htilde_norm_sq(const CoupledModel& model, const FieldPair& w);

/// Subtracts the constant that makes int w_L + int w_NL vanish.
void project_zero_mean(const CoupledModel& model, FieldPair& w);

struct CoercivitySample {
  double min_ratio = 0.0;                // min B[w;w] / ||w||^2
  double max_ratio_times_delta_sq = 0.0; // max |B[u;v]| delta^2 / (||u|| ||v||)
};

CoercivitySample coercivity_sample(const CoupledModel& model, int n_samples, std::uint64_t seed);

/// Largest mismatch between the assembled operator applied to the error
/// (exact samples minus solution) and an independent matrix-free evaluation
/// of the discrete truncation residuals.
double error_system_residual(const CoupledModel& model, const BlockSystem& system,
                             const CoupledSolution& solution, const ManufacturedSolution& exact);

/// (||u_L||_{H^1}^2 + ||u_NL||_{H^1}^2 + delta ||u_Gamma||^2) / ||f||^2.
double stability_ratio(const CoupledModel& model, const CoupledSolution& solution, double f_l2);

/// L^2(Omega) distance between the coupled solution (P1 on Omega_L, cell
/// values on Omega_NL) and the transmission oracle.
double oracle_distance(const CoupledModel& model, const CoupledSolution& solution,
                       const OracleSolution& oracle);

/// One full solve of a catalog case: model, source, system and solution.
struct CaseRun {
  CoupledModel model;
  SourceData source;
  BlockSystem system;
  CoupledSolution solution;
};

CaseRun run_case(const ManufacturedSolution& exact, const ScaledKernel& kernel, double h_local,
                 double h_nonlocal, const SolverOptions& solver = {});

/// Same with an arbitrary source on a given geometry.
CaseRun run_source(const ProblemSpec& spec, const ScalarFn& f, double h_local, double h_nonlocal,
                   const SolverOptions& solver = {});

}  // namespace nlc
