#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nlcouple/geometry.hpp"
#include "nlcouple/kernel.hpp"
#include "nlcouple/nonlocal_ops.hpp"
#include "nlcouple/p1_space.hpp"

namespace nlc {

/// Diffusion coefficients, geometry and kernel of one coupled problem.
struct ProblemSpec {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  Geometry geometry;
  ScaledKernel kernel;

  /// Throws ConfigError unless both lambdas are positive.
  void validate() const;
};

/// Everything that depends on the operator but not on the source: meshes,
/// local FE space, nonlocal stencils, zeta and the Gamma-to-vertex map.
struct CoupledModel {
  ProblemSpec spec;
  Meshes meshes;
  P1Space local;
  NonlocalWeights weights;
  InterfaceWeights zeta;
  std::vector<std::size_t> gamma_dofs;  // local vertex at each Gamma node
  Eigen::SparseMatrix<double> stiffness;  // unscaled P1 stiffness
  Eigen::VectorXd local_mean;             // int rho phi_i

  static CoupledModel build(const ProblemSpec& spec, double h_local, double h_nonlocal);

  std::size_t n_local() const { return local.num_dofs(); }
  std::size_t n_nonlocal() const { return meshes.nonlocal.size(); }
  std::size_t n_gamma() const { return meshes.gamma.size(); }
  double delta() const { return spec.kernel.delta(); }
  /// Cell measures of the NL mesh as a vector.
  Eigen::VectorXd nonlocal_measures() const;
  /// Surface coupling (i, k): cell average of s_k Rbar_delta(., gamma_k) over NL cell i.
  double surface_coupling(std::size_t i, std::size_t k) const;
};

/// Block operator with unknowns ordered [u_L | u_NL | u_Gamma | multiplier]
/// and rows [local | nonlocal | interface | mean constraint].
struct BlockSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::size_t n_local = 0;
  std::size_t n_nonlocal = 0;
  std::size_t n_gamma = 0;

  std::size_t offset_nonlocal() const { return n_local; }
  std::size_t offset_gamma() const { return n_local + n_nonlocal; }
  std::size_t offset_multiplier() const { return n_local + n_nonlocal + n_gamma; }
  std::size_t size() const { return offset_multiplier() + 1; }
};

struct CoupledSolution {
  Eigen::VectorXd u_local;
  Eigen::VectorXd u_nonlocal;
  Eigen::VectorXd u_gamma;
  double multiplier = 0.0;
  double residual = 0.0;    // ||A x - b|| / max(||b||, 1)
  double constraint = 0.0;  // int u_L + int u_NL
  int iterations = 0;       // 0 for the direct solver
};

enum class SolverMethod { Direct, Iterative };

SolverMethod solver_method_from(std::string_view name);

struct SolverOptions {
  SolverMethod method = SolverMethod::Direct;
  double tol = 1e-12;
  int restart = 200;
  int max_iterations = 20000;
};

/// Throws Error on mesh/Gamma misalignment (via CoupledModel::build).
BlockSystem assemble_system(const CoupledModel& model, const SourceData& source);

/// Throws SolverError on factorization failure, non-convergence or a
/// residual far above the solver tolerance.
CoupledSolution solve(const BlockSystem& system, const CoupledModel& model,
                      const SolverOptions& options = {});

/// Pair (u_L, u_NL) and triple (u_L, u_NL, u_Gamma) of discrete fields.
struct FieldPair {
  Eigen::VectorXd local;
  Eigen::VectorXd nonlocal;
};

struct FieldTriple {
  Eigen::VectorXd local;
  Eigen::VectorXd nonlocal;
  Eigen::VectorXd gamma;
};

FieldTriple as_triple(const CoupledSolution& s);

/// u_Gamma = (u_L - u_NL barbar) / zeta at every Gamma node.
Eigen::VectorXd interface_unknown(const CoupledModel& model, const FieldPair& u);

/// B[u; v] with u_Gamma(u) eliminated.
double bilinear_B(const CoupledModel& model, const FieldPair& u, const FieldPair& v);

/// B-hat[u; v]: the discrete weak form of all three row groups, tested with
/// (v_L, |c| v_NL, s v_Gamma).
double bilinear_Bhat(const CoupledModel& model, const FieldTriple& u, const FieldTriple& v);

/// Right-hand side paired with a test triple: (f_L, v_L) + sum |c_i| f_NL v_NL.
double source_pairing(const CoupledModel& model, const SourceData& source, const FieldTriple& v);

/// Diagonal energy decomposition, each part evaluated directly.
struct EnergyParts {
  double local = 0.0;      // lambda1 ||grad u_L||^2
  double interface = 0.0;  // lambda2 int_Gamma zeta u_Gamma^2
  double nonlocal = 0.0;   // lambda2 / (2 delta^2) sum_ij |c_i| R_ij (u_i - u_j)^2
  double total() const { return local + interface + nonlocal; }
};

EnergyParts energy_parts(const CoupledModel& model, const FieldTriple& u);

/// max_i |u_NL - (u_NL bar + interface term + source term)|: the NL row
/// rearranged as a recovery identity.
double nl_recovery_residual(const CoupledModel& model, const CoupledSolution& solution,
                            const SourceData& source);

}  // namespace nlc
