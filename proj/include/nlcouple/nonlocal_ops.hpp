#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nlcouple/geometry.hpp"
#include "nlcouple/kernel.hpp"
#include "nlcouple/p1_space.hpp"

namespace nlc {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Kernel stencils and weight functions on Omega_NL.
///
/// Evaluation points are the NL cell centers and the Gamma nodes. The R
/// stencils use the midpoint rule in every cell; the Rbar stencils hold exact
/// cell integrals, so Rbar-weights are free of quadrature error.
struct NonlocalWeights {
  double delta = 0.0;

  /// (i, j): midpoint integral of R_delta(x_i, .) over NL cell j.
  RowSparse r_cells;
  /// (k, j): same with x at Gamma node k.
  RowSparse r_gamma;
  /// (i, j): int over NL cell j of Rbar_delta(x_i, .).
  RowSparse rbar_cells;
  /// (k, j): same with x at Gamma node k.
  RowSparse rbar_gamma;

  std::vector<double> w;           // w_delta at NL cells
  std::vector<double> wbar;        // wbar_delta at NL cells
  std::vector<double> w_gamma;     // w_delta at Gamma nodes
  std::vector<double> wbar_gamma;  // wbar_delta at Gamma nodes
  /// int_Gamma Rbarbar_delta(gamma_k, y) dS_y.
  std::vector<double> rbarbar_surface;

  std::size_t num_cells() const { return w.size(); }
  std::size_t num_gamma() const { return w_gamma.size(); }
};

/// zeta_delta at the Gamma nodes.
struct InterfaceWeights {
  std::vector<double> zeta;
  double delta = 0.0;
};

struct CompatibilityShift {
  double fbar = 0.0;
};

/// Source data of the coupled system.
struct SourceData {
  std::function<double(double)> f;  // reduced-coordinate source
  Eigen::VectorXd f_local;          // f at the local vertices
  Eigen::VectorXd local_load;       // int rho f phi_i
  Eigen::VectorXd f_nonlocal;       // f_NL at NL centers, f-bar included
  double fbar = 0.0;
};

/// Midpoint rule for R, exact cell integrals for Rbar. Requires the NL mesh
/// spacing h <= delta / 4; throws ConfigError otherwise.
NonlocalWeights compute_weights(const Geometry& geometry, const VolumeMesh& mesh_nl,
                                const SurfaceQuadrature& gamma, const ScaledKernel& kernel);

/// zeta_k = 2 delta^2 / wbar(gamma_k) * int_Gamma Rbarbar(gamma_k, y) dS_y.
/// Throws Error on a vanishing wbar.
InterfaceWeights compute_zeta(const SurfaceQuadrature& gamma, const NonlocalWeights& weights,
                              const ScaledKernel& kernel);

enum class Average { Bar, BarBar };

/// Location where an average is evaluated.
struct EvalPoint {
  bool on_gamma = false;
  std::size_t index = 0;
};

/// Kernel average of NL cell data with the matching weight.
double bar_average(const NonlocalWeights& weights, std::span<const double> u, EvalPoint at,
                   Average kind);
/// bar_average at every NL cell.
Eigen::VectorXd bar_average_cells(const NonlocalWeights& weights, const Eigen::VectorXd& u,
                                  Average kind);
/// bar_average at every Gamma node.
Eigen::VectorXd bar_average_gamma(const NonlocalWeights& weights, const Eigen::VectorXd& u,
                                  Average kind);

/// g_i = int_{Omega_NL} Rbar_delta(x_i, y) f(y) dy at every NL center, with
/// f integrated by Gauss-Legendre inside each cell.
Eigen::VectorXd smoothed_source(const KernelIntegrator& integrator, const VolumeMesh& mesh_nl,
                                const std::function<double(double)>& f);

/// f-bar such that the discrete compatibility
///   sum_i load_i + sum_j |c_j| (g_j + fbar) = 0
/// holds exactly.
CompatibilityShift compute_fbar(const std::function<double(double)>& f, const Geometry& geometry,
                                const Meshes& meshes, const ScaledKernel& kernel);

SourceData assemble_source(const std::function<double(double)>& f, const Geometry& geometry,
                           const Meshes& meshes, const ScaledKernel& kernel,
                           const CompatibilityShift& shift);

/// sum over both regions of f integrated with the assembly rules.
double discrete_compatibility(const SourceData& source, const Meshes& meshes);

}  // namespace nlc
