#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nlcouple/geometry.hpp"
#include "nlcouple/p1_space.hpp"

namespace nlc {

using ScalarFn = std::function<double(double)>;

/// Exact solution of the transmission problem in the reduced coordinate s.
///
/// Each region carries its own smooth closed form, so u_nl and u_l (and
/// their derivatives) can be evaluated on either side of Gamma. The global
/// mean shift is folded in: int_Omega u = 0.
struct ManufacturedSolution {
  std::string id;
  GeometryMode mode = GeometryMode::Interval1D;
  double interface_position = 0.5;
  double outer = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  ScalarFn u_nl, du_nl;  // nonlocal piece and its s-derivative
  ScalarFn u_l, du_l;    // local piece and its s-derivative
  ScalarFn f_nl, f_l;    // -lambda2 Lap u_nl, -lambda1 Lap u_l

  /// u or f by region membership of s.
  double u(double s) const;
  double du(double s) const;
  double f(double s) const;
  ScalarFn source() const;
  bool in_nonlocal(double s) const;

  /// d u / d n at a Gamma node from the nonlocal side (n points into Omega_L).
  double dn_nonlocal(const SurfaceNode& node) const;
  /// Same from the local side.
  double dn_local(const SurfaceNode& node) const;

  Geometry geometry(double delta) const;
};

/// Catalog: "mc1", "mc2" (Interval1D, Gamma = {-a, a}, outer 1) and "mcR1"
/// (RadialDisk2D, R1 = a, R2 = outer). Throws ConfigError for unknown ids or
/// non-positive lambdas.
ManufacturedSolution manufactured_case(std::string_view id, double lambda1, double lambda2,
                                       double interface_position = 0.5, double outer = 1.0);

std::vector<std::string> manufactured_case_ids();

/// Source catalog for runs without an exact solution: "cos_pi", "sin_pi",
/// "zero". Every entry integrates to zero over the symmetric interval.
ScalarFn named_source(std::string_view name);

/// Random band-limited source on the interval (-outer, outer),
///   f(x) = sum_{k=1}^{modes} a_k cos(k pi x / outer) + b_k sin(k pi x / outer),
/// with standard normal coefficients scaled by 1/k. Every term has zero mean.
ScalarFn random_bandlimited_source(std::uint64_t seed, int modes, double outer);

/// L^2(Omega) norm of a source by composite Gauss quadrature.
double source_l2_norm(const ScalarFn& f, const Geometry& geometry, int panels = 2000);

/// P1 finite element solution of the transmission weak form on the whole
/// domain, with vertices on Gamma and a zero-mean multiplier.
struct OracleSolution {
  P1Space space;
  Eigen::VectorXd u;
  double h = 0.0;
  double value(double s) const { return space.value(u, s); }
};

/// Throws Error when the discrete integral of f exceeds 1e-8 in magnitude.
OracleSolution solve_transmission_fem(const Geometry& geometry, double lambda1, double lambda2,
                                      const ScalarFn& f, double h);

}  // namespace nlc
