#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "nlcouple/kernel.hpp"
#include "nlcouple/point.hpp"

namespace nlc {

/// Two supported geometry families. Both reduce to a single coordinate s:
/// the abscissa x for Interval1D and the radius r for RadialDisk2D.
enum class GeometryMode { Interval1D, RadialDisk2D };

enum class Region { Local, Nonlocal };

std::string_view to_string(GeometryMode mode);
std::string_view to_string(Region region);

/// Omega split by the interface Gamma into the enclosed nonlocal region and
/// the surrounding local region.
///
/// Interval1D: Omega = (-outer, outer), Omega_NL = (-a, a), Gamma = {-a, a}.
/// RadialDisk2D: Omega = disk of radius outer (R2), Omega_NL = disk of radius
/// a (R1), Gamma = circle of radius R1.
///
/// The interface normal points from Omega_NL into Omega_L.
class Geometry {
 public:
  /// Validates 0 < a < outer, 2 delta < dist(Gamma, dOmega) and
  /// 2 delta < inradius(Omega_NL). Throws ConfigError otherwise.
  static Geometry build(GeometryMode mode, double interface_position, double outer, double delta);

  GeometryMode mode() const { return mode_; }
  int dimension() const { return mode_ == GeometryMode::Interval1D ? 1 : 2; }

  /// a in 1D, R1 in radial mode.
  double interface_position() const { return interface_; }
  /// Outer half-length in 1D, R2 in radial mode.
  double outer() const { return outer_; }

  double measure(Region region) const;
  double total_measure() const { return measure(Region::Local) + measure(Region::Nonlocal); }
  double interface_measure() const;

  double interface_to_boundary() const { return outer_ - interface_; }
  double nonlocal_inradius() const { return interface_; }

  /// Density of the volume measure in the reduced coordinate: 1, or 2 pi r.
  double measure_density(double s) const;

  /// Embedding of the reduced coordinate: (x, 0) or (r, 0).
  Point point(double s) const { return Point{s, 0.0}; }

  bool in_nonlocal(double s) const;

 private:
  GeometryMode mode_ = GeometryMode::Interval1D;
  double interface_ = 0.5;
  double outer_ = 1.0;
};

/// One uniform cell: a segment in 1D, a ring [lo, hi] in radial mode.
struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;   // midpoint coordinate
  double measure = 0.0;  // length, or ring area 2 pi center (hi - lo)
};

/// Uniform cells covering one region exactly.
struct VolumeMesh {
  Region region = Region::Nonlocal;
  GeometryMode mode = GeometryMode::Interval1D;
  double h = 0.0;
  std::vector<Cell> cells;  // sorted by center

  std::size_t size() const { return cells.size(); }
  double total_measure() const;
  std::vector<double> centers() const;
};

/// Uniform partition with spacing at most `h` (each connected piece is split
/// into ceil(length / h) equal cells).
VolumeMesh volume_mesh(const Geometry& geometry, Region region, double h);

struct SurfaceNode {
  double coord = 0.0;  // x, or the radius R1
  Point point;
  double weight = 0.0;
  Point normal;  // unit normal from Omega_NL into Omega_L
};

/// Quadrature for integrals over Gamma. 1D: the two endpoints with unit
/// weight. Radial: a single representative node of weight 2 pi R1; by
/// rotational symmetry it stands for the whole circle.
struct SurfaceQuadrature {
  std::vector<SurfaceNode> nodes;
  double total_measure() const;
  std::size_t size() const { return nodes.size(); }
};

SurfaceQuadrature interface_quadrature(const Geometry& geometry);

/// The three discretization objects of one run.
struct Meshes {
  VolumeMesh local;
  VolumeMesh nonlocal;
  SurfaceQuadrature gamma;
};

Meshes build_meshes(const Geometry& geometry, double h_local, double h_nonlocal);

/// Indices of cells whose center lies strictly within `radius` of `point`
/// (for rings: whose radius is within `radius` of |point|).
std::vector<std::size_t> neighbors_within(const VolumeMesh& mesh, const Point& point,
                                          double radius);

/// Angularly integrated kernel for radially symmetric data:
///
///   K(r_i, r_j) = int_0^{2 pi} R_delta((r_i, 0), (r_j cos t, r_j sin t)) r_j dt.
///
/// The angular integral is restricted to the arc inside the kernel support
/// and evaluated by Gauss-Legendre; the integrand is a polynomial in cos t on
/// that arc, so the rule converges spectrally.
class RingKernelTable {
 public:
  explicit RingKernelTable(ScaledKernel kernel) : kernel_(std::move(kernel)) {}

  const ScaledKernel& kernel() const { return kernel_; }

  double entry(Variant v, double ri, double rj) const;

  /// int over the annulus lo <= |y| <= hi of R_delta((rp, 0), y) g(|y|) dy.
  double annulus_integral(Variant v, double rp, double lo, double hi,
                          const std::function<double(double)>& g = {}) const;

 private:
  ScaledKernel kernel_;
};

/// Kernel integrals over cells and over Gamma for either geometry family,
/// with the evaluation point given by its reduced coordinate.
class KernelIntegrator {
 public:
  KernelIntegrator(const Geometry& geometry, ScaledKernel kernel);

  const ScaledKernel& kernel() const { return kernel_; }
  const Geometry& geometry() const { return geometry_; }

  /// Kernel at the cell center times the cell measure. Radial mode integrates
  /// the angle exactly and applies the midpoint rule in r only.
  double cell_midpoint(Variant v, double s, const Cell& cell) const;

  /// int_cell R_delta(x(s), y) g(y) dy, accurate to near machine precision
  /// (Gauss-Legendre split at the support edges). g defaults to 1.
  double cell_exact(Variant v, double s, const Cell& cell,
                    const std::function<double(double)>& g = {}) const;

  /// Contribution of surface node k to int_Gamma R_delta(x(s), y) dS_y.
  double surface_node(Variant v, double s, const SurfaceNode& node) const;

  /// int_Gamma R_delta(x(s), y) dS_y.
  double surface(Variant v, double s, const SurfaceQuadrature& gamma) const;

 private:
  Geometry geometry_;
  ScaledKernel kernel_;
  RingKernelTable ring_;
};

}  // namespace nlc
