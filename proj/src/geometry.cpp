#include "nlcouple/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nlcouple/error.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(GeometryMode mode) {
  return mode == GeometryMode::Interval1D ? "interval1d" : "radial2d";
}

std::string_view to_string(Region region) {
  return region == Region::Local ? "L" : "NL";
}

Geometry Geometry::build(GeometryMode mode, double interface_position, double outer,
                         double delta) {
  if (!(interface_position > 0.0)) {
    throw ConfigError("degenerate region: interface position must be positive (got " +
                      std::to_string(interface_position) + ")");
  }
  if (!(outer > interface_position)) {
    throw ConfigError("degenerate region: interface must lie strictly inside the outer boundary");
  }
  if (!(delta > 0.0)) throw ConfigError("horizon delta must be positive");
  Geometry g;
  g.mode_ = mode;
  g.interface_ = interface_position;
  g.outer_ = outer;
  const double support = 2.0 * delta;
  if (!(support < g.interface_to_boundary())) {
    throw ConfigError("horizon too large: 2*delta = " + std::to_string(support) +
                      " must be < dist(Gamma, dOmega) = " +
                      std::to_string(g.interface_to_boundary()));
  }
  if (!(support < g.nonlocal_inradius())) {
    throw ConfigError("horizon too large: 2*delta = " + std::to_string(support) +
                      " must be < inradius(Omega_NL) = " + std::to_string(g.nonlocal_inradius()));
  }
  return g;
}

double Geometry::measure(Region region) const {
  if (mode_ == GeometryMode::Interval1D) {
    return region == Region::Nonlocal ? 2.0 * interface_ : 2.0 * (outer_ - interface_);
  }
  return region == Region::Nonlocal ? kPi * interface_ * interface_
                                    : kPi * (outer_ * outer_ - interface_ * interface_);
}

double Geometry::interface_measure() const {
  return mode_ == GeometryMode::Interval1D ? 2.0 : 2.0 * kPi * interface_;
}

double Geometry::measure_density(double s) const {
  return mode_ == GeometryMode::Interval1D ? 1.0 : 2.0 * kPi * s;
}

bool Geometry::in_nonlocal(double s) const {
  return mode_ == GeometryMode::Interval1D ? std::abs(s) < interface_ : s < interface_;
}

double VolumeMesh::total_measure() const {
  double total = 0.0;
  for (const auto& c : cells) total += c.measure;
  return total;
}

std::vector<double> VolumeMesh::centers() const {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.center);
  return out;
}

namespace {

void append_uniform(VolumeMesh& mesh, double lo, double hi, double h, bool radial) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / h - 1e-9)));
  const double step = (hi - lo) / static_cast<double>(n);
  mesh.h = step;
  for (std::size_t i = 0; i < n; ++i) {
    Cell c;
    c.lo = lo + step * static_cast<double>(i);
    c.hi = (i + 1 == n) ? hi : lo + step * static_cast<double>(i + 1);
    c.center = 0.5 * (c.lo + c.hi);
    // pi (hi^2 - lo^2) = 2 pi center (hi - lo): the midpoint rule is exact here.
    c.measure = radial ? kPi * (c.hi * c.hi - c.lo * c.lo) : (c.hi - c.lo);
    mesh.cells.push_back(c);
  }
}

}  // namespace

VolumeMesh volume_mesh(const Geometry& geometry, Region region, double h) {
  if (!(h > 0.0)) throw ConfigError("mesh resolution h must be positive");
  VolumeMesh mesh;
  mesh.region = region;
  mesh.mode = geometry.mode();
  const double a = geometry.interface_position();
  const double outer = geometry.outer();
  if (geometry.mode() == GeometryMode::Interval1D) {
    if (region == Region::Nonlocal) {
      append_uniform(mesh, -a, a, h, false);
    } else {
      append_uniform(mesh, -outer, -a, h, false);
      append_uniform(mesh, a, outer, h, false);
    }
  } else {
    if (region == Region::Nonlocal) {
      append_uniform(mesh, 0.0, a, h, true);
    } else {
      append_uniform(mesh, a, outer, h, true);
    }
  }
  return mesh;
}

double SurfaceQuadrature::total_measure() const {
  double total = 0.0;
  for (const auto& n : nodes) total += n.weight;
  return total;
}

SurfaceQuadrature interface_quadrature(const Geometry& geometry) {
  SurfaceQuadrature q;
  const double a = geometry.interface_position();
  if (geometry.mode() == GeometryMode::Interval1D) {
    q.nodes.push_back({-a, Point{-a, 0.0}, 1.0, Point{-1.0, 0.0}});
    q.nodes.push_back({a, Point{a, 0.0}, 1.0, Point{1.0, 0.0}});
  } else {
    q.nodes.push_back({a, Point{a, 0.0}, 2.0 * kPi * a, Point{1.0, 0.0}});
  }
  return q;
}

Meshes build_meshes(const Geometry& geometry, double h_local, double h_nonlocal) {
  return Meshes{volume_mesh(geometry, Region::Local, h_local),
                volume_mesh(geometry, Region::Nonlocal, h_nonlocal), interface_quadrature(geometry)};
}

std::vector<std::size_t> neighbors_within(const VolumeMesh& mesh, const Point& point,
                                          double radius) {
  const double p = mesh.mode == GeometryMode::Interval1D ? point.x : std::hypot(point.x, point.y);
  const auto first = std::lower_bound(mesh.cells.begin(), mesh.cells.end(), p - radius,
                                      [](const Cell& c, double v) { return c.center < v; });
  std::vector<std::size_t> out;
  for (auto it = first; it != mesh.cells.end() && it->center < p + radius; ++it) {
    if (std::abs(it->center - p) < radius) {
      out.push_back(static_cast<std::size_t>(it - mesh.cells.begin()));
    }
  }
  return out;
}

double RingKernelTable::entry(Variant v, double ri, double rj) const {
  const double delta = kernel_.delta();
  const double four_d2 = 4.0 * delta * delta;
  const double base = ri * ri + rj * rj;
  const double cross = 2.0 * ri * rj;
  if (cross <= 0.0) {
    return 2.0 * kPi * rj * kernel_.at_distance_sq(v, base);
  }
  const double c = (base - four_d2) / cross;
  if (c >= 1.0) return 0.0;
  const double theta_max = c <= -1.0 ? kPi : std::acos(c);
  auto integrand = [&](double t) { return kernel_.at_distance_sq(v, base - cross * std::cos(t)); };
  return 2.0 * rj * quad::gauss<30>(integrand, 0.0, theta_max);
}

double RingKernelTable::annulus_integral(Variant v, double rp, double lo, double hi,
                                         const std::function<double(double)>& g) const {
  const double support = kernel_.support_radius();
  const double a = std::max(lo, rp - support);
  const double b = std::min(hi, rp + support);
  if (!(b > a)) return 0.0;
  auto integrand = [&](double r) {
    const double k = entry(v, rp, r);
    return g ? k * g(r) : k;
  };
  return quad::gauss_panels<15>(integrand, a, b, {std::abs(rp - support), support - rp});
}

KernelIntegrator::KernelIntegrator(const Geometry& geometry, ScaledKernel kernel)
    : geometry_(geometry), kernel_(kernel), ring_(kernel) {
  if (kernel_.dimension() != geometry_.dimension()) {
    throw ConfigError("kernel dimension does not match geometry dimension");
  }
}

double KernelIntegrator::cell_midpoint(Variant v, double s, const Cell& cell) const {
  if (geometry_.mode() == GeometryMode::Interval1D) {
    const double d = s - cell.center;
    return kernel_.at_distance_sq(v, d * d) * cell.measure;
  }
  return ring_.entry(v, s, cell.center) * (cell.hi - cell.lo);
}

double KernelIntegrator::cell_exact(Variant v, double s, const Cell& cell,
                                    const std::function<double(double)>& g) const {
  if (geometry_.mode() == GeometryMode::RadialDisk2D) {
    return ring_.annulus_integral(v, s, cell.lo, cell.hi, g);
  }
  const double support = kernel_.support_radius();
  const double a = std::max(cell.lo, s - support);
  const double b = std::min(cell.hi, s + support);
  if (!(b > a)) return 0.0;
  auto integrand = [&](double y) {
    const double d = s - y;
    const double k = kernel_.at_distance_sq(v, d * d);
    return g ? k * g(y) : k;
  };
  return quad::gauss_panels<15>(integrand, a, b, {s});
}

double KernelIntegrator::surface_node(Variant v, double s, const SurfaceNode& node) const {
  if (geometry_.mode() == GeometryMode::Interval1D) {
    const double d = s - node.coord;
    return kernel_.at_distance_sq(v, d * d) * node.weight;
  }
  return ring_.entry(v, s, node.coord);
}

double KernelIntegrator::surface(Variant v, double s, const SurfaceQuadrature& gamma) const {
  double total = 0.0;
  for (const auto& node : gamma.nodes) total += surface_node(v, s, node);
  return total;
}

}  // namespace nlc
