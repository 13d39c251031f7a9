#include "nlcouple/reference.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseLU>

#include "nlcouple/error.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {

namespace {
constexpr double kPi = std::numbers::pi;
}

double ManufacturedSolution::u(double s) const {
  return in_nonlocal(s) ? u_nl(s) : u_l(s);
}

double ManufacturedSolution::du(double s) const {
  return in_nonlocal(s) ? du_nl(s) : du_l(s);
}

double ManufacturedSolution::f(double s) const {
  return in_nonlocal(s) ? f_nl(s) : f_l(s);
}

bool ManufacturedSolution::in_nonlocal(double s) const {
  return mode == GeometryMode::Interval1D ? std::abs(s) < interface_position
                                          : s < interface_position;
}

ScalarFn ManufacturedSolution::source() const {
  return [self = *this](double s) { return self.f(s); };
}

double ManufacturedSolution::dn_nonlocal(const SurfaceNode& node) const {
  return du_nl(node.coord) * node.normal.x;
}

double ManufacturedSolution::dn_local(const SurfaceNode& node) const {
  return du_l(node.coord) * node.normal.x;
}

Geometry ManufacturedSolution::geometry(double delta) const {
  return Geometry::build(mode, interface_position, outer, delta);
}

namespace {

// Local piece c0 + c2 (|s| - L)^2 with zero normal derivative at |s| = L.
void set_local_parabola(ManufacturedSolution& m, double c0, double c2, double shift) {
  const double L = m.outer;
  const double l1 = m.lambda1;
  m.u_l = [=](double s) { return c0 + c2 * (std::abs(s) - L) * (std::abs(s) - L) - shift; };
  m.du_l = [=](double s) { return 2 * c2 * (std::abs(s) - L) * (s < 0 ? -1.0 : 1.0); };
  m.f_l = [=](double) { return -2 * l1 * c2; };
}

ManufacturedSolution interval_case(std::string_view id, double l1, double l2, double a, double L) {
  ManufacturedSolution m;
  m.id = std::string(id);
  m.mode = GeometryMode::Interval1D;
  m.interface_position = a;
  m.outer = L;
  m.lambda1 = l1;
  m.lambda2 = l2;
  double c0 = 0.0, c2 = 0.0, nl_integral = 0.0;
  if (id == "mc1") {
    c2 = -l2 * kPi * std::sin(kPi * a) / (2 * l1 * (a - L));
    c0 = std::cos(kPi * a) - c2 * (a - L) * (a - L);
    nl_integral = 2 * std::sin(kPi * a) / kPi;
  } else {
    c2 = l2 * a / (l1 * (L - a));
    c0 = -a * a - c2 * (a - L) * (a - L);
    nl_integral = -2 * a * a * a / 3;
  }
  const double b = L - a;
  const double local_integral = 2 * (c0 * b + c2 * b * b * b / 3);
  const double shift = (nl_integral + local_integral) / (2 * L);
  if (id == "mc1") {
    m.u_nl = [=](double s) { return std::cos(kPi * s) - shift; };
    m.du_nl = [=](double s) { return -kPi * std::sin(kPi * s); };
    m.f_nl = [=](double s) { return l2 * kPi * kPi * std::cos(kPi * s); };
  } else {
    m.u_nl = [=](double s) { return -s * s - shift; };
    m.du_nl = [=](double s) { return -2 * s; };
    m.f_nl = [=](double) { return 2 * l2; };
  }
  set_local_parabola(m, c0, c2, shift);
  return m;
}

ManufacturedSolution radial_case(double l1, double l2, double r1, double r2) {
  ManufacturedSolution m;
  m.id = "mcR1";
  m.mode = GeometryMode::RadialDisk2D;
  m.interface_position = r1;
  m.outer = r2;
  m.lambda1 = l1;
  m.lambda2 = l2;
  const double c2 = l2 * r1 / (l1 * (r2 - r1));
  const double c0 = -r1 * r1 - c2 * (r1 - r2) * (r1 - r2);
  const double b = r2 - r1;
  const double nl_integral = -kPi * std::pow(r1, 4) / 2;
  const double local_integral = c0 * kPi * (r2 * r2 - r1 * r1) +
                                2 * kPi * c2 * (-std::pow(b, 4) / 4 + r2 * std::pow(b, 3) / 3);
  const double shift = (nl_integral + local_integral) / (kPi * r2 * r2);
  m.u_nl = [=](double r) { return -r * r - shift; };
  m.du_nl = [=](double r) { return -2 * r; };
  m.f_nl = [=](double) { return 4 * l2; };
  m.u_l = [=](double r) { return c0 + c2 * (r - r2) * (r - r2) - shift; };
  m.du_l = [=](double r) { return 2 * c2 * (r - r2); };
  m.f_l = [=](double r) { return -l1 * c2 * (4 - 2 * r2 / r); };
  return m;
}

}  // namespace

ManufacturedSolution manufactured_case(std::string_view id, double lambda1, double lambda2,
                                       double interface_position, double outer) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw ConfigError("lambda1 and lambda2 must be positive");
  }
  if (!(interface_position > 0.0) || !(outer > interface_position)) {
    throw ConfigError("degenerate region: need 0 < a < outer");
  }
  if (id == "mc1" || id == "mc2") return interval_case(id, lambda1, lambda2, interface_position, outer);
  if (id == "mcR1") return radial_case(lambda1, lambda2, interface_position, outer);
  throw ConfigError("unknown manufactured case '" + std::string(id) + "' (mc1|mc2|mcR1)");
}

std::vector<std::string> manufactured_case_ids() { return {"mc1", "mc2", "mcR1"}; }

ScalarFn named_source(std::string_view name) {
  if (name == "cos_pi") return [](double x) { return std::cos(kPi * x); };
  if (name == "sin_pi") return [](double x) { return std::sin(kPi * x); };
  if (name == "zero") return [](double) { return 0.0; };
  throw ConfigError("unknown source '" + std::string(name) + "' (cos_pi|sin_pi|zero)");
}

ScalarFn random_bandlimited_source(std::uint64_t seed, int modes, double outer) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    a[static_cast<std::size_t>(k)] = normal(rng) / (k + 1);
    b[static_cast<std::size_t>(k)] = normal(rng) / (k + 1);
  }
  return [a, b, outer](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double t = static_cast<double>(k + 1) * kPi * x / outer;
      s += a[k] * std::cos(t) + b[k] * std::sin(t);
    }
    return s;
  };
}

double source_l2_norm(const ScalarFn& f, const Geometry& geometry, int panels) {
  const double a = geometry.interface_position();
  const double L = geometry.outer();
  auto sq = [&](double s) { return geometry.measure_density(s) * f(s) * f(s); };
  auto composite = [&](double lo, double hi) {
    double total = 0.0;
    const double step = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) total += quad::gauss<10>(sq, lo + p * step, lo + (p + 1) * step);
    return total;
  };
  if (geometry.mode() == GeometryMode::Interval1D) {
    return std::sqrt(composite(-L, -a) + composite(-a, a) + composite(a, L));
  }
  return std::sqrt(composite(0.0, a) + composite(a, L));
}

OracleSolution solve_transmission_fem(const Geometry& geometry, double lambda1, double lambda2,
                                      const ScalarFn& f, double h) {
  const VolumeMesh local = volume_mesh(geometry, Region::Local, h);
  const VolumeMesh nonlocal = volume_mesh(geometry, Region::Nonlocal, h);
  std::vector<Cell> cells = local.cells;
  cells.insert(cells.end(), nonlocal.cells.begin(), nonlocal.cells.end());
  P1Space space(geometry.mode(), cells);

  std::vector<double> coef(space.num_elements());
  for (std::size_t e = 0; e < coef.size(); ++e) {
    coef[e] = geometry.in_nonlocal(space.elements()[e].center) ? lambda2 : lambda1;
  }
  const Eigen::VectorXd load = space.load(f);
  if (std::abs(load.sum()) > 1e-8) {
    throw Error("incompatible source: int f = " + std::to_string(load.sum()) + " (must vanish)");
  }
  const Eigen::SparseMatrix<double> K = space.stiffness(coef);
  const Eigen::VectorXd mean = space.mean_functional();
  const auto n = static_cast<Eigen::Index>(space.num_dofs());

  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < K.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, n, mean[i]);
    t.emplace_back(n, i, mean[i]);
  }
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs.head(n) = load;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("transmission FEM factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  return OracleSolution{std::move(space), x.head(n), h};
}

}  // namespace nlc
