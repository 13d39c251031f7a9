#include "nlcouple/p1_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCore>

#include "nlcouple/error.hpp"

namespace nlc {

namespace {
// Three-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 3> kGaussX{0.1127016653792583, 0.5, 0.8872983346207417};
constexpr std::array<double, 3> kGaussW{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
}  // namespace

P1Space::P1Space(GeometryMode mode, std::vector<Cell> elements)
    : mode_(mode), elements_(std::move(elements)) {
  std::sort(elements_.begin(), elements_.end(),
            [](const Cell& a, const Cell& b) { return a.center < b.center; });
  dofs_.reserve(elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Cell& c = elements_[e];
    const bool continues = e > 0 && std::abs(elements_[e - 1].hi - c.lo) < 1e-12;
    if (!continues) vertices_.push_back(c.lo);
    const std::size_t left = vertices_.size() - 1;
    vertices_.push_back(c.hi);
    dofs_.emplace_back(left, left + 1);
  }
}

double P1Space::density(double s) const {
  return mode_ == GeometryMode::Interval1D ? 1.0 : 2.0 * std::numbers::pi * s;
}

std::size_t P1Space::dof_at(double s, double tol) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (std::abs(vertices_[i] - s) <= tol) return i;
  }
  throw Error("mesh/Gamma misalignment: no local vertex at s = " + std::to_string(s));
}

Eigen::SparseMatrix<double> P1Space::stiffness(std::span<const double> element_coef) const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Cell& c = elements_[e];
    const double len = c.hi - c.lo;
    // rho is at most linear, so int rho over the element is rho(center) * len.
    double k = density(c.center) / len;
    if (!element_coef.empty()) k *= element_coef[e];
    const auto [i, j] = dofs_[e];
    t.emplace_back(i, i, k);
    t.emplace_back(j, j, k);
    t.emplace_back(i, j, -k);
    t.emplace_back(j, i, -k);
  }
  Eigen::SparseMatrix<double> m(num_dofs(), num_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::SparseMatrix<double> P1Space::mass() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Cell& c = elements_[e];
    const double len = c.hi - c.lo;
    const auto [i, j] = dofs_[e];
    double mii = 0, mjj = 0, mij = 0;
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = c.lo + kGaussX[q] * len;
      const double w = kGaussW[q] * len * density(s);
      const double pj = kGaussX[q];
      const double pi = 1.0 - pj;
      mii += w * pi * pi;
      mjj += w * pj * pj;
      mij += w * pi * pj;
    }
    t.emplace_back(i, i, mii);
    t.emplace_back(j, j, mjj);
    t.emplace_back(i, j, mij);
    t.emplace_back(j, i, mij);
  }
  Eigen::SparseMatrix<double> m(num_dofs(), num_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd P1Space::load(const std::function<double(double)>& f) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_dofs()));
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Cell& c = elements_[e];
    const double len = c.hi - c.lo;
    const auto [i, j] = dofs_[e];
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = c.lo + kGaussX[q] * len;
      const double w = kGaussW[q] * len * density(s) * f(s);
      b[static_cast<Eigen::Index>(i)] += w * (1.0 - kGaussX[q]);
      b[static_cast<Eigen::Index>(j)] += w * kGaussX[q];
    }
  }
  return b;
}

Eigen::VectorXd P1Space::mean_functional() const {
  return load([](double) { return 1.0; });
}

double P1Space::integrate(const std::function<double(double)>& f) const { return load(f).sum(); }

double P1Space::value(const Eigen::VectorXd& coef, double s) const {
  auto it = std::lower_bound(elements_.begin(), elements_.end(), s,
                             [](const Cell& c, double v) { return c.hi < v; });
  if (it == elements_.end()) --it;
  const std::size_t e = static_cast<std::size_t>(it - elements_.begin());
  const Cell& c = elements_[e];
  const double t = std::clamp((s - c.lo) / (c.hi - c.lo), 0.0, 1.0);
  const auto [i, j] = dofs_[e];
  return (1.0 - t) * coef[static_cast<Eigen::Index>(i)] + t * coef[static_cast<Eigen::Index>(j)];
}

void P1Space::for_each_gauss_point(
    const Eigen::VectorXd& coef,
    const std::function<void(std::size_t, double, double, double, double)>& visit) const {
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Cell& c = elements_[e];
    const double len = c.hi - c.lo;
    const auto [i, j] = dofs_[e];
    const double ui = coef[static_cast<Eigen::Index>(i)];
    const double uj = coef[static_cast<Eigen::Index>(j)];
    const double du = (uj - ui) / len;
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = c.lo + kGaussX[q] * len;
      visit(e, s, kGaussW[q] * len * density(s), ui + kGaussX[q] * (uj - ui), du);
    }
  }
}

Eigen::VectorXd P1Space::interpolate(const std::function<double(double)>& f) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(num_dofs()));
  for (std::size_t i = 0; i < num_dofs(); ++i) v[static_cast<Eigen::Index>(i)] = f(vertices_[i]);
  return v;
}

}  // namespace nlc
