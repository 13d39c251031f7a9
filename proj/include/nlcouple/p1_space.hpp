#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nlcouple/geometry.hpp"

namespace nlc {

/// Continuous piecewise-linear finite elements on a set of uniform cells in
/// the reduced coordinate, with the volume measure of the geometry family
/// (dx in 1D, 2 pi r dr in radial mode). Disjoint pieces of the cell list
/// become independent components with their own vertices.
class P1Space {
 public:
  P1Space(GeometryMode mode, std::vector<Cell> elements);

  std::size_t num_dofs() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  const std::vector<double>& vertices() const { return vertices_; }
  const std::vector<Cell>& elements() const { return elements_; }
  /// Vertex indices (left, right) of element e.
  std::pair<std::size_t, std::size_t> element_dofs(std::size_t e) const { return dofs_[e]; }

  /// Index of the vertex at coordinate s. Throws Error if no vertex is there.
  std::size_t dof_at(double s, double tol = 1e-10) const;

  /// int rho phi_i' phi_j', optionally scaled per element.
  Eigen::SparseMatrix<double> stiffness(std::span<const double> element_coef = {}) const;
  /// int rho phi_i phi_j.
  Eigen::SparseMatrix<double> mass() const;
  /// int rho f phi_i by three-point Gauss per element.
  Eigen::VectorXd load(const std::function<double(double)>& f) const;
  /// int rho phi_i.
  Eigen::VectorXd mean_functional() const;
  /// int rho f, with the same rule as `load`.
  double integrate(const std::function<double(double)>& f) const;

  double value(const Eigen::VectorXd& coef, double s) const;

  /// Visits the three Gauss points of every element: (element, s, weight
  /// including rho, FE value, FE derivative).
  void for_each_gauss_point(
      const Eigen::VectorXd& coef,
      const std::function<void(std::size_t, double, double, double, double)>& visit) const;

  Eigen::VectorXd interpolate(const std::function<double(double)>& f) const;

 private:
  GeometryMode mode_;
  std::vector<Cell> elements_;
  std::vector<double> vertices_;
  std::vector<std::pair<std::size_t, std::size_t>> dofs_;

  double density(double s) const;
};

}  // namespace nlc
