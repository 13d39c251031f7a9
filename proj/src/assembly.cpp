#include "nlcouple/assembly.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "nlcouple/error.hpp"

namespace nlc {

void ProblemSpec::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw ConfigError("lambda1 and lambda2 must be positive");
  }
  if (kernel.dimension() != geometry.dimension()) {
    throw ConfigError("kernel dimension does not match geometry");
  }
}

CoupledModel CoupledModel::build(const ProblemSpec& spec, double h_local, double h_nonlocal) {
  spec.validate();
  Meshes meshes = build_meshes(spec.geometry, h_local, h_nonlocal);
  P1Space local(spec.geometry.mode(), meshes.local.cells);
  NonlocalWeights weights = compute_weights(spec.geometry, meshes.nonlocal, meshes.gamma, spec.kernel);
  InterfaceWeights zeta = compute_zeta(meshes.gamma, weights, spec.kernel);
  std::vector<std::size_t> gamma_dofs;
  for (const auto& node : meshes.gamma.nodes) gamma_dofs.push_back(local.dof_at(node.coord));
  Eigen::SparseMatrix<double> stiffness = local.stiffness();
  Eigen::VectorXd mean = local.mean_functional();
  return CoupledModel{spec,
                      std::move(meshes),
                      std::move(local),
                      std::move(weights),
                      std::move(zeta),
                      std::move(gamma_dofs),
                      std::move(stiffness),
                      std::move(mean)};
}

Eigen::VectorXd CoupledModel::nonlocal_measures() const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(n_nonlocal()));
  for (std::size_t i = 0; i < n_nonlocal(); ++i) {
    m[static_cast<Eigen::Index>(i)] = meshes.nonlocal.cells[i].measure;
  }
  return m;
}

double CoupledModel::surface_coupling(std::size_t i, std::size_t k) const {
  const double v = weights.rbar_gamma.coeff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
  return meshes.gamma.nodes[k].weight * v / meshes.nonlocal.cells[i].measure;
}

BlockSystem assemble_system(const CoupledModel& model, const SourceData& source) {
  const double l1 = model.spec.lambda1;
  const double l2 = model.spec.lambda2;
  const double d2 = model.delta() * model.delta();
  BlockSystem sys;
  sys.n_local = model.n_local();
  sys.n_nonlocal = model.n_nonlocal();
  sys.n_gamma = model.n_gamma();
  const auto oL = Eigen::Index{0};
  const auto oN = static_cast<Eigen::Index>(sys.offset_nonlocal());
  const auto oG = static_cast<Eigen::Index>(sys.offset_gamma());
  const auto oM = static_cast<Eigen::Index>(sys.offset_multiplier());
  const auto& W = model.weights;
  const auto& gamma = model.meshes.gamma;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * model.stiffness.nonZeros() + 2 * W.r_cells.nonZeros() +
                                     2 * W.rbar_gamma.nonZeros()) + 8 * sys.size());

  // Local rows.
  for (int c = 0; c < model.stiffness.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(model.stiffness, c); it; ++it) {
      t.emplace_back(oL + it.row(), oL + it.col(), l1 * it.value());
    }
  }
  for (std::size_t k = 0; k < sys.n_gamma; ++k) {
    t.emplace_back(oL + static_cast<Eigen::Index>(model.gamma_dofs[k]), oG + static_cast<Eigen::Index>(k),
                   l2 * gamma.nodes[k].weight);
  }
  for (Eigen::Index i = 0; i < model.local_mean.size(); ++i) {
    t.emplace_back(oL + i, oM, model.local_mean[i]);
    t.emplace_back(oM, oL + i, model.local_mean[i]);
  }

  // Nonlocal rows.
  const double c = l2 / d2;
  for (Eigen::Index i = 0; i < W.r_cells.outerSize(); ++i) {
    t.emplace_back(oN + i, oN + i, c * W.w[static_cast<std::size_t>(i)]);
    for (RowSparse::InnerIterator it(W.r_cells, i); it; ++it) {
      t.emplace_back(oN + i, oN + it.col(), -c * it.value());
    }
    t.emplace_back(oN + i, oM, 1.0);
    t.emplace_back(oM, oN + i, model.meshes.nonlocal.cells[static_cast<std::size_t>(i)].measure);
  }
  for (std::size_t k = 0; k < sys.n_gamma; ++k) {
    const double wb = W.wbar_gamma[k];
    for (RowSparse::InnerIterator it(W.rbar_gamma, static_cast<Eigen::Index>(k)); it; ++it) {
      const auto i = static_cast<std::size_t>(it.col());
      // Interface source in NL row i.
      const double s_ik = gamma.nodes[k].weight * it.value() / model.meshes.nonlocal.cells[i].measure;
      t.emplace_back(oN + it.col(), oG + static_cast<Eigen::Index>(k), -l2 * s_ik / wb);
      // Average term in Gamma row k.
      t.emplace_back(oG + static_cast<Eigen::Index>(k), oN + it.col(), l2 * it.value() / wb);
    }
    t.emplace_back(oG + static_cast<Eigen::Index>(k), oL + static_cast<Eigen::Index>(model.gamma_dofs[k]), -l2);
    t.emplace_back(oG + static_cast<Eigen::Index>(k), oG + static_cast<Eigen::Index>(k), l2 * model.zeta.zeta[k]);
  }

  const auto n = static_cast<Eigen::Index>(sys.size());
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();

  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.rhs.segment(oL, static_cast<Eigen::Index>(sys.n_local)) = source.local_load;
  sys.rhs.segment(oN, static_cast<Eigen::Index>(sys.n_nonlocal)) = source.f_nonlocal;
  return sys;
}

SolverMethod solver_method_from(std::string_view name) {
  if (name == "direct") return SolverMethod::Direct;
  if (name == "iterative") return SolverMethod::Iterative;
  throw ConfigError("unknown solver method '" + std::string(name) + "' (direct|iterative)");
}

namespace {

bool has_empty_column(const Eigen::SparseMatrix<double>& m) {
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    const auto nnz = m.isCompressed() ? m.outerIndexPtr()[c + 1] - m.outerIndexPtr()[c]
                                      : m.innerNonZeroPtr()[c];
    if (nnz == 0) return true;
  }
  return false;
}

}  // namespace

CoupledSolution solve(const BlockSystem& system, const CoupledModel& model,
                      const SolverOptions& options) {
  Eigen::VectorXd x;
  int iterations = 0;
  if (system.rhs.norm() == 0.0) {
    x = Eigen::VectorXd::Zero(system.rhs.size());
  } else if (has_empty_column(system.matrix)) {
    throw SolverError("structurally singular coupled operator (empty column)");
  } else if (options.method == SolverMethod::Direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(system.matrix);
    lu.factorize(system.matrix);
    if (lu.info() != Eigen::Success) {
      throw SolverError("sparse LU factorization failed (singular coupled operator): " +
                        lu.lastErrorMessage());
    }
    x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
  } else {
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
    gmres.set_restart(options.restart);
    gmres.setTolerance(options.tol);
    gmres.setMaxIterations(options.max_iterations);
    gmres.preconditioner().setDroptol(1e-6);
    gmres.preconditioner().setFillfactor(20);
    gmres.compute(system.matrix);
    if (gmres.info() != Eigen::Success) {
      throw SolverError("preconditioner setup failed for the coupled operator");
    }
    x = gmres.solve(system.rhs);
    iterations = static_cast<int>(gmres.iterations());
    if (gmres.info() != Eigen::Success) {
      throw SolverError("GMRES did not converge in " + std::to_string(iterations) + " iterations");
    }
  }
  if (!x.allFinite()) throw SolverError("non-finite solution (singular coupled operator)");

  CoupledSolution s;
  const double bnorm = std::max(system.rhs.norm(), 1.0);
  s.residual = (system.matrix * x - system.rhs).norm() / bnorm;
  if (s.residual > 1e-6) {
    throw SolverError("coupled solve residual " + std::to_string(s.residual) +
                      " indicates a singular or ill-posed system");
  }
  s.iterations = iterations;
  s.u_local = x.segment(0, static_cast<Eigen::Index>(system.n_local));
  s.u_nonlocal = x.segment(static_cast<Eigen::Index>(system.offset_nonlocal()),
                           static_cast<Eigen::Index>(system.n_nonlocal));
  s.u_gamma = x.segment(static_cast<Eigen::Index>(system.offset_gamma()),
                        static_cast<Eigen::Index>(system.n_gamma));
  s.multiplier = x[static_cast<Eigen::Index>(system.offset_multiplier())];
  s.constraint = model.local_mean.dot(s.u_local) + model.nonlocal_measures().dot(s.u_nonlocal);
  return s;
}

FieldTriple as_triple(const CoupledSolution& s) { return {s.u_local, s.u_nonlocal, s.u_gamma}; }

namespace {

Eigen::VectorXd trace(const CoupledModel& model, const Eigen::VectorXd& u_local) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(model.n_gamma()));
  for (std::size_t k = 0; k < model.n_gamma(); ++k) {
    t[static_cast<Eigen::Index>(k)] = u_local[static_cast<Eigen::Index>(model.gamma_dofs[k])];
  }
  return t;
}

Eigen::VectorXd gamma_weights(const CoupledModel& model) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(model.n_gamma()));
  for (std::size_t k = 0; k < model.n_gamma(); ++k) {
    s[static_cast<Eigen::Index>(k)] = model.meshes.gamma.nodes[k].weight;
  }
  return s;
}

Eigen::VectorXd zeta_vector(const CoupledModel& model) {
  return Eigen::Map<const Eigen::VectorXd>(model.zeta.zeta.data(),
                                           static_cast<Eigen::Index>(model.zeta.zeta.size()));
}

// (lambda2 / delta^2) sum_i |c_i| v_i (w_i u_i - sum_j R_ij u_j)
double nonlocal_form(const CoupledModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const auto& W = model.weights;
  const Eigen::VectorXd wu =
      Eigen::Map<const Eigen::VectorXd>(W.w.data(), static_cast<Eigen::Index>(W.w.size()))
          .cwiseProduct(u) -
      W.r_cells * u;
  const double d2 = model.delta() * model.delta();
  return model.spec.lambda2 / d2 * model.nonlocal_measures().cwiseProduct(v).dot(wu);
}

}  // namespace

Eigen::VectorXd interface_unknown(const CoupledModel& model, const FieldPair& u) {
  const Eigen::VectorXd avg = bar_average_gamma(model.weights, u.nonlocal, Average::BarBar);
  return (trace(model, u.local) - avg).cwiseQuotient(zeta_vector(model));
}

double bilinear_B(const CoupledModel& model, const FieldPair& u, const FieldPair& v) {
  const double l1 = model.spec.lambda1;
  const double l2 = model.spec.lambda2;
  const Eigen::VectorXd ug = interface_unknown(model, u);
  const Eigen::VectorXd s = gamma_weights(model);
  const Eigen::VectorXd vbb = bar_average_gamma(model.weights, v.nonlocal, Average::BarBar);
  return l1 * v.local.dot(model.stiffness * u.local) + nonlocal_form(model, u.nonlocal, v.nonlocal) +
         l2 * s.cwiseProduct(ug).dot(trace(model, v.local) - vbb);
}

double bilinear_Bhat(const CoupledModel& model, const FieldTriple& u, const FieldTriple& v) {
  const double l1 = model.spec.lambda1;
  const double l2 = model.spec.lambda2;
  const Eigen::VectorXd s = gamma_weights(model);
  const Eigen::VectorXd ubb = bar_average_gamma(model.weights, u.nonlocal, Average::BarBar);
  const Eigen::VectorXd vbb = bar_average_gamma(model.weights, v.nonlocal, Average::BarBar);
  const Eigen::VectorXd zeta = zeta_vector(model);
  double total = l1 * v.local.dot(model.stiffness * u.local);
  total += l2 * s.cwiseProduct(u.gamma).dot(trace(model, v.local));
  total += nonlocal_form(model, u.nonlocal, v.nonlocal);
  total -= l2 * s.cwiseProduct(u.gamma).dot(vbb);
  total -= l2 * s.cwiseProduct(v.gamma).dot(trace(model, u.local) - ubb);
  total += l2 * s.cwiseProduct(zeta).cwiseProduct(u.gamma).dot(v.gamma);
  return total;
}

double source_pairing(const CoupledModel& model, const SourceData& source, const FieldTriple& v) {
  return source.local_load.dot(v.local) +
         model.nonlocal_measures().cwiseProduct(source.f_nonlocal).dot(v.nonlocal);
}

EnergyParts energy_parts(const CoupledModel& model, const FieldTriple& u) {
  EnergyParts e;
  double grad = 0.0;
  model.local.for_each_gauss_point(u.local, [&](std::size_t, double, double w, double, double du) {
    grad += w * du * du;
  });
  e.local = model.spec.lambda1 * grad;
  for (std::size_t k = 0; k < model.n_gamma(); ++k) {
    const double g = u.gamma[static_cast<Eigen::Index>(k)];
    e.interface += model.meshes.gamma.nodes[k].weight * model.zeta.zeta[k] * g * g;
  }
  e.interface *= model.spec.lambda2;
  const auto& R = model.weights.r_cells;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < R.outerSize(); ++i) {
    const double ci = model.meshes.nonlocal.cells[static_cast<std::size_t>(i)].measure;
    for (RowSparse::InnerIterator it(R, i); it; ++it) {
      const double d = u.nonlocal[i] - u.nonlocal[it.col()];
      sum += ci * it.value() * d * d;
    }
  }
  e.nonlocal = model.spec.lambda2 / (2.0 * model.delta() * model.delta()) * sum;
  return e;
}

double nl_recovery_residual(const CoupledModel& model, const CoupledSolution& solution,
                            const SourceData& source) {
  const auto& W = model.weights;
  const double d2 = model.delta() * model.delta();
  const double l2 = model.spec.lambda2;
  const Eigen::VectorXd ubar = bar_average_cells(W, solution.u_nonlocal, Average::Bar);
  double worst = 0.0;
  for (std::size_t i = 0; i < model.n_nonlocal(); ++i) {
    double iface = 0.0;
    for (std::size_t k = 0; k < model.n_gamma(); ++k) {
      iface += model.surface_coupling(i, k) * solution.u_gamma[static_cast<Eigen::Index>(k)] /
               W.wbar_gamma[k];
    }
    const auto ii = static_cast<Eigen::Index>(i);
    const double rhs = source.f_nonlocal[ii] - solution.multiplier;
    const double recovered = ubar[ii] + d2 / W.w[i] * iface + d2 / (l2 * W.w[i]) * rhs;
    worst = std::max(worst, std::abs(solution.u_nonlocal[ii] - recovered));
  }
  return worst;
}

}  // namespace nlc
