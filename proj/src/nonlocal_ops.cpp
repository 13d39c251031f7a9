#include "nlcouple/nonlocal_ops.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "nlcouple/error.hpp"
#include "nlcouple/parallel.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {

namespace {

using RowEntries = std::vector<std::pair<Eigen::Index, double>>;

RowSparse from_rows(const std::vector<RowEntries>& rows, std::size_t cols) {
  RowSparse m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  Eigen::VectorXi nnz(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) nnz[static_cast<Eigen::Index>(r)] = static_cast<int>(rows[r].size());
  m.reserve(nnz);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r]) m.insert(static_cast<Eigen::Index>(r), c) = v;
  }
  m.makeCompressed();
  return m;
}

std::vector<double> row_sums(const RowSparse& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double s = 0.0;
    for (RowSparse::InnerIterator it(m, r); it; ++it) s += it.value();
    out[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

// Midpoint R row and exact Rbar row for one evaluation point.
void stencil_rows(const KernelIntegrator& integ, const VolumeMesh& mesh, double s,
                  RowEntries& r_row, RowEntries& rbar_row) {
  const double support = integ.kernel().support_radius();
  for (std::size_t j : neighbors_within(mesh, integ.geometry().point(s), support + mesh.h)) {
    const Cell& c = mesh.cells[j];
    const double rm = integ.cell_midpoint(Variant::R, s, c);
    if (rm != 0.0) r_row.emplace_back(static_cast<Eigen::Index>(j), rm);
    const double rb = integ.cell_exact(Variant::Rbar, s, c);
    if (rb != 0.0) rbar_row.emplace_back(static_cast<Eigen::Index>(j), rb);
  }
}

}  // namespace

NonlocalWeights compute_weights(const Geometry& geometry, const VolumeMesh& mesh_nl,
                                const SurfaceQuadrature& gamma, const ScaledKernel& kernel) {
  const double delta = kernel.delta();
  if (mesh_nl.h > 0.25 * delta * (1.0 + 1e-12)) {
    throw ConfigError("resolution violation: nonlocal mesh h = " + std::to_string(mesh_nl.h) +
                      " exceeds delta/4 = " + std::to_string(0.25 * delta));
  }
  const KernelIntegrator integ(geometry, kernel);
  const std::size_t n = mesh_nl.size();
  const std::size_t m = gamma.size();

  std::vector<RowEntries> r_rows(n), rbar_rows(n), rg_rows(m), rbg_rows(m);
  parallel_for(n + m, [&](std::size_t p) {
    if (p < n) {
      stencil_rows(integ, mesh_nl, mesh_nl.cells[p].center, r_rows[p], rbar_rows[p]);
    } else {
      stencil_rows(integ, mesh_nl, gamma.nodes[p - n].coord, rg_rows[p - n], rbg_rows[p - n]);
    }
  });

  NonlocalWeights out;
  out.delta = delta;
  out.r_cells = from_rows(r_rows, n);
  out.rbar_cells = from_rows(rbar_rows, n);
  out.r_gamma = from_rows(rg_rows, n);
  out.rbar_gamma = from_rows(rbg_rows, n);
  out.w = row_sums(out.r_cells);
  out.wbar = row_sums(out.rbar_cells);
  out.w_gamma = row_sums(out.r_gamma);
  out.wbar_gamma = row_sums(out.rbar_gamma);
  out.rbarbar_surface.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.rbarbar_surface[k] = integ.surface(Variant::Rbarbar, gamma.nodes[k].coord, gamma);
  }
  return out;
}

InterfaceWeights compute_zeta(const SurfaceQuadrature& gamma, const NonlocalWeights& weights,
                              const ScaledKernel& kernel) {
  InterfaceWeights out;
  out.delta = kernel.delta();
  out.zeta.resize(gamma.size());
  const double d2 = out.delta * out.delta;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const double wb = weights.wbar_gamma.at(k);
    if (!(wb > 0.0)) {
      throw Error("degenerate weight: wbar vanishes at Gamma node " + std::to_string(k));
    }
    out.zeta[k] = 2.0 * d2 * weights.rbarbar_surface.at(k) / wb;
  }
  return out;
}

double bar_average(const NonlocalWeights& weights, std::span<const double> u, EvalPoint at,
                   Average kind) {
  const RowSparse* m = nullptr;
  double w = 0.0;
  if (kind == Average::Bar) {
    m = at.on_gamma ? &weights.r_gamma : &weights.r_cells;
    w = at.on_gamma ? weights.w_gamma[at.index] : weights.w[at.index];
  } else {
    m = at.on_gamma ? &weights.rbar_gamma : &weights.rbar_cells;
    w = at.on_gamma ? weights.wbar_gamma[at.index] : weights.wbar[at.index];
  }
  double s = 0.0;
  for (RowSparse::InnerIterator it(*m, static_cast<Eigen::Index>(at.index)); it; ++it) {
    s += it.value() * u[static_cast<std::size_t>(it.col())];
  }
  return s / w;
}

Eigen::VectorXd bar_average_cells(const NonlocalWeights& weights, const Eigen::VectorXd& u,
                                  Average kind) {
  const bool bar = kind == Average::Bar;
  Eigen::VectorXd out = (bar ? weights.r_cells : weights.rbar_cells) * u;
  const auto& w = bar ? weights.w : weights.wbar;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] /= w[static_cast<std::size_t>(i)];
  return out;
}

Eigen::VectorXd bar_average_gamma(const NonlocalWeights& weights, const Eigen::VectorXd& u,
                                  Average kind) {
  const bool bar = kind == Average::Bar;
  Eigen::VectorXd out = (bar ? weights.r_gamma : weights.rbar_gamma) * u;
  const auto& w = bar ? weights.w_gamma : weights.wbar_gamma;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] /= w[static_cast<std::size_t>(i)];
  return out;
}

Eigen::VectorXd smoothed_source(const KernelIntegrator& integrator, const VolumeMesh& mesh_nl,
                                const std::function<double(double)>& f) {
  const std::size_t n = mesh_nl.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  const double reach = integrator.kernel().support_radius() + mesh_nl.h;
  parallel_for(n, [&](std::size_t i) {
    const double s = mesh_nl.cells[i].center;
    double total = 0.0;
    for (std::size_t j : neighbors_within(mesh_nl, integrator.geometry().point(s), reach)) {
      total += integrator.cell_exact(Variant::Rbar, s, mesh_nl.cells[j], f);
    }
    g[static_cast<Eigen::Index>(i)] = total;
  });
  return g;
}

namespace {

double fbar_from(const Meshes& meshes, double local_integral, const Eigen::VectorXd& g) {
  double nl = 0.0;
  double measure = 0.0;
  for (std::size_t i = 0; i < meshes.nonlocal.size(); ++i) {
    nl += meshes.nonlocal.cells[i].measure * g[static_cast<Eigen::Index>(i)];
    measure += meshes.nonlocal.cells[i].measure;
  }
  return -(local_integral + nl) / measure;
}

}  // namespace

CompatibilityShift compute_fbar(const std::function<double(double)>& f, const Geometry& geometry,
                                const Meshes& meshes, const ScaledKernel& kernel) {
  const P1Space local(geometry.mode(), meshes.local.cells);
  const KernelIntegrator integ(geometry, kernel);
  return {fbar_from(meshes, local.integrate(f), smoothed_source(integ, meshes.nonlocal, f))};
}

SourceData assemble_source(const std::function<double(double)>& f, const Geometry& geometry,
                           const Meshes& meshes, const ScaledKernel& kernel,
                           const CompatibilityShift& shift) {
  const P1Space local(geometry.mode(), meshes.local.cells);
  const KernelIntegrator integ(geometry, kernel);
  SourceData out;
  out.f = f;
  out.fbar = shift.fbar;
  out.f_local = local.interpolate(f);
  out.local_load = local.load(f);
  out.f_nonlocal = smoothed_source(integ, meshes.nonlocal, f).array() + shift.fbar;
  return out;
}

double discrete_compatibility(const SourceData& source, const Meshes& meshes) {
  double total = source.local_load.sum();
  for (std::size_t i = 0; i < meshes.nonlocal.size(); ++i) {
    total += meshes.nonlocal.cells[i].measure * source.f_nonlocal[static_cast<Eigen::Index>(i)];
  }
  return total;
}

}  // namespace nlc
