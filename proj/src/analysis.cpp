#include "nlcouple/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/QR>
#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlcouple/error.hpp"
#include "nlcouple/parallel.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {

namespace {

constexpr double kPi = std::numbers::pi;

/// Full Gauss-Legendre rule mapped to [0, 1].
struct UnitRule {
  std::vector<double> x, w;
};

template <unsigned N>
const UnitRule& unit_rule() {
  static const UnitRule rule = [] {
    using G = boost::math::quadrature::gauss<double, N>;
    UnitRule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(0.5 * (1.0 + a[i]));
      r.w.push_back(0.5 * w[i]);
      if (a[i] != 0.0) {
        r.x.push_back(0.5 * (1.0 - a[i]));
        r.w.push_back(0.5 * w[i]);
      }
    }
    return r;
  }();
  return rule;
}

/// Visits composite Gauss nodes on [lo, hi] split at `breaks`, with roughly
/// `total_panels` panels distributed by length.
template <unsigned N, class F>
void composite_nodes(double lo, double hi, std::vector<double> breaks, int total_panels, F&& visit) {
  if (!(hi > lo)) return;
  std::vector<double> pts{lo, hi};
  for (double b : breaks) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  const auto& rule = unit_rule<N>();
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double a = pts[s];
    const double len = pts[s + 1] - a;
    const int panels = std::max(1, static_cast<int>(std::lround(total_panels * len / (hi - lo))));
    const double step = len / panels;
    for (int p = 0; p < panels; ++p) {
      const double p0 = a + p * step;
      for (std::size_t q = 0; q < rule.x.size(); ++q) visit(p0 + rule.x[q] * step, rule.w[q] * step);
    }
  }
}

double interface_sign(const Geometry& g, double coord) {
  return g.mode() == GeometryMode::Interval1D && coord < 0.0 ? -1.0 : 1.0;
}

// du/dn on the nonlocal side as a function of the Gamma coordinate.
ScalarFn normal_derivative(const ManufacturedSolution& exact, const Geometry& g) {
  return [&exact, &g](double c) { return exact.du_nl(c) * interface_sign(g, c); };
}

}  // namespace

Eigen::VectorXd recovered_gradient(const VolumeMesh& mesh, const Eigen::VectorXd& u) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(mesh.cells[static_cast<std::size_t>(end - 1)].hi -
                               mesh.cells[static_cast<std::size_t>(end)].lo) < 1e-12) {
      ++end;
    }
    auto c = [&](Eigen::Index i) { return mesh.cells[static_cast<std::size_t>(i)].center; };
    const Eigen::Index len = end - start;
    if (len == 1) {
      g[start] = 0.0;
    } else if (len == 2) {
      g[start] = g[start + 1] = (u[start + 1] - u[start]) / (c(start + 1) - c(start));
    } else {
      for (Eigen::Index i = start + 1; i + 1 < end; ++i) {
        g[i] = (u[i + 1] - u[i - 1]) / (c(i + 1) - c(i - 1));
      }
      const double h0 = c(start + 1) - c(start);
      const bool at_center = mesh.mode == GeometryMode::RadialDisk2D &&
                             mesh.cells[static_cast<std::size_t>(start)].lo == 0.0;
      if (at_center) {
        // Reflection ghost u(-c0) = u(c0).
        g[start] = (u[start + 1] - u[start]) / (c(start + 1) + c(start));
      } else {
        g[start] = (-3 * u[start] + 4 * u[start + 1] - u[start + 2]) / (2 * h0);
      }
      const double h1 = c(end - 1) - c(end - 2);
      g[end - 1] = (3 * u[end - 1] - 4 * u[end - 2] + u[end - 3]) / (2 * h1);
    }
    start = end;
  }
  return g;
}

double discrete_h1_nonlocal(const VolumeMesh& mesh, const Eigen::VectorXd& u) {
  const Eigen::VectorXd g = recovered_gradient(mesh, u);
  double s = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    s += mesh.cells[i].measure * (u[ii] * u[ii] + g[ii] * g[ii]);
  }
  return std::sqrt(s);
}

double h1_norm(const P1Space& space, const Eigen::VectorXd& u) {
  double s = 0.0;
  space.for_each_gauss_point(u, [&](std::size_t, double, double w, double v, double dv) {
    s += w * (v * v + dv * dv);
  });
  return std::sqrt(s);
}

ErrorReport error_report(const CoupledModel& model, const FieldTriple& solution,
                         const ManufacturedSolution& exact) {
  ErrorReport r;
  double l = 0.0;
  model.local.for_each_gauss_point(solution.local, [&](std::size_t, double s, double w, double v,
                                                       double dv) {
    const double e0 = exact.u_l(s) - v;
    const double e1 = exact.du_l(s) - dv;
    l += w * (e0 * e0 + e1 * e1);
  });
  r.h1_L = std::sqrt(l);

  const auto& mesh = model.meshes.nonlocal;
  const Eigen::VectorXd g = recovered_gradient(mesh, solution.nonlocal);
  double nl = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double x = mesh.cells[i].center;
    const double e0 = exact.u_nl(x) - solution.nonlocal[ii];
    const double e1 = exact.du_nl(x) - g[ii];
    nl += mesh.cells[i].measure * (e0 * e0 + e1 * e1);
  }
  r.h1_NL = std::sqrt(nl);

  double gm = 0.0;
  for (std::size_t k = 0; k < model.n_gamma(); ++k) {
    const auto& node = model.meshes.gamma.nodes[k];
    const double e = exact.dn_nonlocal(node) - solution.gamma[static_cast<Eigen::Index>(k)];
    gm += node.weight * e * e;
  }
  r.l2_gamma = std::sqrt(gm);
  r.combined = std::sqrt(r.h1_L * r.h1_L + r.h1_NL * r.h1_NL + model.delta() * gm);
  return r;
}

DenseIntegrals::DenseIntegrals(const Geometry& geometry, const ScaledKernel& kernel)
    : geometry_(geometry), kernel_(kernel) {
  for (const auto& node : interface_quadrature(geometry_).nodes) {
    wbar_gamma_.emplace_back(node.coord, volume(Variant::Rbar, node.coord, {}));
  }
}

double DenseIntegrals::wbar_at_gamma(double coord) const {
  for (const auto& [c, w] : wbar_gamma_) {
    if (std::abs(c - coord) < 1e-12) return w;
  }
  throw Error("not a Gamma coordinate: " + std::to_string(coord));
}

std::vector<double> DenseIntegrals::volume(
    double s, const std::vector<std::pair<Variant, ScalarFn>>& terms) const {
  std::vector<double> out(terms.size(), 0.0);
  const double a = geometry_.interface_position();
  const double support = kernel_.support_radius();
  auto accumulate = [&](double coord, double weight, double d2) {
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const double k = kernel_.at_distance_sq(terms[t].first, d2);
      if (k == 0.0) continue;
      out[t] += weight * k * (terms[t].second ? terms[t].second(coord) : 1.0);
    }
  };

  if (geometry_.mode() == GeometryMode::Interval1D) {
    const double lo = std::max(-a, s - support);
    const double hi = std::min(a, s + support);
    composite_nodes<10>(lo, hi, {s}, 1000,
                        [&](double y, double w) { accumulate(y, w, (s - y) * (s - y)); });
    return out;
  }

  // Local polar coordinates y = x + rho (cos phi, sin phi), phi in [0, pi]
  // (mirror symmetry), rho cut at the circle |y| = R1 and at 2 delta.
  const double r1 = a;
  std::vector<double> breaks{kPi / 2};
  if (s > 0.0) {
    const double c = (r1 * r1 - s * s - support * support) / (2 * support * s);
    if (c > -1.0 && c < 1.0) breaks.push_back(std::acos(c));
  }
  const auto& rho_rule = unit_rule<20>();
  composite_nodes<32>(0.0, kPi, breaks, 64, [&](double phi, double wphi) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double disc = r1 * r1 - s * s * sp * sp;
    const double rho_max = -s * cp + std::sqrt(std::max(0.0, disc));
    const double cut = std::min(support, rho_max);
    if (!(cut > 0.0)) return;
    constexpr int kPanels = 4;
    const double step = cut / kPanels;
    for (int p = 0; p < kPanels; ++p) {
      for (std::size_t q = 0; q < rho_rule.x.size(); ++q) {
        const double rho = (p + rho_rule.x[q]) * step;
        const double w = 2.0 * wphi * rho_rule.w[q] * step * rho;
        const double ry = std::sqrt(std::max(0.0, s * s + rho * rho + 2 * s * rho * cp));
        accumulate(ry, w, rho * rho);
      }
    }
  });
  return out;
}

double DenseIntegrals::volume(Variant v, double s, const ScalarFn& g) const {
  return volume(s, {{v, g}})[0];
}

double DenseIntegrals::surface(Variant v, double s, const ScalarFn& g) const {
  const double a = geometry_.interface_position();
  if (geometry_.mode() == GeometryMode::Interval1D) {
    double total = 0.0;
    for (double c : {-a, a}) total += kernel_.at_distance_sq(v, (s - c) * (s - c)) * (g ? g(c) : 1.0);
    return total;
  }
  const double support = kernel_.support_radius();
  const double base = s * s + a * a;
  const double cross = 2 * s * a;
  double theta_max = kPi;
  if (cross > 0.0) {
    const double c = (base - support * support) / cross;
    if (c >= 1.0) return 0.0;
    if (c > -1.0) theta_max = std::acos(c);
  }
  double total = 0.0;
  composite_nodes<32>(0.0, theta_max, {}, 16, [&](double t, double w) {
    total += w * kernel_.at_distance_sq(v, base - cross * std::cos(t));
  });
  return 2.0 * a * total * (g ? g(a) : 1.0);
}

double interface_truncation_at(const DenseIntegrals& dense, const ManufacturedSolution& exact,
                               const SurfaceNode& node) {
  const double s = node.coord;
  const double delta = dense.kernel().delta();
  const auto parts = dense.volume(s, {{Variant::Rbar, {}}, {Variant::Rbar, exact.u_nl}});
  const double wbar = parts[0];
  const double ubb = parts[1] / wbar;
  const double zeta = 2 * delta * delta * dense.surface(Variant::Rbarbar, s, {}) / wbar;
  const double l2 = exact.lambda2;
  return -l2 * (exact.u_nl(s) - ubb) + l2 * zeta * exact.dn_nonlocal(node);
}

double truncation_interface(const ManufacturedSolution& exact, const ScaledKernel& kernel,
                            const Geometry& geometry) {
  const DenseIntegrals dense(geometry, kernel);
  double total = 0.0;
  for (const auto& node : interface_quadrature(geometry).nodes) {
    const double r = interface_truncation_at(dense, exact, node);
    total += node.weight * r * r;
  }
  return std::sqrt(total);
}

NonlocalTruncation nonlocal_truncation_at(const DenseIntegrals& dense,
                                          const ManufacturedSolution& exact, double s,
                                          bool with_r_nl1) {
  const Geometry& g = dense.geometry();
  const double delta = dense.kernel().delta();
  const double l2 = exact.lambda2;
  const ScalarFn dn = normal_derivative(exact, g);
  NonlocalTruncation out;
  out.r_nl2 = l2 * dense.surface(Variant::Rbar, s, [&](double c) {
    const double wb = dense.wbar_at_gamma(c);
    return dn(c) * (2 * wb - 1) / wb;
  });
  if (with_r_nl1) {
    const auto parts = dense.volume(
        s, {{Variant::R, {}}, {Variant::R, exact.u_nl}, {Variant::Rbar, exact.f_nl}});
    const double diff = exact.u_nl(s) * parts[0] - parts[1];
    out.r_nl1 = l2 / (delta * delta) * diff - 2 * l2 * dense.surface(Variant::Rbar, s, dn) - parts[2];
  }
  return out;
}

NonlocalTruncation truncation_nonlocal(const ManufacturedSolution& exact,
                                       const ScaledKernel& kernel, const Geometry& geometry,
                                       bool with_r_nl1) {
  const DenseIntegrals dense(geometry, kernel);
  const double a = geometry.interface_position();
  const double band = kernel.support_radius();
  std::vector<std::pair<double, double>> nodes;  // (s, weight incl. density)
  auto add = [&](double lo, double hi, int panels) {
    composite_nodes<10>(lo, hi, {}, panels, [&](double s, double w) {
      nodes.emplace_back(s, w * geometry.measure_density(s));
    });
  };
  if (geometry.mode() == GeometryMode::Interval1D) {
    add(a - band, a, 20);
    add(-a, -a + band, 20);
    if (with_r_nl1) add(-a + band, a - band, 40);
  } else {
    add(a - band, a, 20);
    if (with_r_nl1) add(0.0, a - band, 30);
  }
  std::vector<NonlocalTruncation> values(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    values[i] = nonlocal_truncation_at(dense, exact, nodes[i].first, with_r_nl1);
  });
  NonlocalTruncation out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.r_nl1 += nodes[i].second * values[i].r_nl1 * values[i].r_nl1;
    out.r_nl2 += nodes[i].second * values[i].r_nl2 * values[i].r_nl2;
  }
  out.r_nl1 = std::sqrt(out.r_nl1);
  out.r_nl2 = std::sqrt(out.r_nl2);
  return out;
}

double half_integral_check(const NonlocalWeights& weights) {
  double worst = 0.0;
  for (double wb : weights.wbar_gamma) worst = std::max(worst, std::abs(2 * wb - 1));
  return worst;
}

std::optional<RateFit> fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) return std::nullopt;
    A(i, 0) = std::log(x[k]);
    A(i, 1) = 1.0;
    b[i] = std::log(y[k]);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  RateFit fit;
  fit.slope = coef[0];
  fit.intercept = coef[1];
  fit.residual = std::sqrt((A * coef - b).squaredNorm() / static_cast<double>(n));
  return fit;
}

namespace {

const std::vector<std::string> kMetrics = {"h1_L",     "h1_NL", "l2_gamma",     "combined",
                                           "r_gamma", "r_nl2", "half_integral"};

double metric(const RateRow& r, const std::string& name) {
  if (name == "h1_L") return r.errors.h1_L;
  if (name == "h1_NL") return r.errors.h1_NL;
  if (name == "l2_gamma") return r.errors.l2_gamma;
  if (name == "combined") return r.errors.combined;
  if (name == "r_gamma") return r.r_gamma;
  if (name == "r_nl2") return r.r_nl2;
  if (name == "half_integral") return r.half_integral;
  if (name == "delta") return r.delta;
  throw Error("unknown metric '" + name + "'");
}

}  // namespace

std::vector<double> RateTable::column(const std::string& name) const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(metric(r, name));
  return out;
}

std::optional<RateFit> RateTable::slope(const std::string& name) const {
  for (const auto& [n, f] : slopes) {
    if (n == name) return f;
  }
  return std::nullopt;
}

void RateTable::write_csv(std::ostream& out) const {
  out << "delta,h_local,h_nl,h1_L,h1_NL,l2_gamma,combined,r_gamma,r_nl2,half_integral\n";
  for (const auto& r : rows) {
    fmt::print(out, "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n",
               r.delta, r.h_local, r.h_nl, r.errors.h1_L, r.errors.h1_NL, r.errors.l2_gamma,
               r.errors.combined, r.r_gamma, r.r_nl2, r.half_integral);
  }
  if (rows.size() < 3) {
    out << "# slopes: unavailable (need at least 3 points)\n";
  } else {
    out << "# slopes: metric,slope,fit_residual,status\n";
    for (const auto& [name, fit] : slopes) {
      fmt::print(out, "# slope,{},{:.6f},{:.6f},{}\n", name, fit.slope, fit.residual,
                 fit.status());
    }
  }
  if (!error.empty()) out << "# aborted: " << error << "\n";
}

HRule proportional_h_rule(double ratio) {
  return [ratio](double delta) { return std::pair{delta * ratio, delta * ratio}; };
}

CaseRun run_source(const ProblemSpec& spec, const ScalarFn& f, double h_local, double h_nonlocal,
                   const SolverOptions& solver) {
  CoupledModel model = CoupledModel::build(spec, h_local, h_nonlocal);
  SourceData source = assemble_source(f, spec.geometry, model.meshes, spec.kernel, {});
  const double fbar = -discrete_compatibility(source, model.meshes) / model.nonlocal_measures().sum();
  source.fbar = fbar;
  source.f_nonlocal.array() += fbar;
  BlockSystem system = assemble_system(model, source);
  CoupledSolution solution = solve(system, model, solver);
  return CaseRun{std::move(model), std::move(source), std::move(system), std::move(solution)};
}

CaseRun run_case(const ManufacturedSolution& exact, const ScaledKernel& kernel, double h_local,
                 double h_nonlocal, const SolverOptions& solver) {
  const ProblemSpec spec{exact.lambda1, exact.lambda2, exact.geometry(kernel.delta()), kernel};
  return run_source(spec, exact.source(), h_local, h_nonlocal, solver);
}

RateTable convergence_study(const ManufacturedSolution& exact, const std::vector<double>& deltas,
                            const HRule& h_rule, const StudyOptions& options) {
  RateTable table;
  const int dim = exact.mode == GeometryMode::Interval1D ? 1 : 2;
  std::optional<ScaledKernel> base;
  try {
    base.emplace(KernelProfile::by_name(options.profile), deltas.empty() ? 1.0 : deltas.front(), dim);
    for (double delta : deltas) {
      const ScaledKernel kernel = base->with_delta(delta);
      const auto [hl, hn] = h_rule(delta);
      CaseRun run = run_case(exact, kernel, hl, hn, options.solver);
      RateRow row;
      row.delta = delta;
      row.h_local = run.model.meshes.local.h;
      row.h_nl = run.model.meshes.nonlocal.h;
      const FieldTriple sol = as_triple(run.solution);
      row.errors = error_report(run.model, sol, exact);
      row.half_integral = half_integral_check(run.model.weights);
      if (options.truncation) {
        const Geometry& g = run.model.spec.geometry;
        row.r_gamma = truncation_interface(exact, kernel, g);
        row.r_nl2 = truncation_nonlocal(exact, kernel, g, false).r_nl2;
      }
      const double unorm = run.solution.u_nonlocal.lpNorm<Eigen::Infinity>();
      row.nl_recovery = nl_recovery_residual(run.model, run.solution, run.source) /
                        std::max(unorm, 1e-300);
      const double direct = energy_parts(run.model, sol).total();
      row.energy_identity = std::abs(bilinear_Bhat(run.model, sol, sol) - direct) /
                            std::max(direct, 1e-300);
      table.rows.push_back(row);
    }
  } catch (const Error& e) {
    table.error = e.what();
  }
  if (table.rows.size() >= 3) {
    const auto x = table.column("delta");
    for (const auto& name : kMetrics) {
      const auto y = table.column(name);
      if (auto fit = fit_rate(x, y)) {
        fit->at_roundoff = *std::max_element(y.begin(), y.end()) < 1e-11;
        table.slopes.emplace_back(name, *fit);
      }
    }
  }
  return table;
}

double htilde_norm_sq(const CoupledModel& model, const FieldPair& w) {
  const double l = h1_norm(model.local, w.local);
  return l * l + model.nonlocal_measures().dot(w.nonlocal.cwiseAbs2());
}

void project_zero_mean(const CoupledModel& model, FieldPair& w) {
  const Eigen::VectorXd cm = model.nonlocal_measures();
  const double total = model.local_mean.sum() + cm.sum();
  const double c = (model.local_mean.dot(w.local) + cm.dot(w.nonlocal)) / total;
  w.local.array() -= c;
  w.nonlocal.array() -= c;
}

CoercivitySample coercivity_sample(const CoupledModel& model, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    FieldPair w{Eigen::VectorXd(static_cast<Eigen::Index>(model.n_local())),
                Eigen::VectorXd(static_cast<Eigen::Index>(model.n_nonlocal()))};
    for (Eigen::Index i = 0; i < w.local.size(); ++i) w.local[i] = normal(rng);
    for (Eigen::Index i = 0; i < w.nonlocal.size(); ++i) w.nonlocal[i] = normal(rng);
    project_zero_mean(model, w);
    return w;
  };
  const double d2 = model.delta() * model.delta();
  CoercivitySample out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_samples; ++k) {
    const FieldPair w = draw();
    out.min_ratio = std::min(out.min_ratio, bilinear_B(model, w, w) / htilde_norm_sq(model, w));
    const FieldPair u = draw();
    const FieldPair v = draw();
    const double ratio = std::abs(bilinear_B(model, u, v)) * d2 /
                         std::sqrt(htilde_norm_sq(model, u) * htilde_norm_sq(model, v));
    out.max_ratio_times_delta_sq = std::max(out.max_ratio_times_delta_sq, ratio);
  }
  return out;
}

double error_system_residual(const CoupledModel& model, const BlockSystem& system,
                             const CoupledSolution& solution, const ManufacturedSolution& exact) {
  const double l1 = model.spec.lambda1;
  const double l2 = model.spec.lambda2;
  const double delta = model.delta();
  const double d2 = delta * delta;
  const auto& cells = model.meshes.nonlocal.cells;
  const auto& nodes = model.meshes.gamma.nodes;
  const std::size_t nL = model.n_local(), nN = model.n_nonlocal(), nG = model.n_gamma();
  const KernelIntegrator integ(model.spec.geometry, model.spec.kernel);
  const double reach = model.spec.kernel.support_radius() + model.meshes.nonlocal.h;
  const ScalarFn f = exact.source();

  // Exact samples and the error vector.
  Eigen::VectorXd X = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.size()));
  const auto& verts = model.local.vertices();
  for (std::size_t i = 0; i < nL; ++i) X[static_cast<Eigen::Index>(i)] = exact.u_l(verts[i]);
  for (std::size_t i = 0; i < nN; ++i) X[static_cast<Eigen::Index>(nL + i)] = exact.u_nl(cells[i].center);
  std::vector<double> dn(nG);
  for (std::size_t k = 0; k < nG; ++k) {
    dn[k] = exact.dn_nonlocal(nodes[k]);
    X[static_cast<Eigen::Index>(nL + nN + k)] = dn[k];
  }
  Eigen::VectorXd xh(static_cast<Eigen::Index>(system.size()));
  xh << solution.u_local, solution.u_nonlocal, solution.u_gamma, solution.multiplier;
  const Eigen::VectorXd AE = system.matrix * (X - xh);

  // Independent evaluation of the discrete truncation residuals.
  Eigen::VectorXd T = Eigen::VectorXd::Zero(AE.size());

  // Gamma weights, zeta and smoothed source recomputed by brute-force loops.
  std::vector<double> wbar_g(nG, 0.0), zeta(nG, 0.0);
  std::vector<std::vector<double>> rbar_g(nG, std::vector<double>(nN, 0.0));
  for (std::size_t k = 0; k < nG; ++k) {
    for (std::size_t j = 0; j < nN; ++j) {
      if (std::abs(cells[j].center - nodes[k].coord) >= reach) continue;
      rbar_g[k][j] = integ.cell_exact(Variant::Rbar, nodes[k].coord, cells[j]);
      wbar_g[k] += rbar_g[k][j];
    }
    zeta[k] = 2 * d2 * integ.surface(Variant::Rbarbar, nodes[k].coord, model.meshes.gamma) / wbar_g[k];
  }
  std::vector<double> g(nN, 0.0);
  parallel_for(nN, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < nN; ++j) {
      if (std::abs(cells[j].center - cells[i].center) >= reach) continue;
      s += integ.cell_exact(Variant::Rbar, cells[i].center, cells[j], f);
    }
    g[i] = s;
  });

  // Local rows: element loop.
  const Eigen::VectorXd load = model.local.load(f);
  for (std::size_t e = 0; e < model.local.num_elements(); ++e) {
    const Cell& c = model.local.elements()[e];
    const auto [i, j] = model.local.element_dofs(e);
    const double k = l1 * model.spec.geometry.measure_density(c.center) / (c.hi - c.lo);
    const double du = X[static_cast<Eigen::Index>(j)] - X[static_cast<Eigen::Index>(i)];
    T[static_cast<Eigen::Index>(i)] -= k * du;
    T[static_cast<Eigen::Index>(j)] += k * du;
  }
  for (std::size_t k = 0; k < nG; ++k) {
    T[static_cast<Eigen::Index>(model.local.dof_at(nodes[k].coord))] += l2 * nodes[k].weight * dn[k];
  }
  T.head(static_cast<Eigen::Index>(nL)) -= load;

  // Nonlocal rows.
  double load_sum = load.sum(), nl_sum = 0.0, measure = 0.0;
  for (std::size_t i = 0; i < nN; ++i) {
    nl_sum += cells[i].measure * g[i];
    measure += cells[i].measure;
  }
  const double fbar = -(load_sum + nl_sum) / measure;
  parallel_for(nN, [&](std::size_t i) {
    const double xi = cells[i].center;
    const double ui = X[static_cast<Eigen::Index>(nL + i)];
    double diff = 0.0;
    for (std::size_t j = 0; j < nN; ++j) {
      if (std::abs(cells[j].center - xi) >= reach) continue;
      diff += integ.cell_midpoint(Variant::R, xi, cells[j]) * (ui - X[static_cast<Eigen::Index>(nL + j)]);
    }
    double iface = 0.0;
    for (std::size_t k = 0; k < nG; ++k) {
      iface += nodes[k].weight * rbar_g[k][i] / cells[i].measure * dn[k] / wbar_g[k];
    }
    T[static_cast<Eigen::Index>(nL + i)] = l2 / d2 * diff - l2 * iface - (g[i] + fbar);
  });

  // Interface rows.
  for (std::size_t k = 0; k < nG; ++k) {
    double avg = 0.0;
    for (std::size_t j = 0; j < nN; ++j) avg += rbar_g[k][j] * X[static_cast<Eigen::Index>(nL + j)];
    avg /= wbar_g[k];
    const double trace = exact.u_l(nodes[k].coord);
    T[static_cast<Eigen::Index>(nL + nN + k)] = -l2 * trace + l2 * avg + l2 * zeta[k] * dn[k];
  }

  // Mean constraint.
  double mean = 0.0;
  const Eigen::VectorXd dl = model.local.load([](double) { return 1.0; });
  mean += dl.dot(X.head(static_cast<Eigen::Index>(nL)));
  for (std::size_t i = 0; i < nN; ++i) mean += cells[i].measure * X[static_cast<Eigen::Index>(nL + i)];
  T[static_cast<Eigen::Index>(nL + nN + nG)] = mean;

  return (AE - T).lpNorm<Eigen::Infinity>();
}

double stability_ratio(const CoupledModel& model, const CoupledSolution& solution, double f_l2) {
  const double l = h1_norm(model.local, solution.u_local);
  const double n = discrete_h1_nonlocal(model.meshes.nonlocal, solution.u_nonlocal);
  double g = 0.0;
  for (std::size_t k = 0; k < model.n_gamma(); ++k) {
    const double v = solution.u_gamma[static_cast<Eigen::Index>(k)];
    g += model.meshes.gamma.nodes[k].weight * v * v;
  }
  return (l * l + n * n + model.delta() * g) / (f_l2 * f_l2);
}

double oracle_distance(const CoupledModel& model, const CoupledSolution& solution,
                       const OracleSolution& oracle) {
  double total = 0.0;
  model.local.for_each_gauss_point(solution.u_local, [&](std::size_t, double s, double w, double v,
                                                         double) {
    const double e = v - oracle.value(s);
    total += w * e * e;
  });
  const auto& geom = model.spec.geometry;
  const auto& cells = model.meshes.nonlocal.cells;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double ui = solution.u_nonlocal[static_cast<Eigen::Index>(i)];
    total += quad::gauss<5>(
        [&](double s) {
          const double e = ui - oracle.value(s);
          return geom.measure_density(s) * e * e;
        },
        cells[i].lo, cells[i].hi);
  }
  return std::sqrt(total);
}

}  // namespace nlc
