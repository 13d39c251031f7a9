#include "nlcouple/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlcouple/error.hpp"
#include "nlcouple/parallel.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc::cli {

namespace {

std::string region_rows(const std::vector<double>& s, const Eigen::VectorXd& v, const char* region) {
  std::string rows;
  for (std::size_t i = 0; i < s.size(); ++i) {
    rows += fmt::format("{:.12e},{:.12e},{}\n", s[i], v[static_cast<Eigen::Index>(i)], region);
  }
  return rows;
}

std::string gnuplot(const std::vector<double>& s, const Eigen::VectorXd& v, const char* label) {
  std::string text = fmt::format("# s {}\n", label);
  for (std::size_t i = 0; i < s.size(); ++i) {
    text += fmt::format("{:.12e} {:.12e}\n", s[i], v[static_cast<Eigen::Index>(i)]);
  }
  return text;
}

CaseRun run_configured(const RunConfig& config) {
  const auto [hl, hn] = config.mesh_sizes();
  if (auto exact = config.exact()) return run_case(*exact, config.kernel(), hl, hn, config.solver);
  return run_source(config.problem_spec(), config.source_function(), hl, hn, config.solver);
}

/// Rejects sweep points that violate the geometry or resolution guards
/// before any solve starts.
void check_sweep(const RunConfig& config) {
  for (double d : config.deltas) {
    Geometry::build(config.mode, config.interface_position, config.outer, d);
    const auto [hl, hn] = config.h_rule()(d);
    if (hn > d / 4 * (1 + 1e-12)) {
      throw ConfigError(fmt::format("resolution violation: h_nonlocal = {} exceeds delta/4 = {}", hn, d / 4));
    }
    (void)hl;
  }
}

// ---- verify items --------------------------------------------------------

struct Item {
  bool pass = false;
  std::string detail;
};

double independent_alpha(const KernelProfile& p, int dim) {
  const double integral = quad::gauss_panels<20>(
      [&](double r) { return p(Variant::Rbar, r * r / 4) * std::pow(r, dim - 1); }, 0.0, 2.0, {}, 16);
  return 1.0 / (unit_sphere_measure(dim) * integral);
}

double scaled_rbar_integral(const ScaledKernel& k) {
  const double h = k.support_radius();
  if (k.dimension() == 1) {
    return quad::gauss_panels<20>([&](double x) { return k.at_distance_sq(Variant::Rbar, x * x); },
                                  -h, h, {0.0}, 16);
  }
  return quad::gauss_panels<20>(
      [&](double r) { return 2 * std::numbers::pi * r * k.at_distance_sq(Variant::Rbar, r * r); }, 0.0,
      h, {}, 16);
}

Item item_normalization(const RunConfig& c) {
  const auto profile = c.kernel_profile();
  const int dim = c.mode == GeometryMode::Interval1D ? 1 : 2;
  const double alpha = normalization_constant(profile, dim);
  const double rel = std::abs(alpha - independent_alpha(profile, dim)) / alpha;
  const double integral = scaled_rbar_integral(c.kernel());
  return {rel <= 1e-8 && std::abs(integral - 1) <= 1e-8,
          fmt::format("alpha_{} = {:.9f}, quadrature mismatch {:.2e}, scaled Rbar integral - 1 = {:.2e}",
                      dim, alpha, rel, integral - 1)};
}

Item item_resolution(const RunConfig& c) {
  const auto [hl, hn] = c.mesh_sizes();
  (void)hl;
  const bool ok = hn <= c.delta / 4 * (1 + 1e-12);
  return {ok, fmt::format("h_nonlocal = {:.4g}, delta/4 = {:.4g}{}", hn, c.delta / 4,
                          ok ? "" : " (resolution guard violated)")};
}

Item item_weights(const RunConfig& c, const CaseRun& run) {
  const auto& w = run.model.weights;
  const auto& cells = run.model.meshes.nonlocal.cells;
  const double reach = 2 * c.delta + run.model.meshes.nonlocal.h;
  double interior = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (c.interface_position - std::abs(cells[i].center) > reach) {
      interior = std::max(interior, std::abs(w.wbar[static_cast<Eigen::Index>(i)] - 1.0));
    }
  }
  const double half = half_integral_check(w);
  bool ok = interior <= 1e-8;
  if (c.mode == GeometryMode::Interval1D) ok = ok && half <= 1e-8;
  if (c.mode == GeometryMode::RadialDisk2D) ok = ok && half > 0 && half < 1;
  return {ok, fmt::format("interior |wbar - 1| = {:.2e}, max |2 wbar - 1| on Gamma = {:.2e}", interior, half)};
}

Item item_half_integral_rate(const RunConfig& c) {
  std::vector<double> v;
  for (double d : c.deltas) {
    const ProblemSpec spec{c.lambda1, c.lambda2,
                           Geometry::build(c.mode, c.interface_position, c.outer, d), c.kernel(d)};
    const auto [hl, hn] = c.h_rule()(d);
    v.push_back(half_integral_check(CoupledModel::build(spec, hl, hn).weights));
  }
  const auto fit = fit_rate(c.deltas, v);
  if (!fit) return {false, "needs at least 3 sweep points"};
  return {fit->slope >= 0.8 && fit->slope <= 1.3, fmt::format("slope {:.3f} (window [0.8, 1.3])", fit->slope)};
}

Item item_compatibility(const CaseRun& run) {
  const double r = discrete_compatibility(run.source, run.model.meshes);
  const double scale = std::max(1.0, run.source.local_load.lpNorm<1>());
  return {std::abs(r) <= 1e-12 * scale, fmt::format("discrete compatibility residual {:.2e}, fbar = {:.6e}", r,
                                                    run.source.fbar)};
}

Item item_identities(const RunConfig& c, const CaseRun& run) {
  const auto& m = run.model;
  const auto sol = as_triple(run.solution);
  const double direct = energy_parts(m, sol).total();
  const double energy = std::abs(bilinear_Bhat(m, sol, sol) - direct) / std::max(direct, 1e-300);

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> n;
  auto draw = [&](Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = n(rng);
    return v;
  };
  FieldPair w{draw(sol.local.size()), draw(sol.nonlocal.size())};
  project_zero_mean(m, w);
  const double b = bilinear_B(m, w, w);
  const double diag =
      std::abs(b - energy_parts(m, {w.local, w.nonlocal, interface_unknown(m, w)}).total()) / b;

  double pairing = 0.0;
  for (int t = 0; t < 20; ++t) {
    const FieldTriple v{draw(sol.local.size()), draw(sol.nonlocal.size()), draw(sol.gamma.size())};
    const double rhs = source_pairing(m, run.source, v);
    pairing = std::max(pairing, std::abs(bilinear_Bhat(m, sol, v) - rhs) / std::max(1.0, std::abs(rhs)));
  }
  const double unorm = std::max(run.solution.u_nonlocal.lpNorm<Eigen::Infinity>(), 1e-300);
  const double recovery = nl_recovery_residual(m, run.solution, run.source) / unorm;
  const bool ok = energy <= 1e-10 && diag <= 1e-10 && pairing <= 1e-9 && recovery <= 1e-9;
  return {ok, fmt::format("Bhat energy {:.1e}, B energy {:.1e}, weak form {:.1e}, NL recovery {:.1e}", energy,
                          diag, pairing, recovery)};
}

Item item_coercivity(const RunConfig& c) {
  std::vector<double> mins, conts;
  for (double d : c.deltas) {
    const ProblemSpec spec{c.lambda1, c.lambda2,
                           Geometry::build(c.mode, c.interface_position, c.outer, d), c.kernel(d)};
    const auto [hl, hn] = c.h_rule()(d);
    const auto s = coercivity_sample(CoupledModel::build(spec, hl, hn), 200, c.seed);
    mins.push_back(s.min_ratio);
    conts.push_back(s.max_ratio_times_delta_sq);
  }
  const double lo = *std::min_element(mins.begin(), mins.end());
  const double hi = *std::max_element(mins.begin(), mins.end());
  const double cmax = *std::max_element(conts.begin(), conts.end());
  const bool ok = lo > 0 && hi / lo < 10 && cmax <= 10 * conts.front();
  return {ok, fmt::format("min ratio in [{:.4f}, {:.4f}], max continuity ratio * delta^2 = {:.3e}", lo, hi, cmax)};
}

Item item_truncation(const RunConfig& c, const ManufacturedSolution& exact) {
  std::vector<double> rg, rn;
  for (double d : c.deltas) {
    const Geometry g = Geometry::build(c.mode, c.interface_position, c.outer, d);
    rg.push_back(truncation_interface(exact, c.kernel(d), g));
    rn.push_back(truncation_nonlocal(exact, c.kernel(d), g, false).r_nl2);
  }
  const auto fg = fit_rate(c.deltas, rg);
  if (!fg) return {false, "needs at least 3 sweep points"};
  bool ok = fg->slope >= 1.7;
  std::string nl;
  if (c.mode == GeometryMode::Interval1D) {
    const double m = *std::max_element(rn.begin(), rn.end());
    ok = ok && m <= 1e-8;
    nl = fmt::format("max r_NL2 = {:.1e}", m);
  } else {
    const auto fn = fit_rate(c.deltas, rn);
    ok = ok && fn && fn->slope >= 0.3 && fn->slope <= 0.7;
    nl = fn ? fmt::format("r_NL2 slope {:.3f}", fn->slope) : "r_NL2 slope unavailable";
  }
  return {ok, fmt::format("r_Gamma slope {:.3f} (>= 1.7), {}", fg->slope, nl)};
}

Item item_convergence_rate(const RunConfig& c, const ManufacturedSolution& exact) {
  StudyOptions opts;
  opts.profile = c.profile;
  opts.solver = c.solver;
  opts.truncation = false;
  const auto table = convergence_study(exact, c.deltas, c.h_rule(), opts);
  if (!table.error.empty()) return {false, table.error};
  const auto fit = table.slope("combined");
  if (!fit) return {false, "needs at least 3 sweep points"};
  const auto e = table.column("combined");
  bool decreasing = true;
  for (std::size_t i = 1; i < e.size(); ++i) decreasing = decreasing && e[i] < e[i - 1];
  double identities = 0.0;
  for (const auto& row : table.rows) identities = std::max({identities, row.nl_recovery, row.energy_identity});
  const bool ok = fit->slope >= 0.8 && fit->slope <= 2.2 && decreasing && identities <= 1e-9;
  return {ok, fmt::format("combined slope {:.3f} (window [0.8, 2.2]), {}decreasing, identities {:.1e}",
                          fit->slope, decreasing ? "" : "not ", identities)};
}

}  // namespace

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << content;
    if (!f.flush()) throw Error("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream&) {
  const CaseRun run = run_configured(config);
  const auto& m = run.model;
  const auto& sol = run.solution;

  std::vector<double> centers, gamma;
  for (const auto& cell : m.meshes.nonlocal.cells) centers.push_back(cell.center);
  for (const auto& node : m.meshes.gamma.nodes) gamma.push_back(node.coord);

  std::string csv = "point,value,region\n";
  csv += region_rows(m.local.vertices(), sol.u_local, "local");
  csv += region_rows(centers, sol.u_nonlocal, "nonlocal");
  csv += region_rows(gamma, sol.u_gamma, "gamma");
  const auto& dir = config.output_dir;
  write_atomic(dir / "solution.csv", csv);
  write_atomic(dir / "solution_local.dat", gnuplot(m.local.vertices(), sol.u_local, "u_L"));
  write_atomic(dir / "solution_nonlocal.dat", gnuplot(centers, sol.u_nonlocal, "u_NL"));

  fmt::print(out, "dofs: local {}, nonlocal {}, gamma {}\n", m.n_local(), m.n_nonlocal(), m.n_gamma());
  fmt::print(out, "relative residual {:.3e}, constraint {:.3e}, fbar {:.6e}\n", sol.residual, sol.constraint,
             run.source.fbar);
  if (auto exact = config.exact()) {
    const auto e = error_report(m, as_triple(sol), *exact);
    write_atomic(dir / "errors.csv",
                 fmt::format("h1_L,h1_NL,l2_gamma,combined\n{:.12e},{:.12e},{:.12e},{:.12e}\n", e.h1_L,
                             e.h1_NL, e.l2_gamma, e.combined));
    fmt::print(out, "errors: h1_L {:.6e}, h1_NL {:.6e}, l2_gamma {:.6e}, combined {:.6e}\n", e.h1_L, e.h1_NL,
               e.l2_gamma, e.combined);
  }
  fmt::print(out, "wrote {}\n", (dir / "solution.csv").string());
  return kOk;
}

int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto exact = config.exact();
  if (!exact) throw ConfigError("convergence needs problem.case (a manufactured solution)");
  check_sweep(config);
  StudyOptions opts;
  opts.profile = config.profile;
  opts.solver = config.solver;
  const auto table = convergence_study(*exact, config.deltas, config.h_rule(), opts);

  std::ostringstream csv;
  table.write_csv(csv);
  write_atomic(config.output_dir / "rates.csv", csv.str());
  for (const char* metric : {"h1_L", "h1_NL", "l2_gamma", "combined", "r_gamma", "r_nl2", "half_integral"}) {
    std::string text = fmt::format("# delta {}\n", metric);
    const auto col = table.column(metric);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      text += fmt::format("{:.12e} {:.12e}\n", table.rows[i].delta, col[i]);
    }
    write_atomic(config.output_dir / fmt::format("rate_{}.dat", metric), text);
  }

  fmt::print(out, "{:>10} {:>12} {:>12} {:>12} {:>12}\n", "delta", "combined", "l2_gamma", "r_gamma",
             "half_int");
  for (const auto& r : table.rows) {
    fmt::print(out, "{:>10.4g} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}\n", r.delta, r.errors.combined,
               r.errors.l2_gamma, r.r_gamma, r.half_integral);
  }
  for (const auto& [name, fit] : table.slopes) {
    if (fit.at_roundoff) {
      fmt::print(out, "slope {:<14} (values at roundoff)\n", name);
    } else {
      fmt::print(out, "slope {:<14} {:8.4f}{}\n", name, fit.slope, fit.preasymptotic() ? "  (preasymptotic)" : "");
    }
  }
  if (table.rows.size() < 3 && table.error.empty()) {
    fmt::print(err, "warning: {} sweep point(s); slopes need at least 3\n", table.rows.size());
  }
  fmt::print(out, "wrote {}\n", (config.output_dir / "rates.csv").string());
  if (!table.error.empty()) {
    fmt::print(err, "sweep aborted: {}\n", table.error);
    return kSolverError;
  }
  return kOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream&) {
  int failed = 0;
  auto report = [&](const std::string& name, const std::function<Item()>& check) {
    Item item;
    try {
      item = check();
    } catch (const std::exception& e) {
      item = {false, e.what()};
    }
    if (!item.pass) ++failed;
    fmt::print(out, "{} {:<22} {}\n", item.pass ? "PASS" : "FAIL", name, item.detail);
  };

  const auto exact = config.exact();
  std::optional<CaseRun> run;
  auto configured = [&]() -> const CaseRun& {
    if (!run) run.emplace(run_configured(config));
    return *run;
  };

  report("kernel normalization", [&] { return item_normalization(config); });
  report("resolution guard", [&] { return item_resolution(config); });
  report("weights", [&] { return item_weights(config, configured()); });
  if (config.mode == GeometryMode::RadialDisk2D) {
    report("half-integral rate", [&] { return item_half_integral_rate(config); });
  }
  report("compatibility", [&] { return item_compatibility(configured()); });
  report("identities", [&] { return item_identities(config, configured()); });
  report("coercivity sampling", [&] { return item_coercivity(config); });
  if (exact) {
    report("truncation rates", [&] { return item_truncation(config, *exact); });
    report("convergence rate", [&] { return item_convergence_rate(config, *exact); });
  }
  fmt::print(out, "{} item(s) failed\n", failed);
  return failed == 0 ? kOk : kVerifyFailed;
}

int cmd_kernel_info(std::string_view name, int dimension, std::ostream& out, std::ostream&) {
  if (dimension != 1 && dimension != 2) throw ConfigError("dimension must be 1 or 2");
  const auto profile = KernelProfile::by_name(name);
  const double alpha = normalization_constant(profile, dimension);

  double rbar_res = 0.0, rbarbar_res = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    const double rbar = quad::gauss_panels<20>([&](double s) { return profile(Variant::R, s); }, r, 1.0, {}, 4);
    const double rbarbar =
        quad::gauss_panels<20>([&](double s) { return profile(Variant::Rbar, s); }, r, 1.0, {}, 4);
    rbar_res = std::max(rbar_res, std::abs(profile(Variant::Rbar, r) - rbar));
    rbarbar_res = std::max(rbarbar_res, std::abs(profile(Variant::Rbarbar, r) - rbarbar));
  }
  const double integral = scaled_rbar_integral(ScaledKernel(profile, 0.1, dimension));

  fmt::print(out, "profile {}\n", profile.name());
  fmt::print(out, "dimension {}\n", dimension);
  fmt::print(out, "alpha_{} = {:.9f}\n", dimension, alpha);
  fmt::print(out, "gamma0 = {:.6f}\n", profile.gamma0());
  fmt::print(out, "support: |x - y| < 2 delta\n");
  fmt::print(out, "antiderivative residual Rbar {:.2e}, Rbarbar {:.2e}\n", rbar_res, rbarbar_res);
  fmt::print(out, "scaled Rbar integral at delta 0.1: {:.12f}\n", integral);
  return kOk;
}

}  // namespace nlc::cli
