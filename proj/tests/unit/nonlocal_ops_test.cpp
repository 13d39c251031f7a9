#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlcouple/error.hpp"
#include "nlcouple/nonlocal_ops.hpp"
#include "nlcouple/parallel.hpp"
#include "nlcouple/quadrature.hpp"
#include "nlcouple/reference.hpp"

namespace nlc {
namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  Geometry geometry;
  ScaledKernel kernel;
  Meshes meshes;
  NonlocalWeights weights;
};

Setup interval(double delta, double h, double a = 0.5) {
  const auto g = Geometry::build(GeometryMode::Interval1D, a, 1.0, delta);
  const ScaledKernel k(KernelProfile::quadratic(), delta, 1);
  auto m = build_meshes(g, h, h);
  auto w = compute_weights(g, m.nonlocal, m.gamma, k);
  return {g, k, std::move(m), std::move(w)};
}

Setup radial(double delta, double h) {
  const auto g = Geometry::build(GeometryMode::RadialDisk2D, 0.5, 1.0, delta);
  const ScaledKernel k(KernelProfile::quadratic(), delta, 2);
  auto m = build_meshes(g, h, h);
  auto w = compute_weights(g, m.nonlocal, m.gamma, k);
  return {g, k, std::move(m), std::move(w)};
}

std::size_t center_cell(const VolumeMesh& mesh, double x) {
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (std::abs(mesh.cells[i].center - x) < 1e-12) return i;
  }
  throw std::runtime_error("no cell centered at x");
}

TEST(ComputeWeights, InteriorAndInterfaceValues) {
  // An odd cell count puts a center at x = 0; the midpoint error in w is O(h^2).
  const auto s = interval(0.1, 1.0 / 301);
  const std::size_t mid = center_cell(s.meshes.nonlocal, 0.0);
  EXPECT_NEAR(s.weights.wbar[mid], 1.0, 1e-6);
  EXPECT_NEAR(s.weights.w[mid], 3.5, 1e-5);
  ASSERT_EQ(s.weights.num_gamma(), 2u);
  EXPECT_NEAR(s.weights.wbar_gamma[0], 0.5, 1e-6);
  EXPECT_NEAR(s.weights.wbar_gamma[1], 0.5, 1e-6);
}

TEST(ComputeWeights, ResolutionGuard) {
  const auto g = Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.1);
  const ScaledKernel k(KernelProfile::quadratic(), 0.1, 1);
  const auto m = build_meshes(g, 0.1, 0.1);
  EXPECT_THROW(compute_weights(g, m.nonlocal, m.gamma, k), ConfigError);
  const auto ok = build_meshes(g, 0.025, 0.025);
  EXPECT_NO_THROW(compute_weights(g, ok.nonlocal, ok.gamma, k));
}

TEST(ComputeWeights, InteriorNormalization) {
  for (double delta : {0.1, 0.05}) {
    for (const auto& s : {interval(delta, delta / 8), radial(delta, delta / 8)}) {
      const double a = s.geometry.interface_position();
      for (std::size_t i = 0; i < s.meshes.nonlocal.size(); ++i) {
        const double x = s.meshes.nonlocal.cells[i].center;
        if (a - std::abs(x) > 2 * delta) {
          EXPECT_NEAR(s.weights.wbar[i], 1.0, 1e-8) << to_string(s.geometry.mode()) << " x=" << x;
        }
        EXPECT_GT(s.weights.w[i], 0.0);
        EXPECT_GT(s.weights.wbar[i], 0.0);
      }
    }
  }
}

TEST(ComputeWeights, FlatHalfIntegral) {
  for (double delta : {0.1, 0.05, 0.025}) {
    const auto s = interval(delta, delta / 8);
    for (double wb : s.weights.wbar_gamma) EXPECT_LE(std::abs(2 * wb - 1), 1e-8);
  }
}

TEST(ComputeWeights, CurvedInterfaceWeightInRange) {
  for (double delta : {0.1, 0.05}) {
    const auto s = radial(delta, delta / 8);
    EXPECT_GE(s.weights.wbar_gamma[0], 0.25);
    EXPECT_LE(s.weights.wbar_gamma[0], 0.75);
  }
}

TEST(ComputeWeights, ThreadCountIndependent) {
  const auto one = interval(0.05, 0.05 / 8);
  set_thread_count(4);
  const auto four = interval(0.05, 0.05 / 8);
  set_thread_count(1);
  EXPECT_EQ(one.weights.w, four.weights.w);
  EXPECT_EQ(one.weights.wbar, four.weights.wbar);
}

TEST(ComputeZeta, FlatInterfaceValues) {
  const auto s1 = interval(0.1, 0.1 / 8);
  const auto z1 = compute_zeta(s1.meshes.gamma, s1.weights, s1.kernel);
  for (double z : z1.zeta) EXPECT_NEAR(z, 0.0546875, 1e-6);
  const auto s2 = interval(0.05, 0.05 / 8);
  const auto z2 = compute_zeta(s2.meshes.gamma, s2.weights, s2.kernel);
  for (double z : z2.zeta) EXPECT_NEAR(z, 0.02734375, 1e-6);
  const auto s3 = interval(0.025, 0.025 / 8);
  const auto z3 = compute_zeta(s3.meshes.gamma, s3.weights, s3.kernel);
  EXPECT_NEAR(z1.zeta[0] / 0.1, z3.zeta[0] / 0.025, 1e-6);
  EXPECT_NEAR(z2.zeta[1] / 0.05, z3.zeta[1] / 0.025, 1e-6);
}

TEST(ComputeZeta, ScalesLinearlyOnCurvedInterface) {
  std::vector<double> ratio;
  for (double delta : {0.1, 0.05, 0.025}) {
    const auto s = radial(delta, delta / 8);
    ratio.push_back(compute_zeta(s.meshes.gamma, s.weights, s.kernel).zeta[0] / delta);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LT(*hi / *lo, 1.5);
}

TEST(ComputeZeta, DegenerateWeight) {
  auto s = interval(0.1, 0.1 / 8);
  s.weights.wbar_gamma[0] = 0.0;
  EXPECT_THROW(compute_zeta(s.meshes.gamma, s.weights, s.kernel), Error);
}

TEST(BarAverage, ReproducesConstants) {
  for (const auto& s : {interval(0.1, 0.1 / 8), radial(0.1, 0.1 / 8)}) {
    const std::vector<double> u(s.meshes.nonlocal.size(), 2.75);
    for (std::size_t i = 0; i < u.size(); i += 7) {
      EXPECT_NEAR(bar_average(s.weights, u, {false, i}, Average::Bar), 2.75, 1e-14);
      EXPECT_NEAR(bar_average(s.weights, u, {false, i}, Average::BarBar), 2.75, 1e-14);
    }
    EXPECT_NEAR(bar_average(s.weights, u, {true, 0}, Average::BarBar), 2.75, 1e-14);
  }
}

TEST(BarAverage, LinearDataAtSymmetricPoint) {
  const auto s = interval(0.1, 1.0 / 101);
  const auto u = s.meshes.nonlocal.centers();
  const std::size_t mid = center_cell(s.meshes.nonlocal, 0.0);
  EXPECT_NEAR(bar_average(s.weights, u, {false, mid}, Average::Bar), 0.0, 1e-14);
  const std::size_t off = mid + 10;
  EXPECT_NEAR(bar_average(s.weights, u, {false, off}, Average::Bar), u[off], 1e-4);
}

TEST(BarAverage, OneSidedAverageAtInterface) {
  const double delta = 0.1;
  const auto s = interval(delta, delta / 8);
  const auto u = s.meshes.nonlocal.centers();
  const double barbar = bar_average(s.weights, u, {true, 1}, Average::BarBar);
  EXPECT_LT(barbar, 0.5);

  // 1e5-point midpoint oracle over the one-sided support, data piecewise
  // constant on the cells.
  const int n = 100000;
  const double lo = 0.5 - 2 * delta;
  const double step = 2 * delta / n;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double y = lo + (k + 0.5) * step;
    const auto& cells = s.meshes.nonlocal.cells;
    const auto it = std::lower_bound(cells.begin(), cells.end(), y,
                                     [](const Cell& c, double v) { return c.hi < v; });
    const double kv = s.kernel(Variant::Rbar, Point{0.5, 0}, Point{y, 0});
    num += kv * it->center * step;
    den += kv * step;
  }
  EXPECT_NEAR(barbar, num / den, 1e-6);

  // Same average of the continuous data y.
  const double smooth = quad::gauss<20>(
      [&](double y) { return y * s.kernel(Variant::Rbar, Point{0.5, 0}, Point{y, 0}); }, lo, 0.5) /
                        quad::gauss<20>(
      [&](double y) { return s.kernel(Variant::Rbar, Point{0.5, 0}, Point{y, 0}); }, lo, 0.5);
  // Cell data differ from y by O(h^2) in this average.
  EXPECT_NEAR(barbar, smooth, (delta / 8) * (delta / 8));
  EXPECT_NEAR(bar_average(s.weights, u, {true, 1}, Average::Bar), smooth, 1e-2);
}

TEST(KernelBounds, VolumeAndSurfaceIntegrals) {
  std::vector<double> vmin, smax, snear;
  for (double delta : {0.2, 0.1, 0.05}) {
    const auto g = Geometry::build(GeometryMode::Interval1D, 0.45, 1.0, delta);
    const ScaledKernel k(KernelProfile::quadratic(), delta, 1);
    const KernelIntegrator integ(g, k);
    const auto mesh = volume_mesh(g, Region::Nonlocal, delta / 8);
    const auto gamma = interface_quadrature(g);
    double lo = 1e300, hi = 0.0, sup = 0.0, near = 1e300;
    std::vector<double> nodes{-0.45};
    for (const auto& c : mesh.cells) nodes.push_back(c.hi);
    for (double x : nodes) {
      for (Variant v : {Variant::R, Variant::Rbar, Variant::Rbarbar}) {
        double vol = 0.0;
        for (const auto& c : mesh.cells) vol += integ.cell_exact(v, x, c);
        lo = std::min(lo, vol);
        hi = std::max(hi, vol);
        const double surf = delta * integ.surface(v, x, gamma);
        sup = std::max(sup, surf);
        if (0.45 - std::abs(x) < std::sqrt(0.5) * delta) near = std::min(near, surf);
      }
    }
    vmin.push_back(lo);
    smax.push_back(sup);
    snear.push_back(near);
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 10.0);
  }
  for (std::size_t i = 1; i < vmin.size(); ++i) {
    EXPECT_NEAR(vmin[i], vmin[0], 0.05 * vmin[0]);
    EXPECT_NEAR(smax[i], smax[0], 0.05 * smax[0]);
    EXPECT_NEAR(snear[i], snear[0], 0.05 * snear[0]);
    EXPECT_GT(snear[i], 0.0);
  }
}

TEST(ComputeFbar, Examples) {
  const auto s = interval(0.1, 0.1 / 8);
  auto zero = [](double) { return 0.0; };
  EXPECT_EQ(compute_fbar(zero, s.geometry, s.meshes, s.kernel).fbar, 0.0);
  EXPECT_NEAR(compute_fbar(named_source("sin_pi"), s.geometry, s.meshes, s.kernel).fbar, 0.0, 1e-12);
}

TEST(ComputeFbar, DecaysWithHorizonForSmoothSource) {
  std::vector<double> d, f;
  for (double delta : {0.1, 0.05, 0.025, 0.0125}) {
    const auto s = interval(delta, delta / 8);
    d.push_back(delta);
    f.push_back(std::abs(compute_fbar(named_source("cos_pi"), s.geometry, s.meshes, s.kernel).fbar));
  }
  for (std::size_t i = 1; i < d.size(); ++i) {
    EXPECT_GE(std::log(f[i - 1] / f[i]) / std::log(d[i - 1] / d[i]), 0.8);
  }
}

TEST(ComputeFbar, BoundedBySourceNorm) {
  // With int_Omega f = 0, f-bar = int_NL f (1 - wbar) / |Omega_NL| and 0 <= wbar <= 1,
  // so |f-bar| <= ||f||_{L2} / sqrt(|Omega_NL|).
  for (double delta : {0.1, 0.05}) {
    const auto s = interval(delta, delta / 8);
    const double bound = 1.0 / std::sqrt(s.geometry.measure(Region::Nonlocal));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto f = random_bandlimited_source(seed, 6, 1.0);
      const double fb = compute_fbar(f, s.geometry, s.meshes, s.kernel).fbar;
      EXPECT_LE(std::abs(fb), bound * source_l2_norm(f, s.geometry)) << seed;
    }
  }
}

TEST(AssembleSource, ZeroAndConstantSources) {
  const auto s = interval(0.1, 0.1 / 8);
  const auto zero = assemble_source([](double) { return 0.0; }, s.geometry, s.meshes, s.kernel, {});
  EXPECT_EQ(zero.f_local.norm(), 0.0);
  EXPECT_EQ(zero.f_nonlocal.norm(), 0.0);

  auto c = [](double) { return 1.7; };
  const auto shift = compute_fbar(c, s.geometry, s.meshes, s.kernel);
  const auto src = assemble_source(c, s.geometry, s.meshes, s.kernel, shift);
  for (std::size_t i = 0; i < s.meshes.nonlocal.size(); ++i) {
    if (0.5 - std::abs(s.meshes.nonlocal.cells[i].center) > 0.2) {
      EXPECT_NEAR(src.f_nonlocal[static_cast<Eigen::Index>(i)], 1.7 + shift.fbar, 1e-6);
    }
  }
}

TEST(AssembleSource, DiscreteCompatibility) {
  for (const auto& s : {interval(0.1, 0.1 / 8), radial(0.1, 0.1 / 8)}) {
    const auto f = named_source("cos_pi");
    const auto shift = compute_fbar(f, s.geometry, s.meshes, s.kernel);
    const auto src = assemble_source(f, s.geometry, s.meshes, s.kernel, shift);
    EXPECT_NEAR(discrete_compatibility(src, s.meshes), 0.0, 1e-12);
  }
}

TEST(AssembleSource, ReproducedByIndependentQuadrature) {
  const auto s = interval(0.1, 0.1 / 8);
  const auto f = named_source("cos_pi");
  const auto shift = compute_fbar(f, s.geometry, s.meshes, s.kernel);
  const auto src = assemble_source(f, s.geometry, s.meshes, s.kernel, shift);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, s.meshes.nonlocal.size() - 1);
  for (int t = 0; t < 10; ++t) {
    const std::size_t i = pick(rng);
    const double x = s.meshes.nonlocal.cells[i].center;
    const double lo = std::max(-0.5, x - 0.2), hi = std::min(0.5, x + 0.2);
    double ref = 0.0;
    const int panels = 400;
    for (int p = 0; p < panels; ++p) {
      const double a = lo + (hi - lo) * p / panels, b = lo + (hi - lo) * (p + 1) / panels;
      ref += quad::gauss<7>([&](double y) { return s.kernel(Variant::Rbar, Point{x, 0}, Point{y, 0}) * f(y); },
                            a, b);
    }
    EXPECT_NEAR(src.f_nonlocal[static_cast<Eigen::Index>(i)], ref + shift.fbar, 1e-8) << x;
  }
}

}  // namespace
}  // namespace nlc
