#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlcouple/error.hpp"
#include "nlcouple/geometry.hpp"

namespace nlc {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(BuildGeometry, IntervalExample) {
  const auto g = Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(g.measure(Region::Nonlocal), 1.0);
  EXPECT_DOUBLE_EQ(g.measure(Region::Local), 1.0);
  const auto q = interface_quadrature(g);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_DOUBLE_EQ(q.nodes[0].coord, -0.5);
  EXPECT_DOUBLE_EQ(q.nodes[0].normal.x, -1.0);
  EXPECT_DOUBLE_EQ(q.nodes[1].coord, 0.5);
  EXPECT_DOUBLE_EQ(q.nodes[1].normal.x, 1.0);
  EXPECT_DOUBLE_EQ(q.total_measure(), 2.0);
}

TEST(BuildGeometry, HorizonTooLarge) {
  try {
    Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.3);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2*delta"), std::string::npos);
  }
  EXPECT_THROW(Geometry::build(GeometryMode::Interval1D, 0.2, 1.0, 0.1), ConfigError);
}

TEST(BuildGeometry, DegenerateRegion) {
  EXPECT_THROW(Geometry::build(GeometryMode::Interval1D, 0.0, 1.0, 0.01), ConfigError);
  EXPECT_THROW(Geometry::build(GeometryMode::RadialDisk2D, -0.5, 1.0, 0.01), ConfigError);
  EXPECT_THROW(Geometry::build(GeometryMode::RadialDisk2D, 1.0, 1.0, 0.01), ConfigError);
}

TEST(BuildGeometry, RadialExample) {
  const auto g = Geometry::build(GeometryMode::RadialDisk2D, 0.5, 1.0, 0.1);
  EXPECT_NEAR(g.interface_measure(), kPi, 1e-15);
  const auto q = interface_quadrature(g);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_DOUBLE_EQ(q.nodes[0].coord, 0.5);
  EXPECT_NEAR(q.nodes[0].weight, kPi, 1e-15);
  EXPECT_DOUBLE_EQ(q.nodes[0].normal.x, 1.0);
}

TEST(VolumeMeshes, IntervalCells) {
  const auto g = Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.05);
  const auto nl = volume_mesh(g, Region::Nonlocal, 0.25);
  ASSERT_EQ(nl.size(), 4u);
  const double expected[] = {-0.375, -0.125, 0.125, 0.375};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(nl.cells[i].center, expected[i], 1e-15);
    EXPECT_NEAR(nl.cells[i].measure, 0.25, 1e-15);
  }
  const auto loc = volume_mesh(g, Region::Local, 0.25);
  EXPECT_EQ(loc.size(), 4u);
}

TEST(VolumeMeshes, RadialRings) {
  const auto g = Geometry::build(GeometryMode::RadialDisk2D, 0.5, 1.0, 0.05);
  const auto nl = volume_mesh(g, Region::Nonlocal, 0.25);
  ASSERT_EQ(nl.size(), 2u);
  EXPECT_NEAR(nl.cells[0].measure, kPi * 0.0625, 1e-15);
  EXPECT_NEAR(nl.cells[1].measure, kPi * (0.25 - 0.0625), 1e-15);
}

TEST(VolumeMeshes, PartitionOfUnity) {
  for (auto mode : {GeometryMode::Interval1D, GeometryMode::RadialDisk2D}) {
    for (double a : {0.3, 0.5, 0.62}) {
      const auto g = Geometry::build(mode, a, 1.0, 0.01);
      for (double h : {0.1, 0.013, 0.0021}) {
        for (auto region : {Region::Local, Region::Nonlocal}) {
          const double m = volume_mesh(g, region, h).total_measure();
          EXPECT_NEAR(m, g.measure(region), 1e-12 * g.measure(region));
        }
      }
    }
  }
  const auto g = Geometry::build(GeometryMode::RadialDisk2D, 0.4, 1.3, 0.01);
  EXPECT_NEAR(g.measure(Region::Local), kPi * (1.69 - 0.16), 1e-13);
  EXPECT_NEAR(g.measure(Region::Nonlocal), kPi * 0.16, 1e-14);
}

TEST(NeighborsWithin, Examples) {
  const auto g = Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.01);
  const auto mesh = volume_mesh(g, Region::Nonlocal, 0.1);
  const auto near = neighbors_within(mesh, Point{0, 0}, 0.2);
  ASSERT_EQ(near.size(), 4u);
  const double expected[] = {-0.15, -0.05, 0.05, 0.15};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(mesh.cells[near[i]].center, expected[i], 1e-14);
  EXPECT_TRUE(neighbors_within(mesh, Point{0, 0}, 0.049).empty());
  EXPECT_EQ(neighbors_within(mesh, Point{0, 0}, 10.0).size(), 10u);
}

TEST(NeighborsWithin, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  const auto g = Geometry::build(GeometryMode::Interval1D, 0.5, 1.0, 0.01);
  const auto mesh = volume_mesh(g, Region::Nonlocal, 1e-4);
  ASSERT_EQ(mesh.size(), 10000u);
  std::uniform_real_distribution<double> pos(-0.6, 0.6), rad(1e-5, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = pos(rng);
    const double r = rad(rng);
    std::vector<std::size_t> brute;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      if (std::abs(mesh.cells[j].center - p) < r) brute.push_back(j);
    }
    EXPECT_EQ(neighbors_within(mesh, Point{p, 0}, r), brute);
  }
}

// Periodic trapezoid rule over the full circle.
double trapezoid_angular(const ScaledKernel& k, Variant v, double ri, double rj, int n) {
  double s = 0.0;
  for (int m = 0; m < n; ++m) {
    const double t = 2 * kPi * m / n;
    s += k(v, Point{ri, 0}, Point{rj * std::cos(t), rj * std::sin(t)});
  }
  return s * 2 * kPi / n * rj;
}

TEST(RingKernelTable, MatchesDirectAngularQuadrature) {
  const ScaledKernel k(KernelProfile::quadratic(), 0.1, 2);
  const RingKernelTable table(k);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(0.0, 0.5), dr(-0.19, 0.19);
  for (int trial = 0; trial < 200; ++trial) {
    const double ri = r(rng);
    const double rj = std::abs(ri + dr(rng));
    for (Variant v : {Variant::Rbar, Variant::Rbarbar}) {
      const double ref = trapezoid_angular(k, v, ri, rj, 2048);
      EXPECT_NEAR(table.entry(v, ri, rj), ref, 1e-8 * std::max(std::abs(ref), 1.0))
          << ri << " " << rj;
    }
    // R is only C^1 across the support edge; the trapezoid rule needs more points.
    const double ref = trapezoid_angular(k, Variant::R, ri, rj, 1 << 16);
    EXPECT_NEAR(table.entry(Variant::R, ri, rj), ref, 1e-8 * std::max(std::abs(ref), 1.0));
  }
}

TEST(RingKernelTable, VanishesOutsideSupport) {
  const ScaledKernel k(KernelProfile::quadratic(), 0.1, 2);
  const RingKernelTable table(k);
  EXPECT_EQ(table.entry(Variant::R, 0.3, 0.51), 0.0);
  EXPECT_EQ(table.entry(Variant::Rbar, 0.5, 0.25), 0.0);
  EXPECT_GT(table.entry(Variant::Rbar, 0.5, 0.35), 0.0);
}

TEST(KernelIntegrator, RadialCellExactMatchesPlanarQuadrature) {
  const auto g = Geometry::build(GeometryMode::RadialDisk2D, 0.5, 1.0, 0.05);
  const ScaledKernel k(KernelProfile::quadratic(), 0.05, 2);
  const KernelIntegrator integ(g, k);
  const Cell c{0.42, 0.45, 0.435, kPi * (0.45 * 0.45 - 0.42 * 0.42)};
  // Fine polar tensor midpoint rule around the origin.
  const int nr = 2000, nt = 8000;
  double ref = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double rr = c.lo + (c.hi - c.lo) * (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = 2 * kPi * (j + 0.5) / nt;
      ref += k(Variant::Rbar, Point{0.47, 0}, Point{rr * std::cos(t), rr * std::sin(t)}) * rr;
    }
  }
  ref *= (c.hi - c.lo) / nr * 2 * kPi / nt;
  EXPECT_NEAR(integ.cell_exact(Variant::Rbar, 0.47, c), ref, 1e-6 * ref);
}

}  // namespace
}  // namespace nlc
