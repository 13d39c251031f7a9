#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlcouple/error.hpp"
#include "nlcouple/kernel.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {
namespace {

TEST(ProfileEval, QuadraticValues) {
  const auto p = KernelProfile::quadratic();
  EXPECT_DOUBLE_EQ(p(Variant::R, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(p(Variant::R, 0.0), 1.0);
  EXPECT_NEAR(p(Variant::Rbar, 0.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(Variant::Rbarbar, 0.0), 1.0 / 12.0, 1e-15);
  EXPECT_DOUBLE_EQ(p(Variant::Rbar, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(p.gamma0(), 0.25);
}

TEST(ProfileEval, NegativeArgumentThrows) {
  EXPECT_THROW(KernelProfile::quadratic()(Variant::R, -1e-3), DomainError);
}

TEST(ProfileEval, AntiderivativeChainByFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(1e-4, 1.0 - 1e-4);
  const double h = 1e-5;
  for (const auto& p : {KernelProfile::quadratic(), KernelProfile::cubic()}) {
    for (int i = 0; i < 1000; ++i) {
      const double r = unif(rng);
      const double d1 = (p(Variant::Rbar, r + h) - p(Variant::Rbar, r - h)) / (2 * h);
      const double d2 = (p(Variant::Rbarbar, r + h) - p(Variant::Rbarbar, r - h)) / (2 * h);
      EXPECT_LE(std::abs(d1 + p(Variant::R, r)), 1e-6) << p.name() << " r=" << r;
      EXPECT_LE(std::abs(d2 + p(Variant::Rbar, r)), 1e-6) << p.name() << " r=" << r;
    }
  }
}

TEST(ProfileEval, BuiltinsAreAdmissible) {
  for (const auto& name : KernelProfile::builtin_names()) {
    EXPECT_NO_THROW(KernelProfile::by_name(name).check_admissible()) << name;
  }
  EXPECT_THROW(KernelProfile::by_name("nosuch"), ConfigError);
}

TEST(ProfileEval, TabulatedReproducesQuadraticClosely) {
  std::vector<double> r, v;
  for (int k = 0; k <= 200; ++k) {
    r.push_back(k / 200.0);
    v.push_back(std::pow(1.0 - k / 200.0, 2));
  }
  const auto t = KernelProfile::tabulated("tab", r, v);
  const auto q = KernelProfile::quadratic();
  for (double x : {0.0, 0.13, 0.5, 0.77, 0.99}) {
    EXPECT_NEAR(t(Variant::R, x), q(Variant::R, x), 1e-5);
    EXPECT_NEAR(t(Variant::Rbar, x), q(Variant::Rbar, x), 1e-6);
    EXPECT_NEAR(t(Variant::Rbarbar, x), q(Variant::Rbarbar, x), 1e-6);
  }
  EXPECT_NO_THROW(t.check_admissible());
}

TEST(ProfileEval, TabulatedAntiderivativesAreExact) {
  const auto t = KernelProfile::tabulated("tab", {0.0, 0.3, 0.6, 1.0}, {1.0, 0.6, 0.2, 0.0});
  for (double r : {0.0, 0.2, 0.45, 0.8}) {
    const double rb = quad::gauss_panels<20>([&](double s) { return t(Variant::R, s); }, r, 1.0,
                                             {0.3, 0.6});
    const double rbb = quad::gauss_panels<20>([&](double s) { return t(Variant::Rbar, s); }, r,
                                              1.0, {0.3, 0.6});
    EXPECT_NEAR(t(Variant::Rbar, r), rb, 1e-13);
    EXPECT_NEAR(t(Variant::Rbarbar, r), rbb, 1e-13);
  }
}

TEST(ProfileEval, LoadTableFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "nlc_profile_table.txt";
  {
    std::ofstream out(path);
    out << "# r R(r)\n0 1\n0.5 0.25\n1 0\n";
  }
  const auto p = KernelProfile::load_table(path);
  EXPECT_NEAR(p(Variant::R, 0.5), 0.25, 1e-14);
  std::filesystem::remove(path);
  EXPECT_THROW(KernelProfile::load_table("/nonexistent/table.txt"), ConfigError);
}

TEST(Normalization, QuadraticOneDimension) {
  EXPECT_NEAR(normalization_constant(KernelProfile::quadratic(), 1), 105.0 / 64.0,
              1e-8 * 105.0 / 64.0);
}

TEST(Normalization, QuadraticTwoDimensions) {
  EXPECT_NEAR(normalization_constant(KernelProfile::quadratic(), 2), 3.0 / std::numbers::pi,
              1e-8 * 3.0 / std::numbers::pi);
}

TEST(Normalization, UnsupportedDimension) {
  EXPECT_THROW(normalization_constant(KernelProfile::quadratic(), 3), UnsupportedError);
  EXPECT_THROW(unit_sphere_measure(0), UnsupportedError);
}

TEST(Normalization, DegenerateProfile) {
  auto zero = [](double) { return 0.0; };
  const auto p = KernelProfile::from_functions("zero", zero, zero, zero, 0.0);
  EXPECT_THROW(normalization_constant(p, 1), DomainError);
}

TEST(Normalization, ScaledRbarIntegratesToOne) {
  for (double delta : {0.2, 0.1, 0.05}) {
    const ScaledKernel k1(KernelProfile::quadratic(), delta, 1);
    const double s = 2 * delta;
    const double i1 = quad::gauss_panels<20>(
        [&](double y) { return k1(Variant::Rbar, Point{0, 0}, Point{y, 0}); }, -s, s, {0.0});
    EXPECT_NEAR(i1, 1.0, 1e-8) << delta;

    const ScaledKernel k2(KernelProfile::quadratic(), delta, 2);
    const double i2 = quad::gauss<20>(
        [&](double r) {
          return 2 * std::numbers::pi * r * k2(Variant::Rbar, Point{0, 0}, Point{r, 0});
        },
        0.0, s);
    EXPECT_NEAR(i2, 1.0, 1e-8) << delta;
  }
}

TEST(KernelEval, Examples) {
  const ScaledKernel k(KernelProfile::quadratic(), 0.1, 1);
  EXPECT_EQ(k(Variant::Rbar, Point{0, 0}, Point{0.5, 0}), 0.0);
  EXPECT_NEAR(k(Variant::Rbarbar, Point{0, 0}, Point{0, 0}), 1.367188, 1e-6);
  EXPECT_NEAR(k(Variant::Rbar, Point{0, 0}, Point{0, 0}), 5.468750, 1e-6);
  EXPECT_EQ(k(Variant::R, Point{0, 0}, Point{0.2, 0}), 0.0);
}

TEST(KernelEval, SupportRadius) {
  const ScaledKernel k(KernelProfile::quadratic(), 0.1, 1);
  EXPECT_DOUBLE_EQ(k.support_radius(), 0.2);
  EXPECT_DOUBLE_EQ(k.with_delta(0.05).support_radius(), 0.1);
  EXPECT_DOUBLE_EQ(k.with_delta(1.0).support_radius(), 2.0);
  EXPECT_DOUBLE_EQ(k.with_delta(0.05).alpha(), k.alpha());
}

}  // namespace
}  // namespace nlc
