#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nlcouple/point.hpp"

namespace nlc {

/// Which member of the kernel triple to evaluate: R, its tail integral R̄,
/// or the second tail integral R̄̄.
enum class Variant { R, Rbar, Rbarbar };

std::string_view to_string(Variant v);

/// A compactly supported radial profile R on [0, inf) together with its two
/// tail antiderivatives
///
///   Rbar(r)    = int_r^inf R(s) ds,
///   Rbarbar(r) = int_r^inf Rbar(s) ds.
///
/// Admissible profiles are C^1, nonnegative, vanish for r >= 1 and satisfy
/// R(r) >= gamma0 > 0 on [0, 1/2].
class KernelProfile {
 public:
  /// R(r) = (1 - r)^2 on [0, 1). The default profile.
  static KernelProfile quadratic();
  /// R(r) = (1 - r)^3 on [0, 1).
  static KernelProfile cubic();

  /// Monotone-cubic (Fritsch-Carlson) interpolant through (r_k, R_k). The
  /// table must start at r = 0 and end at r = 1 with R = 0 there; the slope
  /// at r = 1 is forced to zero so the interpolant is C^1 across the support
  /// edge. Rbar and Rbarbar are the exact antiderivatives of the interpolant.
  static KernelProfile tabulated(std::string name, std::vector<double> r,
                                 std::vector<double> values);

  /// Reads whitespace-separated "r R(r)" pairs; '#' starts a comment.
  static KernelProfile load_table(const std::filesystem::path& path);

  /// Profile from caller-supplied closed forms. No admissibility checks are
  /// run; `check_admissible` can be called explicitly.
  static KernelProfile from_functions(std::string name, std::function<double(double)> r,
                                      std::function<double(double)> rbar,
                                      std::function<double(double)> rbarbar, double gamma0);

  /// Built-in profile by name ("quadratic", "cubic"). Throws ConfigError.
  static KernelProfile by_name(std::string_view name);
  static std::vector<std::string> builtin_names();

  const std::string& name() const;
  double gamma0() const;

  /// Profile value. Throws DomainError for r < 0; zero for r >= 1.
  double operator()(Variant v, double r) const;

  /// Residual-based admissibility check on a sample grid: nonnegativity,
  /// compact support, nondegeneracy and the antiderivative chain. Throws
  /// ConfigError naming the violated property.
  void check_admissible() const;

  struct Impl;  // opaque

 private:
  explicit KernelProfile(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// alpha_n such that alpha_n * S_n * int_0^2 Rbar(r^2/4) r^{n-1} dr = 1, with
/// S_1 = 2 and S_2 = 2*pi (surface measure of the unit sphere). Adaptive
/// quadrature to relative tolerance 1e-12.
double normalization_constant(const KernelProfile& profile, int dimension);

/// Surface measure of the unit sphere in R^n.
double unit_sphere_measure(int dimension);

/// The scaled kernel alpha_n delta^{-n} Rtilde(|x-y|^2 / (4 delta^2)).
///
/// Immutable; safe to share across threads.
class ScaledKernel {
 public:
  ScaledKernel(KernelProfile profile, double delta, int dimension);

  /// Same profile and dimension at another horizon. alpha_n is independent
  /// of delta and is carried over rather than recomputed.
  ScaledKernel with_delta(double delta) const;

  const KernelProfile& profile() const { return profile_; }
  double delta() const { return delta_; }
  int dimension() const { return dimension_; }
  double alpha() const { return alpha_; }

  /// 2 * delta: every variant vanishes at and beyond this distance.
  double support_radius() const { return 2.0 * delta_; }

  double operator()(Variant v, const Point& x, const Point& y) const {
    return at_distance_sq(v, distance_sq(x, y));
  }

  double at_distance_sq(Variant v, double dist_sq) const;

 private:
  ScaledKernel(KernelProfile profile, double delta, int dimension, double alpha);

  KernelProfile profile_;
  double delta_;
  int dimension_;
  double alpha_;
  double scale_;  // alpha * delta^{-n}
};

}  // namespace nlc
