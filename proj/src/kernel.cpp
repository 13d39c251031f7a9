#include "nlcouple/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nlcouple/error.hpp"
#include "nlcouple/quadrature.hpp"

namespace nlc {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::R:
      return "R";
    case Variant::Rbar:
      return "Rbar";
    case Variant::Rbarbar:
      return "Rbarbar";
  }
  return "?";
}

struct KernelProfile::Impl {
  std::string name;
  double gamma0 = 0.0;
  std::function<double(Variant, double)> eval;  // called for 0 <= r < 1
};

KernelProfile::KernelProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

namespace {

// R(r) = (1 - r)^p; the tails are (1 - r)^{p+1}/(p+1) and (1 - r)^{p+2}/((p+1)(p+2)).
std::shared_ptr<KernelProfile::Impl> power_profile(std::string name, int p) {
  auto impl = std::make_shared<KernelProfile::Impl>();
  impl->name = std::move(name);
  impl->gamma0 = std::pow(0.5, p);
  const double c1 = 1.0 / (p + 1);
  const double c2 = 1.0 / ((p + 1.0) * (p + 2.0));
  impl->eval = [p, c1, c2](Variant v, double r) {
    const double s = 1.0 - r;
    switch (v) {
      case Variant::R:
        return std::pow(s, p);
      case Variant::Rbar:
        return c1 * std::pow(s, p + 1);
      case Variant::Rbarbar:
        return c2 * std::pow(s, p + 2);
    }
    return 0.0;
  };
  return impl;
}

// Piecewise cubic Hermite interpolant in local coordinates s = r - r_k, with
// precomputed tail integrals at the knots.
struct HermiteTable {
  std::vector<double> knots;
  std::vector<std::array<double, 4>> coef;  // c0 + c1 s + c2 s^2 + c3 s^3
  std::vector<double> tail1;                // Rbar at knots
  std::vector<double> tail2;                // Rbarbar at knots

  static double p1(const std::array<double, 4>& c, double s) {
    return s * (c[0] + s * (c[1] / 2 + s * (c[2] / 3 + s * c[3] / 4)));
  }
  static double p2(const std::array<double, 4>& c, double s) {
    return s * s * (c[0] / 2 + s * (c[1] / 6 + s * (c[2] / 12 + s * c[3] / 20)));
  }

  double eval(Variant v, double r) const {
    auto it = std::upper_bound(knots.begin(), knots.end(), r);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - knots.begin() - 1));
    k = std::min(k, coef.size() - 1);
    const auto& c = coef[k];
    const double s = r - knots[k];
    const double len = knots[k + 1] - knots[k];
    switch (v) {
      case Variant::R:
        return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
      case Variant::Rbar:
        return tail1[k + 1] + p1(c, len) - p1(c, s);
      case Variant::Rbarbar:
        return tail2[k + 1] + (tail1[k + 1] + p1(c, len)) * (len - s) - (p2(c, len) - p2(c, s));
    }
    return 0.0;
  }
};

// Fritsch-Carlson slopes: harmonic-mean interior slopes, zero at local extrema.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n - 1), m(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
  m[0] = d[0];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) {
      m[k] = 0.0;
    } else {
      const double h0 = x[k] - x[k - 1];
      const double h1 = x[k + 1] - x[k];
      const double w1 = 2 * h1 + h0;
      const double w2 = h1 + 2 * h0;
      m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }
  // Endpoint slope must not point out of the data range.
  if (m[0] * d[0] < 0.0) m[0] = 0.0;
  m[n - 1] = 0.0;
  return m;
}

}  // namespace

KernelProfile KernelProfile::quadratic() { return KernelProfile(power_profile("quadratic", 2)); }

KernelProfile KernelProfile::cubic() { return KernelProfile(power_profile("cubic", 3)); }

KernelProfile KernelProfile::tabulated(std::string name, std::vector<double> r,
                                       std::vector<double> values) {
  if (r.size() != values.size() || r.size() < 3) {
    throw ConfigError("kernel table '" + name + "': need at least 3 (r, R) pairs");
  }
  if (r.front() != 0.0 || std::abs(r.back() - 1.0) > 1e-12) {
    throw ConfigError("kernel table '" + name + "': abscissae must span exactly [0, 1]");
  }
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    if (!(r[k + 1] > r[k])) {
      throw ConfigError("kernel table '" + name + "': abscissae must be strictly increasing");
    }
  }
  if (std::any_of(values.begin(), values.end(), [](double v) { return v < 0.0; })) {
    throw ConfigError("kernel table '" + name + "': R must be nonnegative");
  }
  if (std::abs(values.back()) > 1e-14) {
    throw ConfigError("kernel table '" + name + "': R(1) must be 0 (compact support)");
  }
  r.back() = 1.0;
  values.back() = 0.0;

  auto table = std::make_shared<HermiteTable>();
  const auto m = monotone_slopes(r, values);
  const std::size_t n = r.size();
  table->knots = r;
  table->coef.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = r[k + 1] - r[k];
    const double dy = (values[k + 1] - values[k]) / h;
    table->coef[k] = {values[k], m[k], (3 * dy - 2 * m[k] - m[k + 1]) / h,
                      (m[k] + m[k + 1] - 2 * dy) / (h * h)};
  }
  table->tail1.assign(n, 0.0);
  table->tail2.assign(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) {
    const double len = r[k + 1] - r[k];
    const auto& c = table->coef[k];
    table->tail1[k] = table->tail1[k + 1] + HermiteTable::p1(c, len);
    table->tail2[k] = table->tail2[k + 1] + (table->tail1[k + 1] + HermiteTable::p1(c, len)) * len -
                      HermiteTable::p2(c, len);
  }

  // The interpolant is monotone on each interval, so its minimum over [0, 1/2]
  // is attained at a knot or at r = 1/2.
  double gamma0 = table->eval(Variant::R, 0.5);
  for (std::size_t k = 0; k < n && r[k] <= 0.5; ++k) gamma0 = std::min(gamma0, values[k]);
  if (!(gamma0 > 0.0)) {
    throw ConfigError("kernel table '" + name + "': nondegeneracy fails (R must be > 0 on [0, 1/2])");
  }

  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->gamma0 = gamma0;
  impl->eval = [table](Variant v, double rr) { return table->eval(v, rr); };
  return KernelProfile(std::move(impl));
}

KernelProfile KernelProfile::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel table: " + path.string());
  std::vector<double> r, values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'r R(r)'");
    }
    r.push_back(a);
    values.push_back(b);
  }
  return tabulated(path.stem().string(), std::move(r), std::move(values));
}

KernelProfile KernelProfile::from_functions(std::string name, std::function<double(double)> r,
                                            std::function<double(double)> rbar,
                                            std::function<double(double)> rbarbar,
                                            double gamma0) {
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->gamma0 = gamma0;
  impl->eval = [r = std::move(r), rbar = std::move(rbar), rbarbar = std::move(rbarbar)](
                   Variant v, double x) {
    switch (v) {
      case Variant::R:
        return r(x);
      case Variant::Rbar:
        return rbar(x);
      case Variant::Rbarbar:
        return rbarbar(x);
    }
    return 0.0;
  };
  return KernelProfile(std::move(impl));
}

KernelProfile KernelProfile::by_name(std::string_view name) {
  if (name == "quadratic") return quadratic();
  if (name == "cubic") return cubic();
  throw ConfigError("unknown kernel profile '" + std::string(name) + "'");
}

std::vector<std::string> KernelProfile::builtin_names() { return {"quadratic", "cubic"}; }

const std::string& KernelProfile::name() const { return impl_->name; }

double KernelProfile::gamma0() const { return impl_->gamma0; }

double KernelProfile::operator()(Variant v, double r) const {
  if (r < 0.0 || std::isnan(r)) {
    throw DomainError("kernel profile evaluated at negative argument r = " + std::to_string(r));
  }
  if (r >= 1.0) return 0.0;
  return impl_->eval(v, r);
}

void KernelProfile::check_admissible() const {
  constexpr int kSamples = 2000;
  constexpr double kStep = 1e-5;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = static_cast<double>(i) / kSamples;
    for (Variant v : {Variant::R, Variant::Rbar, Variant::Rbarbar}) {
      if ((*this)(v, r) < -1e-14) {
        throw ConfigError("profile '" + name() + "': " + std::string(to_string(v)) +
                          " is negative at r = " + std::to_string(r));
      }
    }
    if (r <= 0.5 && (*this)(Variant::R, r) < gamma0() * (1 - 1e-12)) {
      throw ConfigError("profile '" + name() + "': R drops below gamma0 on [0, 1/2]");
    }
    if (r > kStep && r < 1.0 - kStep) {
      const double d1 = ((*this)(Variant::Rbar, r + kStep) - (*this)(Variant::Rbar, r - kStep)) /
                        (2 * kStep);
      const double d2 = ((*this)(Variant::Rbarbar, r + kStep) -
                         (*this)(Variant::Rbarbar, r - kStep)) /
                        (2 * kStep);
      if (std::abs(d1 + (*this)(Variant::R, r)) > 1e-6 ||
          std::abs(d2 + (*this)(Variant::Rbar, r)) > 1e-6) {
        throw ConfigError("profile '" + name() + "': antiderivative chain broken at r = " +
                          std::to_string(r));
      }
    }
  }
  if (!(gamma0() > 0.0)) throw ConfigError("profile '" + name() + "': gamma0 must be positive");
}

double unit_sphere_measure(int dimension) {
  switch (dimension) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      throw UnsupportedError("unsupported dimension n = " + std::to_string(dimension) +
                             " (only 1 and 2)");
  }
}

double normalization_constant(const KernelProfile& profile, int dimension) {
  const double sphere = unit_sphere_measure(dimension);
  const double radial = quad::adaptive(
      [&](double r) { return profile(Variant::Rbar, r * r / 4.0) * std::pow(r, dimension - 1); },
      0.0, 2.0, 1e-12);
  if (!(radial > 0.0) || !std::isfinite(radial)) {
    throw DomainError("degenerate profile '" + profile.name() +
                      "': Rbar integrates to zero, no normalization exists");
  }
  return 1.0 / (sphere * radial);
}

ScaledKernel::ScaledKernel(KernelProfile profile, double delta, int dimension)
    : ScaledKernel(profile, delta, dimension, normalization_constant(profile, dimension)) {}

ScaledKernel::ScaledKernel(KernelProfile profile, double delta, int dimension, double alpha)
    : profile_(std::move(profile)),
      delta_(delta),
      dimension_(dimension),
      alpha_(alpha),
      scale_(alpha * std::pow(delta, -dimension)) {
  if (!(delta > 0.0)) throw ConfigError("kernel horizon delta must be positive");
}

ScaledKernel ScaledKernel::with_delta(double delta) const {
  return ScaledKernel(profile_, delta, dimension_, alpha_);
}

double ScaledKernel::at_distance_sq(Variant v, double dist_sq) const {
  const double r = dist_sq / (4.0 * delta_ * delta_);
  if (r >= 1.0) return 0.0;
  return scale_ * profile_(v, r);
}

}  // namespace nlc
