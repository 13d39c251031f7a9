#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nlc::quad {

/// Fixed-order Gauss-Legendre rule on [a, b].
template <unsigned Points = 20, class F>
double gauss(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss<double, Points>::integrate(f, a, b);
}

/// Gauss-Legendre on [a, b] split at every breakpoint that falls strictly inside.
/// Integrands that are analytic between breakpoints converge spectrally.
template <unsigned Points = 20, class F>
double gauss_panels(F&& f, double a, double b, std::initializer_list<double> breaks,
                    int subpanels = 1) {
  if (b <= a) return 0.0;
  std::vector<double> pts{a, b};
  for (double p : breaks) {
    if (p > a && p < b) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double step = (pts[i + 1] - lo) / subpanels;
    for (int s = 0; s < subpanels; ++s) {
      total += gauss<Points>(f, lo + s * step, lo + (s + 1) * step);
    }
  }
  return total;
}

/// Adaptive Gauss-Kronrod (15-point) to the requested relative tolerance.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol = 1e-12) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 30, rel_tol);
}

}  // namespace nlc::quad
