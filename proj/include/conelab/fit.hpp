#pragma once

// Least-squares power-law fits y ~ C x^slope in log10-log10 coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "conelab/errors.hpp"

namespace conelab {

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;      // log10 C
  double slope_stderr = 0.0;
  double half_width = 0.0;     // 95% confidence half-width of the slope
  double max_residual = 0.0;   // max |log10 y - fit|
  std::size_t points = 0;
};

inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw structural_error("fit_power_law: x and y differ in length");
  if (x.size() < 2) throw structural_error("fit_power_law needs at least two points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw domain_error("fit_power_law needs positive data");
    mx += std::log10(x[i]);
    my += std::log10(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log10(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log10(y[i]) - my);
  }
  if (sxx == 0.0) throw structural_error("fit_power_law: all abscissae coincide");

  PowerLawFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::log10(y[i]) - (fit.intercept + fit.slope * std::log10(x[i]));
    sse += r * r;
    fit.max_residual = std::max(fit.max_residual, std::abs(r));
  }
  if (n > 2) {
    fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * fit.slope_stderr;
  }
  return fit;
}

}  // namespace conelab
