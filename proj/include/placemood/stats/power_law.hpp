#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "placemood/error.hpp"

namespace placemood::stats {

/// y = scale * x^exponent, fitted by least squares on (ln x, ln y).
struct PowerLawFit {
  double exponent = 0.0;
  double scale = 0.0;
  double r_squared = 0.0;  // of the log-log line
  std::size_t n_points = 0;

  double operator()(double x) const { return scale * std::pow(x, exponent); }
};

inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: x and y differ in length");
  if (x.size() < 2) throw InsufficientData("power-law fit needs at least 2 points");
  const std::size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: values must be positive");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InsufficientData("power-law fit needs at least 2 distinct x values");
  PowerLawFit fit;
  fit.n_points = n;
  fit.exponent = sxy / sxx;
  fit.scale = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace placemood::stats
