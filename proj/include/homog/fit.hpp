#pragma once

#include <span>

namespace homog {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;  // in the fitted (log) units
  int npoints = 0;
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares line through (log x_i, log y_i); pairs with y <= 0 are
/// skipped.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

double median(std::span<const double> values);

}  // namespace homog
