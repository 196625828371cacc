#pragma once

#include <optional>
#include <span>
#include <vector>

#include "homog/correctors.hpp"

namespace homog {

/// Sublinear-growth measurement of the stacked pair (phi, sigma) around one
/// center: omega(r) is the centered L2 deviation over B_r.
struct GrowthReport {
  Site center{0, 0, 0};
  std::vector<double> radii;
  std::vector<double> omega;        // (phi, sigma) stacked
  std::vector<double> omega_phi;
  std::vector<double> omega_sigma;

  double alpha_fit = 0.0;
  bool alpha_defined = false;
  bool degenerate = false;  // all omega vanish (constant medium)
  int fit_lo = 0, fit_hi = -1;  // inclusive index window used for the fit
  double fit_residual = 0.0;

  double r_star = 0.0;
  /// True when omega(s) <= (s / r_star)^(1 - alpha) was verified for every
  /// listed radius s >= r_star.
  bool certified = false;
};

/// Default dyadic radius grid {2, 4, ..., L/4}.
std::vector<double> dyadic_radii(const TorusGrid& grid);

/// Omega profile; radii above L/4 are rejected (wrap contamination).
GrowthReport growth_profile(const CorrectorSet& correctors, const Site& center,
                            std::span<const double> radii);

/// Fit alpha from the log-log slope (window drops the smallest and largest
/// radius when enough points remain) and detect r_star as the smallest listed
/// radius from which the (T.1)-style bound certifies pointwise on the grid.
void fit_alpha_rstar(GrowthReport& report,
                     std::optional<double> alpha_nominal = std::nullopt);

GrowthReport measure_growth(const CorrectorSet& correctors, const Site& center,
                            std::span<const double> radii,
                            std::optional<double> alpha_nominal = std::nullopt);

}  // namespace homog
