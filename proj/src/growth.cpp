#include "homog/growth.hpp"

#include <cmath>

#include "homog/fit.hpp"

namespace homog {

std::vector<double> dyadic_radii(const TorusGrid& grid) {
  std::vector<double> out;
  for (double r = 2; r <= grid.side / 4.0; r *= 2) out.push_back(r);
  return out;
}

GrowthReport growth_profile(const CorrectorSet& correctors, const Site& center,
                            std::span<const double> radii) {
  const TorusGrid& grid = correctors.phi.front().grid;
  GrowthReport rep;
  rep.center = center;

  std::vector<ComponentView> phi_comps, sigma_comps, all_comps;
  for (const ScalarField& f : correctors.phi)
    phi_comps.push_back(ComponentView{f.v.data(), 1});
  for (const SkewTensorField& s : correctors.sigma)
    for (int p = 0; p < s.pairs; ++p)
      sigma_comps.push_back(ComponentView{s.v.data() + p, s.pairs});
  all_comps = phi_comps;
  all_comps.insert(all_comps.end(), sigma_comps.begin(), sigma_comps.end());

  for (double r : radii) {
    if (r > grid.side / 4.0)
      throw Error(ErrorCode::RadiusTooLarge, "growth radius exceeds L/4");
    const auto sites = ball_sites(grid, Ball{center, r});
    rep.radii.push_back(r);
    rep.omega.push_back(ball_l2_dev(grid, all_comps, sites));
    rep.omega_phi.push_back(ball_l2_dev(grid, phi_comps, sites));
    rep.omega_sigma.push_back(ball_l2_dev(grid, sigma_comps, sites));
  }
  return rep;
}

void fit_alpha_rstar(GrowthReport& rep, std::optional<double> alpha_nominal) {
  const int n = int(rep.radii.size());
  int positive = 0;
  for (double w : rep.omega)
    if (w > 0) ++positive;
  rep.degenerate = positive == 0;

  if (positive >= 4) {
    int lo = 0, hi = n - 1;
    if (positive >= 6) {  // drop lattice-scale and periodization-scale ends
      lo = 1;
      hi = n - 2;
    }
    std::vector<double> r(rep.radii.begin() + lo, rep.radii.begin() + hi + 1);
    std::vector<double> w(rep.omega.begin() + lo, rep.omega.begin() + hi + 1);
    const LineFit fit = fit_loglog(r, w);
    if (fit.npoints >= 4) {
      rep.alpha_fit = 1.0 - fit.slope;
      rep.alpha_defined = true;
      rep.fit_lo = lo;
      rep.fit_hi = hi;
      rep.fit_residual = fit.residual_rms;
    }
  }

  if (rep.degenerate || !rep.alpha_defined) {
    if (!alpha_nominal && !rep.degenerate) {
      rep.r_star = rep.radii.empty() ? 0.0 : rep.radii.front();
      return;
    }
  }
  const double alpha = alpha_nominal ? *alpha_nominal : rep.alpha_fit;
  if (rep.degenerate) {
    rep.r_star = rep.radii.empty() ? 0.0 : rep.radii.front();
    rep.certified = true;
    return;
  }
  for (int i0 = 0; i0 < n; ++i0) {
    const double r0 = rep.radii[i0];
    bool ok = true;
    for (int s = i0; s < n && ok; ++s)
      ok = rep.omega[s] <= std::pow(rep.radii[s] / r0, 1.0 - alpha);
    if (ok) {
      rep.r_star = r0;
      rep.certified = true;
      return;
    }
  }
  rep.r_star = rep.radii.empty() ? 0.0 : rep.radii.back();
  rep.certified = false;
}

GrowthReport measure_growth(const CorrectorSet& correctors, const Site& center,
                            std::span<const double> radii,
                            std::optional<double> alpha_nominal) {
  GrowthReport rep = growth_profile(correctors, center, radii);
  fit_alpha_rstar(rep, alpha_nominal);
  return rep;
}

}  // namespace homog
