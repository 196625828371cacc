#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homog/correctors.hpp"
#include "homog/solver.hpp"

namespace homog {

/// Dirichlet boundary data for an a-harmonic sample. Values are evaluated at
/// physical offsets p from the box center.
struct BoundarySpec {
  enum class Kind { Affine, Polynomial, Random };
  Kind kind = Kind::Affine;
  std::array<double, 3> xi{};    // linear part
  std::array<double, 9> quad{};  // symmetric quadratic part, row-major
  double noise_amp = 0.0;        // i.i.d. uniform noise added on the boundary
  std::uint64_t seed = 0;

  double value(const BoxDomain& box, std::int64_t site) const;

  /// ah-harmonic polynomial of degree <= 2 (quadratic projected onto
  /// trace(Q ah) = 0) with random coefficients plus boundary noise.
  static BoundarySpec random_polynomial(std::uint64_t seed, const HomMatrix& ah,
                                        double quad_scale, double noise_amp);
};

struct HarmonicSample {
  BoxDomain box;
  std::vector<double> values;
  double residual_rel = 0.0;
  SolveReport report;
};

HarmonicSample harmonic_sample(const CoefficientField& a, const BoxDomain& box,
                               const BoundarySpec& spec, const SolveOptions& opts = {});

struct ExcessValue {
  double value = 0.0;  // mean-square residual of the best corrected slope
  std::array<double, 3> xi{};
  bool gram_singular = false;
  double gram_eig_min = 0.0;
  double gram_eig_max = 0.0;
};

/// inf over slopes xi of the B_r(center) mean of |grad u - xi_i (e_i + grad
/// phi_i)|^2; center is a physical offset from the box center. The d x d
/// normal equations are solved by pseudo-inverse when the Gram matrix is
/// numerically singular.
ExcessValue intrinsic_excess(const HarmonicSample& u, const CorrectorSet& correctors,
                             const Site& center, double r);

struct SampleExcess {
  std::vector<double> radii;
  std::vector<double> excess_sqrt;
  std::vector<double> excess_sqrt_fixed;  // against the slope fitted at the smallest radius
  std::vector<std::array<double, 3>> xi;
  double slope_opt = 0.0;
  double slope_fixed = 0.0;
  double slope_residual = 0.0;
  double slope_bound_const = 0.0;   // max_r |xi(r)| / rms of grad u on the largest ball
  double xi_stability_const = 0.0;  // max_r |xi(r) - xi(R)| / excess(R)^{1/2}
  double gram_eig_min = 0.0;
  double gram_eig_max = 0.0;
  bool ok = false;
  std::string error;
};

struct ExcessExperimentReport {
  std::vector<SampleExcess> samples;
  double median_slope_opt = 0.0;
  double median_slope_fixed = 0.0;
  double max_slope_bound_const = 0.0;
  int n_ok = 0;
};

/// Monte Carlo over a-harmonic samples with random polynomial boundary data;
/// requires a certified growth report at the box center.
ExcessExperimentReport excess_decay_experiment(const CoefficientField& a,
                                               const CorrectorSet& correctors,
                                               int R, std::span<const double> radii,
                                               int n_samples, std::uint64_t seed,
                                               bool growth_certified,
                                               const SolveOptions& opts = {});

}  // namespace homog
