#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "homog/correctors.hpp"
#include "homog/growth.hpp"

namespace homog {

/// Worst-case certification extracted from growth reports at the relevant
/// centers: largest r_star, smallest alpha, and the conjunction of the
/// pointwise certifications.
struct GrowthCert {
  double r_star = 1.0;
  double alpha = 0.5;
  bool certified = false;
};

GrowthCert combine_certs(std::span<const GrowthReport> reports);

/// Source problem pair behind Theorem T: u solves -div a grad u = div g on a
/// zero-Dirichlet box with the quenched medium, v solves the homogenized
/// problem with the pushed-forward density g~_k = sum_j g_j (d_jk + D_j
/// phi_k).
struct TwoScaleSolution {
  BoxDomain box;
  BoxField u;
  BoxField v;
  BoxVectorField g;
  double g_norm = 0.0;      // (sum |g|^2)^{1/2}
  double g_radius = 0.0;    // support radius of g around the box center
  SolveReport report_u;
  SolveReport report_v;
};

/// Random dipole density supported on B_{g_radius}(0), component values
/// uniform in [-scale, scale] keyed on the physical offset so the field does
/// not depend on the box side.
BoxVectorField random_source(const BoxDomain& box, double g_radius,
                             std::uint64_t seed, double scale = 1.0);

TwoScaleSolution solve_two_scale(const CoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const BoxDomain& box, double g_radius,
                                 std::uint64_t seed, double g_scale = 1.0,
                                 const SolveOptions& opts = {}, int threads = 1);

/// Homogenization error field e_k = D_k u - sum_i D_i v (d_ik + D_k phi_i).
BoxVectorField error_field(const TwoScaleSolution& ts, const CorrectorSet& correctors);

/// Gradient of the two-scale remainder w = u - v - phi_i D_i v.
BoxVectorField two_scale_error_field(const BoxField& u, const BoxField& v,
                                     const CorrectorSet& correctors);

struct DecayReport {
  std::vector<double> abscissae;    // |x0| per entry
  std::vector<double> error_norms;  // normalized by g_norm when applicable
  std::vector<double> error_raw;
  std::vector<double> envelope;     // C ln(t) / t^{d+alpha}, t = |x0|/r_star
  std::vector<double> slope_running;
  std::vector<double> w_norms;      // theorem T only: grad w on the same balls

  double slope = 0.0;
  double slope_residual = 0.0;
  bool slope_defined = false;
  double prefactor = 0.0;

  double alpha = 0.0;
  double r_star = 0.0;
  int box_side = 0;
  std::uint64_t seed = 0;
  double g_norm = 0.0;

  double green_symmetry_rel = -1.0;  // corollary C only

  long total_iterations = 0;
  bool all_converged = true;
};

/// Theorem T: error norm (sum_{B_{r_star}(x0)} |e|^2)^{1/2} / g_norm per
/// offset x0, with the fitted log-log slope and the predicted envelope.
/// box_side = 0 picks 8 * max|x0|.
DecayReport theorem_T_experiment(const CoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const GrowthCert& growth,
                                 std::span<const Site> x0_list,
                                 std::uint64_t seed, int box_side = 0,
                                 double g_scale = 1.0,
                                 const SolveOptions& opts = {}, int threads = 1);

struct InvariantsReport {
  std::vector<double> radii;
  std::vector<double> i0;        // sum grad eta . a grad u
  std::vector<double> i0h;       // sum grad eta . a_h grad v
  std::vector<double> i0_scale;  // ||a grad u|| ||grad eta|| per radius
  std::vector<std::array<double, 3>> lhs;  // linear invariant, u side
  std::vector<std::array<double, 3>> rhs;  // linear invariant, v side
  std::vector<std::array<double, 3>> mismatch_rel;
  std::array<double, 3> r_indep_rel{};  // lhs drift between first and last radius
};

/// Constant and linear invariants through cutoff shells B_r/B_2r around the
/// box center; every listed r must satisfy g_radius <= r and 2r <= side/2 - 2.
InvariantsReport invariants_check(const CoefficientField& a,
                                  const CorrectorSet& correctors,
                                  const TwoScaleSolution& ts,
                                  std::span<const double> r_list);

/// Corollary C: dipole sources at every y in B_{r_star/2}(0) and direction l,
/// solved with the quenched and the homogenized medium; the report carries
/// the ball-averaged norm of the corrected mixed-derivative difference per
/// x0 and a quenched Green symmetry probe between x0_list[0] and 0.
DecayReport corollary_C_experiment(const CoefficientField& a,
                                   const CorrectorSet& correctors,
                                   const GrowthCert& growth,
                                   std::span<const Site> x0_list,
                                   int box_side = 0,
                                   const SolveOptions& opts = {}, int threads = 1);

/// |G(x,y) - G(y,x)| / max(|G(x,y)|, |G(y,x)|) from two monopole box solves.
double green_symmetry_check(const CoefficientField& a, const BoxDomain& box,
                            const Site& x, const Site& y,
                            const SolveOptions& opts = {});

/// Closed-form continuum homogenized Green's function (d=2 up to an additive
/// constant) and its central-difference Hessian; diagnostic cross-check only.
double continuum_green(const HomMatrix& ah, const std::array<double, 3>& x);
std::array<double, 9> continuum_green_hessian(const HomMatrix& ah,
                                              const std::array<double, 3>& x);

struct LemmaLReport {
  int R = 0;
  int N = 0;
  int M = 0;
  double lhs = 0.0;  // tr(C K_half): mean energy on B_{R/2}
  double rhs = 0.0;  // lambda_max(K^{1/2} C K^{1/2}): sup over span functionals
  double ratio = 0.0;
  bool regularized = false;  // near-null dictionary directions dropped
  int dropped = 0;
  std::vector<double> K;       // row-major M x M gradient Gram on B_R
  std::vector<double> K_half;  // row-major M x M gradient Gram on B_{R/2}
  long total_iterations = 0;
  bool all_converged = true;
};

/// Dictionary of M a-harmonic functions on the 2R box (random boundary
/// data); the ensemble averages uniformly over the first N of them.
LemmaLReport lemma_L_check(const CoefficientField& a, int R, int N, int M,
                           std::uint64_t seed, const SolveOptions& opts = {},
                           int threads = 1);

}  // namespace homog
