#pragma once

#include <vector>

#include "homog/coefficients.hpp"
#include "homog/solver.hpp"

namespace homog {

struct CorrectorCertificate {
  std::array<double, 3> phi_residual_rel{};    // (i2) residual per direction
  std::array<double, 3> q_mean_abs{};          // |site mean of q_i|
  std::array<double, 3> q_div_rel{};           // ||div q_i|| / ||q_i||
  std::array<double, 3> sigma_identity_rel{};  // ||div sigma_i - q_i|| / ||q_i||
  double ah_asymmetry = 0.0;                   // max |ah - ah^T| entry
  double eig_min = 0.0;
  double eig_max = 0.0;
  long total_iterations = 0;
  bool all_converged = true;
};

/// Corrector pair and derived quantities for one medium realization.
struct CorrectorSet {
  std::vector<ScalarField> phi;        // d fields, each mean zero
  std::vector<SkewTensorField> sigma;  // d skew fields, components mean zero
  std::vector<VectorField> q;          // d centered fluxes
  HomMatrix ah;
  double lambda = 0.0;
  CorrectorCertificate cert;
};

/// Mean-zero phi_i with -div a(e_i + grad phi_i) = 0 to the solver tolerance.
ScalarField corrector_phi(const CoefficientField& a, int i,
                          const SolveOptions& opts = {},
                          SolveReport* report = nullptr);

/// Column i is the site average of a(e_i + grad phi_i).
HomMatrix homogenized_matrix(const CoefficientField& a,
                             const std::vector<ScalarField>& phi);

/// Centered flux q_i = a (e_i + grad phi_i) - ah e_i.
VectorField flux_q(const CoefficientField& a, const ScalarField& phi_i, int i,
                   const HomMatrix& ah);

/// Poisson-gauge flux corrector: each pair component (j,k) solves
///   lap sigma_{jk} = D+_k q_j - D+_j q_k
/// on the torus with mean zero, which makes the backward-difference
/// divergence sum_k D-_k sigma_{jk} = q_j hold up to the solver residual.
SkewTensorField flux_corrector_sigma(const VectorField& q_i,
                                     const SolveOptions& opts = {},
                                     double div_precheck_rel = 1e-6,
                                     SolveReport* report = nullptr);

/// Divergence (sum_k D-_k sigma_{jk})_j of a skew tensor field.
VectorField skew_divergence(const SkewTensorField& sigma);

CorrectorSet build_corrector_set(const CoefficientField& a,
                                 const SolveOptions& opts = {});

/// Eigenvalue range of the symmetrized d x d matrix.
std::pair<double, double> symmetric_eig_range(const HomMatrix& m);

}  // namespace homog
