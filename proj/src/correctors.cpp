#include "homog/correctors.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace homog {

namespace {

VectorField medium_column(const CoefficientField& a, int i) {
  VectorField g(a.grid);
  const std::int64_t n = a.grid.sites();
  for (std::int64_t s = 0; s < n; ++s) g.at(s, i) = a.at(s, i);
  return g;
}

// Forward difference of a per-site scalar along direction j.
ScalarField forward_diff(const ScalarField& u, int j) {
  const TorusGrid& g = u.grid;
  ScalarField out(g);
  const std::int64_t n = g.sites();
  for (std::int64_t s = 0; s < n; ++s) {
    Site x = g.coords(s);
    x[j] += 1;
    out.v[std::size_t(s)] = u.v[std::size_t(g.index(x))] - u.v[std::size_t(s)];
  }
  return out;
}

}  // namespace

ScalarField corrector_phi(const CoefficientField& a, int i, const SolveOptions& opts,
                          SolveReport* report) {
  if (i < 0 || i >= a.grid.dim)
    throw Error(ErrorCode::ValidationError, "corrector direction out of range");
  const VectorField g = medium_column(a, i);
  ScalarField zero(a.grid);
  auto [phi, rep] = solve_torus(a, g, zero, opts);
  if (report) *report = rep;
  return phi;
}

HomMatrix homogenized_matrix(const CoefficientField& a,
                             const std::vector<ScalarField>& phi) {
  const TorusGrid& g = a.grid;
  const int d = g.dim;
  const std::int64_t n = g.sites();
  HomMatrix ah;
  ah.dim = d;
  for (int i = 0; i < d; ++i) {
    const VectorField dphi = grad(phi[i]);
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (std::int64_t x = 0; x < n; ++x)
        s += a.at(x, j) * ((i == j ? 1.0 : 0.0) + dphi.at(x, j));
      ah.at(j, i) = s / double(n);
    }
  }
  return ah;
}

VectorField flux_q(const CoefficientField& a, const ScalarField& phi_i, int i,
                   const HomMatrix& ah) {
  const TorusGrid& g = a.grid;
  const int d = g.dim;
  const std::int64_t n = g.sites();
  const VectorField dphi = grad(phi_i);
  VectorField q(g);
  for (std::int64_t x = 0; x < n; ++x)
    for (int j = 0; j < d; ++j)
      q.at(x, j) = a.at(x, j) * ((i == j ? 1.0 : 0.0) + dphi.at(x, j)) - ah.at(j, i);
  return q;
}

VectorField skew_divergence(const SkewTensorField& sigma) {
  const TorusGrid& g = sigma.grid;
  const int d = g.dim;
  const std::int64_t n = g.sites();
  VectorField out(g);
  for (std::int64_t s = 0; s < n; ++s) {
    const Site x = g.coords(s);
    for (int j = 0; j < d; ++j) {
      double acc = 0;
      for (int k = 0; k < d; ++k) {
        if (k == j) continue;
        Site xm = x;
        xm[k] -= 1;
        acc += sigma.entry(s, j, k) - sigma.entry(g.index(xm), j, k);
      }
      out.at(s, j) = acc;
    }
  }
  return out;
}

SkewTensorField flux_corrector_sigma(const VectorField& q_i, const SolveOptions& opts,
                                     double div_precheck_rel, SolveReport* report) {
  const TorusGrid& g = q_i.grid;
  const int d = g.dim;
  const std::int64_t n = g.sites();

  // scale floored so an identically-zero flux (layered media) passes
  const double qnorm = norm2(q_i.v);
  const double scale = std::max(qnorm, 1e-6 * std::sqrt(double(n)));
  const ScalarField divq = div(q_i);
  if (norm2(divq.v) > div_precheck_rel * scale)
    throw Error(ErrorCode::PreconditionDiv, "input flux is not divergence-free");
  for (int j = 0; j < d; ++j) {
    double m = 0;
    for (std::int64_t s = 0; s < n; ++s) m += q_i.at(s, j);
    if (std::abs(m / double(n)) > div_precheck_rel * scale / std::sqrt(double(n)))
      throw Error(ErrorCode::PreconditionDiv, "input flux has nonzero mean");
  }

  CoefficientField unit(g, 1.0);
  SkewTensorField sigma(g);
  VectorField zero_g(g);
  SolveReport total;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      ScalarField qj(g), qk(g);
      for (std::int64_t s = 0; s < n; ++s) {
        qj.v[std::size_t(s)] = q_i.at(s, j);
        qk.v[std::size_t(s)] = q_i.at(s, k);
      }
      // lap sigma_{jk} = D+_k q_j - D+_j q_k, i.e. -lap sigma = -(rhs)
      const ScalarField dk_qj = forward_diff(qj, k);
      const ScalarField dj_qk = forward_diff(qk, j);
      ScalarField f(g);
      for (std::size_t s = 0; s < f.v.size(); ++s)
        f.v[s] = -(dk_qj.v[s] - dj_qk.v[s]);
      auto [comp, rep] = solve_torus(unit, zero_g, f, opts);
      total.iterations += rep.iterations;
      total.converged = total.converged && rep.converged;
      total.rel_residual = std::max(total.rel_residual, rep.rel_residual);
      const int p = SkewTensorField::pair_index(d, j, k);
      for (std::int64_t s = 0; s < n; ++s) sigma.at(s, p) = comp.v[std::size_t(s)];
    }
  if (report) *report = total;
  return sigma;
}

std::pair<double, double> symmetric_eig_range(const HomMatrix& m) {
  const int d = m.dim;
  Eigen::MatrixXd s(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) s(j, k) = 0.5 * (m.at(j, k) + m.at(k, j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(d - 1)};
}

CorrectorSet build_corrector_set(const CoefficientField& a, const SolveOptions& opts) {
  const TorusGrid& g = a.grid;
  const int d = g.dim;
  const std::int64_t n = g.sites();
  CorrectorSet set;
  set.lambda = a.lambda;
  set.phi.reserve(d);

  for (int i = 0; i < d; ++i) {
    SolveReport rep;
    set.phi.push_back(corrector_phi(a, i, opts, &rep));
    set.cert.total_iterations += rep.iterations;
    set.cert.all_converged = set.cert.all_converged && rep.converged;
    // (i2) residual: ||div a(e_i + grad phi_i)|| / ||div(a e_i)||
    const ScalarField lhs = apply_operator(a, set.phi[i]);
    const ScalarField rhs = div(medium_column(a, i));
    double num = 0;
    for (std::size_t s = 0; s < lhs.v.size(); ++s) {
      const double r = lhs.v[s] - rhs.v[s];
      num += r * r;
    }
    const double den = norm2(rhs.v);
    set.cert.phi_residual_rel[i] = den > 0 ? std::sqrt(num) / den : std::sqrt(num);
  }

  set.ah = homogenized_matrix(a, set.phi);
  double asym = 0;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      asym = std::max(asym, std::abs(set.ah.at(j, k) - set.ah.at(k, j)));
  set.cert.ah_asymmetry = asym;
  std::tie(set.cert.eig_min, set.cert.eig_max) = symmetric_eig_range(set.ah);

  for (int i = 0; i < d; ++i) {
    set.q.push_back(flux_q(a, set.phi[i], i, set.ah));
    const VectorField& qi = set.q.back();
    // floored so a direction with identically-zero flux certifies trivially
    const double qn = std::max(norm2(qi.v), 1e-6 * std::sqrt(double(n * d)));
    set.cert.q_div_rel[i] = norm2(div(qi).v) / qn;
    double mmax = 0;
    for (int j = 0; j < d; ++j) {
      double m = 0;
      for (std::int64_t s = 0; s < n; ++s) m += qi.at(s, j);
      mmax = std::max(mmax, std::abs(m / double(n)));
    }
    set.cert.q_mean_abs[i] = mmax;

    SolveReport rep;
    set.sigma.push_back(flux_corrector_sigma(qi, opts, 1e-6, &rep));
    set.cert.total_iterations += rep.iterations;
    set.cert.all_converged = set.cert.all_converged && rep.converged;
    const VectorField ds = skew_divergence(set.sigma.back());
    double num = 0;
    for (std::size_t s = 0; s < ds.v.size(); ++s) {
      const double r = ds.v[s] - qi.v[s];
      num += r * r;
    }
    set.cert.sigma_identity_rel[i] = std::sqrt(num) / qn;
  }
  return set;
}

}  // namespace homog
