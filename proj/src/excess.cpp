#include "homog/excess.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "homog/fit.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

// Ball of physical offsets around `center` whose sites (and forward
// neighbors) lie strictly inside the box.
std::vector<std::int64_t> interior_ball(const BoxDomain& box, const Site& center,
                                        double r) {
  std::vector<std::int64_t> out;
  const int m = int(std::floor(r));
  const double r2 = r * r;
  const int m2 = box.dim == 3 ? m : 0;
  for (int d2 = -m2; d2 <= m2; ++d2)
    for (int d1 = -m; d1 <= m; ++d1)
      for (int d0 = -m; d0 <= m; ++d0) {
        if (double(d0) * d0 + double(d1) * d1 + double(d2) * d2 > r2) continue;
        const Site p{center[0] + d0, center[1] + d1, center[2] + d2};
        const Site y = box.local(p);
        if (!box.interior(y))
          throw Error(ErrorCode::BallOutsideDomain, "ball leaves the box interior");
        out.push_back(box.index(y));
      }
  if (out.empty()) throw Error(ErrorCode::EmptyBall, "ball has no member sites");
  return out;
}

// Corrected gradient basis e_i + grad phi_i sampled on the box.
std::vector<std::vector<double>> corrected_basis(const BoxDomain& box,
                                                 const TorusGrid& grid,
                                                 const std::vector<VectorField>& dphi) {
  const int d = box.dim;
  const std::int64_t n = box.sites();
  std::vector<std::vector<double>> basis(d, std::vector<double>(std::size_t(n) * d));
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int64_t t = grid.index(box.torus_site(grid, box.coords(s)));
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        basis[i][s * d + k] = (i == k ? 1.0 : 0.0) + dphi[i].at(t, k);
  }
  return basis;
}

std::vector<double> box_gradient(const BoxDomain& box, const std::vector<double>& u) {
  const int d = box.dim;
  const int n = box.side;
  const std::int64_t total = box.sites();
  const std::int64_t s[3] = {1, n, std::int64_t(n) * n};
  std::vector<double> g(std::size_t(total) * d, 0.0);
  for (std::int64_t i = 0; i < total; ++i) {
    const Site y = box.coords(i);
    for (int j = 0; j < d; ++j)
      if (y[j] + 1 < n) g[i * d + j] = u[std::size_t(i + s[j])] - u[std::size_t(i)];
  }
  return g;
}

struct ExcessCore {
  BoxDomain box;
  std::vector<double> grad_u;
  std::vector<std::vector<double>> basis;
  int d = 2;

  ExcessValue at(std::span<const std::int64_t> sites) const {
    ExcessValue out;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    double uu = 0;
    for (std::int64_t s : sites) {
      for (int i = 0; i < d; ++i) {
        double bi = 0;
        for (int k = 0; k < d; ++k) bi += grad_u[s * d + k] * basis[i][s * d + k];
        b(i) += bi;
        for (int j = i; j < d; ++j) {
          double gij = 0;
          for (int k = 0; k < d; ++k) gij += basis[i][s * d + k] * basis[j][s * d + k];
          gram(i, j) += gij;
        }
      }
      for (int k = 0; k < d; ++k) uu += grad_u[s * d + k] * grad_u[s * d + k];
    }
    const double vol = double(sites.size());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j) gram(i, j) = gram(j, i);
    gram /= vol;
    b /= vol;
    uu /= vol;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd ev = es.eigenvalues();
    out.gram_eig_min = ev(0);
    out.gram_eig_max = ev(d - 1);
    const double cut = 1e-12 * std::max(ev(d - 1), 1.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
      if (ev(i) > cut)
        inv(i) = 1.0 / ev(i);
      else
        out.gram_singular = true;
    }
    const Eigen::VectorXd xi =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * b;
    for (int i = 0; i < d; ++i) out.xi[i] = xi(i);
    const double val = uu - 2.0 * xi.dot(b) + xi.dot(gram * xi);
    out.value = val > 0 ? val : 0.0;
    return out;
  }

  double fixed_slope_value(std::span<const std::int64_t> sites,
                           const std::array<double, 3>& xi) const {
    double acc = 0;
    for (std::int64_t s : sites)
      for (int k = 0; k < d; ++k) {
        double r = grad_u[s * d + k];
        for (int i = 0; i < d; ++i) r -= xi[i] * basis[i][s * d + k];
        acc += r * r;
      }
    return acc / double(sites.size());
  }
};

ExcessCore make_core(const HarmonicSample& u, const CorrectorSet& correctors) {
  ExcessCore core;
  core.box = u.box;
  core.d = u.box.dim;
  core.grad_u = box_gradient(u.box, u.values);
  std::vector<VectorField> dphi;
  for (const ScalarField& p : correctors.phi) dphi.push_back(grad(p));
  core.basis = corrected_basis(u.box, correctors.phi.front().grid, dphi);
  return core;
}

}  // namespace

double BoundarySpec::value(const BoxDomain& box, std::int64_t site) const {
  const Site y = box.coords(site);
  double p[3] = {0, 0, 0};
  for (int k = 0; k < box.dim; ++k) p[k] = double(y[k] - box.side / 2);
  double v = 0;
  for (int k = 0; k < box.dim; ++k) v += xi[k] * p[k];
  if (kind == Kind::Polynomial)
    for (int j = 0; j < box.dim; ++j)
      for (int k = 0; k < box.dim; ++k) v += quad[j * 3 + k] * p[j] * p[k];
  if (kind == Kind::Random || noise_amp != 0.0)
    v += noise_amp * (2.0 * unit_uniform(seed, std::uint64_t(site), 0x0b0d) - 1.0);
  return v;
}

BoundarySpec BoundarySpec::random_polynomial(std::uint64_t seed, const HomMatrix& ah,
                                             double quad_scale, double noise_amp) {
  BoundarySpec spec;
  spec.kind = Kind::Polynomial;
  spec.seed = seed;
  spec.noise_amp = noise_amp;
  const int d = ah.dim;
  for (int k = 0; k < d; ++k)
    spec.xi[k] = 2.0 * unit_uniform(seed, 0x11, std::uint64_t(k)) - 1.0;
  double q[9] = {};
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      const double v = 2.0 * unit_uniform(seed, 0x22, std::uint64_t(j * 3 + k)) - 1.0;
      q[j * 3 + k] = v;
      q[k * 3 + j] = v;
    }
  // project onto trace(Q ah) = 0 so the quadratic is ah-harmonic
  double qa = 0, aa = 0;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      qa += q[j * 3 + k] * ah.at(j, k);
      aa += ah.at(j, k) * ah.at(j, k);
    }
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      spec.quad[j * 3 + k] = quad_scale * (q[j * 3 + k] - qa / aa * ah.at(j, k));
  return spec;
}

HarmonicSample harmonic_sample(const CoefficientField& a, const BoxDomain& box,
                               const BoundarySpec& spec, const SolveOptions& opts) {
  BoxField boundary(box);
  const std::int64_t n = box.sites();
  for (std::int64_t i = 0; i < n; ++i)
    if (!box.interior(box.coords(i))) boundary.v[std::size_t(i)] = spec.value(box, i);
  auto [u, rep] = solve_box(a, box, nullptr, nullptr, &boundary, opts);
  HarmonicSample sample;
  sample.box = box;
  sample.values = std::move(u.v);
  sample.report = rep;
  sample.residual_rel = rep.rel_residual;
  return sample;
}

ExcessValue intrinsic_excess(const HarmonicSample& u, const CorrectorSet& correctors,
                             const Site& center, double r) {
  const ExcessCore core = make_core(u, correctors);
  const auto sites = interior_ball(u.box, center, r);
  return core.at(sites);
}

ExcessExperimentReport excess_decay_experiment(const CoefficientField& a,
                                               const CorrectorSet& correctors,
                                               int R, std::span<const double> radii,
                                               int n_samples, std::uint64_t seed,
                                               bool growth_certified,
                                               const SolveOptions& opts) {
  if (!growth_certified)
    throw Error(ErrorCode::PreconditionGrowth,
                "excess decay requires a certified growth report at the center");
  BoxDomain box;
  box.dim = a.grid.dim;
  box.side = 2 * R + 4;  // margin so B_R stays interior
  box.center = Site{0, 0, 0};

  ExcessExperimentReport report;
  std::vector<double> slopes_opt, slopes_fixed;
  for (int sample_id = 0; sample_id < n_samples; ++sample_id) {
    SampleExcess se;
    try {
      const BoundarySpec spec = BoundarySpec::random_polynomial(
          hash_combine(seed, std::uint64_t(sample_id)), correctors.ah, 1.0 / R, 0.1);
      const HarmonicSample u = harmonic_sample(a, box, spec, opts);
      const ExcessCore core = make_core(u, correctors);

      se.gram_eig_min = 1e300;
      std::vector<std::vector<std::int64_t>> balls;
      for (double r : radii) balls.push_back(interior_ball(box, Site{0, 0, 0}, r));
      for (std::size_t ri = 0; ri < balls.size(); ++ri) {
        const ExcessValue ev = core.at(balls[ri]);
        se.radii.push_back(radii[ri]);
        se.excess_sqrt.push_back(std::sqrt(ev.value));
        se.xi.push_back(ev.xi);
        se.gram_eig_min = std::min(se.gram_eig_min, ev.gram_eig_min);
        se.gram_eig_max = std::max(se.gram_eig_max, ev.gram_eig_max);
      }
      const std::array<double, 3> xi0 = se.xi.front();
      for (std::size_t ri = 0; ri < balls.size(); ++ri)
        se.excess_sqrt_fixed.push_back(std::sqrt(core.fixed_slope_value(balls[ri], xi0)));

      const LineFit opt_fit = fit_loglog(se.radii, se.excess_sqrt);
      const LineFit fix_fit = fit_loglog(se.radii, se.excess_sqrt_fixed);
      // decay slope: excess^{1/2} ~ r^s; report s (positive for decay in r/R)
      se.slope_opt = opt_fit.slope;
      se.slope_fixed = fix_fit.slope;
      se.slope_residual = opt_fit.residual_rms;

      double rms_big = 0;
      const auto& big = balls.back();
      for (std::int64_t s : big)
        for (int k = 0; k < box.dim; ++k)
          rms_big += core.grad_u[s * box.dim + k] * core.grad_u[s * box.dim + k];
      rms_big = std::sqrt(rms_big / double(big.size()));
      double xi_max = 0, xi_dev = 0;
      const std::array<double, 3> xiR = se.xi.back();
      for (std::size_t ri = 0; ri < se.xi.size(); ++ri) {
        double nrm = 0, dev = 0;
        for (int k = 0; k < box.dim; ++k) {
          nrm += se.xi[ri][k] * se.xi[ri][k];
          const double dd = se.xi[ri][k] - xiR[k];
          dev += dd * dd;
        }
        xi_max = std::max(xi_max, std::sqrt(nrm));
        xi_dev = std::max(xi_dev, std::sqrt(dev));
      }
      se.slope_bound_const = rms_big > 0 ? xi_max / rms_big : 0.0;
      const double exR = se.excess_sqrt.back();
      se.xi_stability_const = exR > 0 ? xi_dev / exR : 0.0;
      se.ok = true;
    } catch (const Error& err) {
      se.ok = false;
      se.error = err.what();
    }
    if (se.ok) {
      slopes_opt.push_back(se.slope_opt);
      slopes_fixed.push_back(se.slope_fixed);
      report.max_slope_bound_const =
          std::max(report.max_slope_bound_const, se.slope_bound_const);
      ++report.n_ok;
    }
    report.samples.push_back(std::move(se));
  }
  report.median_slope_opt = median(slopes_opt);
  report.median_slope_fixed = median(slopes_fixed);
  return report;
}

}  // namespace homog
