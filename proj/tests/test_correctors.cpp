#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homog/correctors.hpp"

using namespace homog;

namespace {

EnsembleSpec layered_spec() {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::Layered;
  spec.lambda = 0.25;
  spec.value_lo = 0.25;
  spec.value_hi = 1.0;
  spec.period = 2;
  return spec;
}

EnsembleSpec checkerboard_spec() {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::Checkerboard;
  spec.lambda = 0.25;
  spec.value_lo = 0.25;
  spec.value_hi = 1.0;
  spec.prob_hi = 0.5;
  return spec;
}

SolveOptions tight() {
  SolveOptions opts;
  opts.tol = 1e-12;
  return opts;
}

}  // namespace

TEST_CASE("constant medium: phi = 0, sigma = 0, ah = a") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {0.5, 0.75, 1.0}, 0.25);
  const CorrectorSet cs = build_corrector_set(a, tight());
  for (const ScalarField& p : cs.phi)
    for (double v : p.v) CHECK(std::abs(v) <= 1e-8);
  for (const SkewTensorField& s : cs.sigma)
    for (double v : s.v) CHECK(std::abs(v) <= 1e-8);
  CHECK(cs.ah.at(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cs.ah.at(1, 1) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(std::abs(cs.ah.at(0, 1)) <= 1e-10);
}

TEST_CASE("layered oracle: harmonic and arithmetic means, exact flux structure") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(layered_spec(), SeedSpec{7}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());

  CHECK(std::abs(cs.ah.at(0, 0) - 0.4) <= 1e-8);    // 2*0.25/(1+0.25)
  CHECK(std::abs(cs.ah.at(1, 1) - 0.625) <= 1e-8);  // (1+0.25)/2
  CHECK(std::abs(cs.ah.at(0, 1)) <= 1e-10);
  CHECK(std::abs(cs.ah.at(1, 0)) <= 1e-10);

  // phi_0 depends only on x0 and the corrected flux a(1 + D0 phi_0) is the
  // constant harmonic mean (uniform series current)
  const VectorField dphi = grad(cs.phi[0]);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    const Site x = g.coords(s);
    const std::int64_t ref = g.index(Site{x[0], 0, 0});
    CHECK(cs.phi[0].v[std::size_t(s)] ==
          doctest::Approx(cs.phi[0].v[std::size_t(ref)]).epsilon(1e-9));
    CHECK(a.at(s, 0) * (1.0 + dphi.at(s, 0)) == doctest::Approx(0.4).epsilon(1e-9));
  }
  // direction-0 component of q_0 vanishes identically
  for (std::int64_t s = 0; s < g.sites(); ++s)
    CHECK(std::abs(cs.q[0].at(s, 0)) <= 1e-9);
}

TEST_CASE("shift equivariance of the corrector") {
  TorusGrid g(2, 16);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{3}, g);
  const Site z{5, 2, 0};
  CoefficientField az(g, a.lambda);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    Site x = g.coords(s);
    for (int k = 0; k < 2; ++k) x[k] += z[k];
    for (int j = 0; j < 2; ++j) az.at(s, j) = a.at(g.index(x), j);
  }
  const ScalarField phi = corrector_phi(a, 0, tight());
  const ScalarField phiz = corrector_phi(az, 0, tight());
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    Site x = g.coords(s);
    for (int k = 0; k < 2; ++k) x[k] += z[k];
    CHECK(phiz.v[std::size_t(s)] ==
          doctest::Approx(phi.v[std::size_t(g.index(x))]).epsilon(1e-8));
  }
}

TEST_CASE("corrector certificate on checkerboard d=2 L=64") {
  TorusGrid g(2, 64);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{1}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  CHECK(cs.cert.all_converged);
  for (int i = 0; i < 2; ++i) {
    CHECK(cs.cert.phi_residual_rel[i] <= 1e-10);
    CHECK(cs.cert.q_mean_abs[i] <= 1e-12);
    CHECK(cs.cert.q_div_rel[i] <= 1e-10);
    CHECK(cs.cert.sigma_identity_rel[i] <= 1e-6);
  }
  CHECK(cs.cert.ah_asymmetry <= 1e-10);
  // (i4) eigenvalue bounds and the Voigt-Reuss sandwich for the diagonal
  CHECK(cs.cert.eig_min >= 0.25 - 1e-10);
  CHECK(cs.cert.eig_max <= 1.0 + 1e-10);
  for (int j = 0; j < 2; ++j) {
    double harm = 0, arith = 0;
    for (std::int64_t s = 0; s < g.sites(); ++s) {
      harm += 1.0 / a.at(s, j);
      arith += a.at(s, j);
    }
    harm = double(g.sites()) / harm;
    arith /= double(g.sites());
    CHECK(cs.ah.at(j, j) >= harm - 1e-9);
    CHECK(cs.ah.at(j, j) <= arith + 1e-9);
  }
  // mean-zero phi and sigma
  for (const ScalarField& p : cs.phi) {
    double m = 0;
    for (double v : p.v) m += v;
    CHECK(std::abs(m / double(g.sites())) <= 1e-12);
  }
  for (const SkewTensorField& s : cs.sigma) {
    double m = 0;
    for (double v : s.v) m += v;
    CHECK(std::abs(m / double(s.v.size())) <= 1e-12);
  }
}

TEST_CASE("2D stream function identity for sigma") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{9}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  for (int i = 0; i < 2; ++i) {
    const SkewTensorField& s = cs.sigma[i];
    const VectorField& q = cs.q[i];
    double num = 0, den = 0;
    for (std::int64_t x = 0; x < g.sites(); ++x) {
      Site c0 = g.coords(x), c1 = g.coords(x);
      c0[0] -= 1;
      c1[1] -= 1;
      // (div sigma)_0 = D-_1 sigma_01 = q_0, (div sigma)_1 = -D-_0 sigma_01 = q_1
      const double d1 = s.entry(x, 0, 1) - s.entry(g.index(c1), 0, 1);
      const double d0 = s.entry(x, 1, 0) - s.entry(g.index(c0), 1, 0);
      num += (d1 - q.at(x, 0)) * (d1 - q.at(x, 0));
      num += (d0 - q.at(x, 1)) * (d0 - q.at(x, 1));
      den += q.at(x, 0) * q.at(x, 0) + q.at(x, 1) * q.at(x, 1);
    }
    CHECK(std::sqrt(num) <= 1e-6 * std::sqrt(den) + 1e-12);
  }
}

TEST_CASE("sigma of a zero flux is zero") {
  TorusGrid g(2, 16);
  VectorField q(g);
  const SkewTensorField s = flux_corrector_sigma(q, tight());
  for (double v : s.v) CHECK(v == 0.0);
}

TEST_CASE("sigma rejects non-divergence-free input") {
  TorusGrid g(2, 16);
  VectorField q(g);
  q.at(g.index(Site{4, 4, 0}), 0) = 1.0;  // isolated edge flux: div != 0
  CHECK_THROWS_AS(flux_corrector_sigma(q, tight()), Error);
  try {
    flux_corrector_sigma(q, tight());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionDiv);
  }
}

TEST_CASE("d=3 corrector set certifies") {
  TorusGrid g(3, 8);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{4}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  CHECK(cs.cert.all_converged);
  for (int i = 0; i < 3; ++i) {
    CHECK(cs.cert.phi_residual_rel[i] <= 1e-10);
    CHECK(cs.cert.sigma_identity_rel[i] <= 1e-6);
  }
  CHECK(cs.cert.eig_min >= 0.25 - 1e-10);
  CHECK(cs.cert.eig_max <= 1.0 + 1e-10);
  // direct check of the divergence identity in 3D
  for (int i = 0; i < 3; ++i) {
    const VectorField ds = skew_divergence(cs.sigma[i]);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < ds.v.size(); ++k) {
      num += (ds.v[k] - cs.q[i].v[k]) * (ds.v[k] - cs.q[i].v[k]);
      den += cs.q[i].v[k] * cs.q[i].v[k];
    }
    CHECK(std::sqrt(num) <= 1e-6 * std::sqrt(den) + 1e-12);
  }
}

TEST_CASE("two seeds: different phi, comparable ah") {
  TorusGrid g(2, 32);
  const CoefficientField a1 = sample(checkerboard_spec(), SeedSpec{21}, g);
  const CoefficientField a2 = sample(checkerboard_spec(), SeedSpec{22}, g);
  const CorrectorSet c1 = build_corrector_set(a1, tight());
  const CorrectorSet c2 = build_corrector_set(a2, tight());
  CHECK(c1.phi[0].v != c2.phi[0].v);
  // sampling fluctuation at L=32 stays well inside the ellipticity interval
  CHECK(std::abs(c1.ah.at(0, 0) - c2.ah.at(0, 0)) < 0.2);
}
