#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homog/excess.hpp"
#include "homog/experiments.hpp"

using namespace homog;

namespace {

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

GrowthCert trivial_cert() {
  GrowthCert cert;
  cert.r_star = 2.0;
  cert.alpha = 0.5;
  cert.certified = true;
  return cert;
}

}  // namespace

TEST_CASE("combine_certs takes worst r_star and alpha and the conjunction") {
  GrowthReport a, b;
  a.r_star = 2;
  a.alpha_fit = 0.8;
  a.alpha_defined = true;
  a.certified = true;
  b.r_star = 8;
  b.alpha_fit = 0.6;
  b.alpha_defined = true;
  b.certified = true;
  std::vector<GrowthReport> reps{a, b};
  const GrowthCert c = combine_certs(reps);
  CHECK(c.r_star == 8.0);
  CHECK(c.alpha == 0.6);
  CHECK(c.certified);
  reps[1].certified = false;
  CHECK_FALSE(combine_certs(reps).certified);
}

TEST_CASE("random source sits on the stated support and survives box resizing") {
  BoxDomain small;
  small.dim = 2;
  small.side = 32;
  BoxDomain big = small;
  big.side = 48;
  const BoxVectorField gs = random_source(small, 3.0, 17);
  const BoxVectorField gb = random_source(big, 3.0, 17);
  double norm_s = 0;
  for (std::int64_t s = 0; s < small.sites(); ++s) {
    const Site y = small.coords(s);
    const double p0 = y[0] - 16, p1 = y[1] - 16;
    const bool inside = p0 * p0 + p1 * p1 <= 9.0;
    for (int j = 0; j < 2; ++j) {
      if (!inside) CHECK(gs.at(s, j) == 0.0);
      norm_s += gs.at(s, j) * gs.at(s, j);
      // same physical offset in the bigger box carries the same value
      const Site yb{y[0] + 8, y[1] + 8, 0};
      CHECK(gb.at(big.index(yb), j) == gs.at(s, j));
    }
  }
  CHECK(norm_s > 0.0);
  // scale 2 doubles every component exactly
  const BoxVectorField g2 = random_source(small, 3.0, 17, 2.0);
  for (std::size_t i = 0; i < gs.v.size(); ++i) CHECK(g2.v[i] == 2.0 * gs.v[i]);
}

TEST_CASE("constant medium: two-scale error and remainder gradient vanish") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {0.5, 0.5, 0.5}, 0.25);
  const CorrectorSet cs = build_corrector_set(a, tight());
  const std::vector<Site> x0{Site{10, 0, 0}, Site{16, 0, 0}};
  const DecayReport rep =
      theorem_T_experiment(a, cs, trivial_cert(), x0, 7, 0, 1.0, tight());
  CHECK(rep.all_converged);
  for (double e : rep.error_norms) CHECK(e <= 1e-8);
  for (double w : rep.w_norms) CHECK(w <= 1e-8);
}

TEST_CASE("theorem T output is homogeneous of degree one in the source") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{2}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  const std::vector<Site> x0{Site{10, 0, 0}, Site{14, 0, 0}};
  const DecayReport r1 =
      theorem_T_experiment(a, cs, trivial_cert(), x0, 5, 0, 1.0, tight());
  const DecayReport r2 =
      theorem_T_experiment(a, cs, trivial_cert(), x0, 5, 0, 2.0, tight());
  REQUIRE(r1.error_raw.size() == r2.error_raw.size());
  for (std::size_t i = 0; i < r1.error_raw.size(); ++i) {
    CHECK(std::abs(r2.error_raw[i] - 2.0 * r1.error_raw[i]) <=
          1e-12 * std::max(1.0, r1.error_raw[i]));
    // normalized errors coincide
    CHECK(std::abs(r2.error_norms[i] - r1.error_norms[i]) <=
          1e-12 * std::max(1.0, r1.error_norms[i]));
  }
}

TEST_CASE("theorem T error decays with |x0| on the checkerboard") {
  TorusGrid g(2, 64);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{3}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  const GrowthReport gr =
      measure_growth(cs, Site{0, 0, 0}, dyadic_radii(g));
  REQUIRE(gr.certified);
  std::vector<GrowthReport> grs{gr};
  const GrowthCert cert = combine_certs(grs);
  const std::vector<Site> x0{Site{10, 0, 0}, Site{20, 0, 0}};
  const DecayReport rep =
      theorem_T_experiment(a, cs, cert, x0, 11, 0, 1.0, tight());
  CHECK(rep.all_converged);
  REQUIRE(rep.error_norms.size() == 2);
  CHECK(rep.error_norms[1] < rep.error_norms[0]);
  CHECK(rep.abscissae == std::vector<double>{10.0, 20.0});
}

TEST_CASE("theorem T geometric preconditions") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {1, 1, 1}, 0.25);
  const CorrectorSet cs = build_corrector_set(a, tight());
  GrowthCert cert = trivial_cert();

  std::vector<Site> close{Site{5, 0, 0}};  // |x0| < 4 r_star = 8
  CHECK_THROWS_AS(theorem_T_experiment(a, cs, cert, close, 0), Error);
  try {
    theorem_T_experiment(a, cs, cert, close, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionGeometry);
  }

  std::vector<Site> far{Site{12, 0, 0}};
  CHECK_THROWS_AS(theorem_T_experiment(a, cs, cert, far, 0, 20), Error);  // box too small

  cert.certified = false;
  try {
    theorem_T_experiment(a, cs, cert, far, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionGrowth);
  }
}

TEST_CASE("invariants match between quenched and homogenized sides") {
  TorusGrid g(2, 64);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{3}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  BoxDomain box;
  box.dim = 2;
  box.side = 96;
  const TwoScaleSolution ts = solve_two_scale(a, cs, box, 2.0, 13, 1.0, tight());
  const std::vector<double> radii{8, 12, 16};
  const InvariantsReport rep = invariants_check(a, cs, ts, radii);
  REQUIRE(rep.radii.size() == 3);
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    // constant invariant: both sides integrate the same source mass
    CHECK(std::abs(rep.i0[i] - rep.i0h[i]) <=
          1e-6 * std::max(1.0, rep.i0_scale[i]));
    for (int k = 0; k < 2; ++k)
      CHECK(rep.mismatch_rel[i][std::size_t(k)] <= 5e-3);
  }
  for (int k = 0; k < 2; ++k) CHECK(rep.r_indep_rel[std::size_t(k)] <= 5e-3);
}

TEST_CASE("invariants cutoff validation") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {1, 1, 1}, 0.25);
  const CorrectorSet cs = build_corrector_set(a, tight());
  BoxDomain box;
  box.dim = 2;
  box.side = 40;
  const TwoScaleSolution ts = solve_two_scale(a, cs, box, 3.0, 1, 1.0, tight());
  const std::vector<double> small{2.0};  // r < g_radius
  const std::vector<double> large{12.0};  // 2r > side/2 - 2
  for (const auto* bad : {&small, &large}) {
    CHECK_THROWS_AS(invariants_check(a, cs, ts, *bad), Error);
    try {
      invariants_check(a, cs, ts, *bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CutoffTooLarge);
    }
  }
}

TEST_CASE("corollary C: constant medium mixed derivative difference vanishes") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {0.5, 0.5, 0.5}, 0.25);
  const CorrectorSet cs = build_corrector_set(a, tight());
  const std::vector<Site> x0{Site{10, 0, 0}};
  const DecayReport rep =
      corollary_C_experiment(a, cs, trivial_cert(), x0, 0, tight());
  CHECK(rep.all_converged);
  for (double e : rep.error_norms) CHECK(e <= 1e-7);
  CHECK(rep.green_symmetry_rel >= 0.0);
  CHECK(rep.green_symmetry_rel <= 1e-8);
}

TEST_CASE("corollary C decays on the checkerboard") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{4}, g);
  const CorrectorSet cs = build_corrector_set(a, tight());
  const std::vector<Site> x0{Site{9, 0, 0}, Site{16, 0, 0}};
  const DecayReport rep =
      corollary_C_experiment(a, cs, trivial_cert(), x0, 0, tight());
  REQUIRE(rep.error_norms.size() == 2);
  CHECK(rep.error_norms[1] < rep.error_norms[0]);
  CHECK(rep.green_symmetry_rel <= 1e-8);
}

TEST_CASE("quenched Green's function symmetry") {
  TorusGrid g(2, 16);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{21}, g);
  BoxDomain box;
  box.dim = 2;
  box.side = 40;
  const double rel =
      green_symmetry_check(a, box, Site{6, 2, 0}, Site{-4, 1, 0}, tight());
  CHECK(rel <= 1e-8);
}

TEST_CASE("continuum Green's function: log law and Hessian for the identity") {
  const HomMatrix id = HomMatrix::diagonal(2, {1.0, 1.0, 0.0});
  const double pi = 3.14159265358979323846;
  const double diff = continuum_green(id, {4.0, 0.0, 0.0}) -
                      continuum_green(id, {8.0, 0.0, 0.0});
  CHECK(diff == doctest::Approx(std::log(2.0) / (2.0 * pi)).epsilon(1e-10));
  // Hessian of -(1/2pi) ln|x| at (10, 0): diag(1, -1) / (2 pi 100)
  const auto h = continuum_green_hessian(id, {10.0, 0.0, 0.0});
  CHECK(h[0] == doctest::Approx(1.0 / (2.0 * pi * 100.0)).epsilon(1e-2));
  CHECK(h[4] == doctest::Approx(-1.0 / (2.0 * pi * 100.0)).epsilon(1e-2));
  CHECK(std::abs(h[1]) <= 1e-8);
}

TEST_CASE("lemma L: N = 1 ratio is at most one") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{6}, g);
  const LemmaLReport rep = lemma_L_check(a, 8, 1, 1, 3, tight());
  CHECK(rep.all_converged);
  CHECK(rep.lhs == rep.K_half[0]);
  CHECK(rep.rhs == doctest::Approx(rep.K[0]).epsilon(1e-10));
  CHECK(rep.ratio <= 1.0 + 1e-10);
}

TEST_CASE("lemma L matches a direct computation for N = M = 3") {
  TorusGrid g(2, 32);
  const CoefficientField a = sample(checkerboard_spec(), SeedSpec{9}, g);
  const int N = 3, M = 3;
  const LemmaLReport rep = lemma_L_check(a, 8, N, M, 5, tight());
  REQUIRE(int(rep.K.size()) == M * M);
  // lhs = tr(C K_half) with C = I/N
  double lhs = 0;
  for (int m = 0; m < N; ++m) lhs += rep.K_half[std::size_t(m * M + m)];
  lhs /= double(N);
  CHECK(rep.lhs == doctest::Approx(lhs).epsilon(1e-12));
  // rhs = lambda_max(K^{1/2} C K^{1/2}) = lambda_max(K_NN) / N, found here by
  // power iteration on the top-left N x N block of K
  std::array<double, 3> v{1.0, 0.7, 0.3};
  double lam = 0;
  for (int it = 0; it < 2000; ++it) {
    std::array<double, 3> w{};
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        w[std::size_t(i)] += rep.K[std::size_t(i * M + j)] * v[std::size_t(j)];
    lam = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    for (int i = 0; i < N; ++i) v[std::size_t(i)] = w[std::size_t(i)] / lam;
  }
  CHECK(rep.rhs == doctest::Approx(lam / double(N)).epsilon(1e-6));
  CHECK(rep.ratio == doctest::Approx(rep.lhs / rep.rhs).epsilon(1e-12));
  CHECK(rep.ratio < 10.0);
}

TEST_CASE("lemma L validates its arguments") {
  TorusGrid g(2, 16);
  const CoefficientField a = make_constant(g, {1, 1, 1}, 0.25);
  CHECK_THROWS_AS(lemma_L_check(a, 4, 3, 2, 0, tight()), Error);
  CHECK_THROWS_AS(lemma_L_check(a, 4, 0, 2, 0, tight()), Error);
}
