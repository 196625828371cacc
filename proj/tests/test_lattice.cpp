#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homog/lattice.hpp"
#include "homog/rng.hpp"

using namespace homog;

namespace {

ScalarField random_scalar(const TorusGrid& g, std::uint64_t seed) {
  ScalarField u(g);
  for (std::int64_t s = 0; s < g.sites(); ++s)
    u.v[std::size_t(s)] = 2.0 * unit_uniform(seed, std::uint64_t(s)) - 1.0;
  return u;
}

VectorField random_vector(const TorusGrid& g, std::uint64_t seed) {
  VectorField f(g);
  for (std::int64_t s = 0; s < g.sites(); ++s)
    for (int j = 0; j < g.dim; ++j)
      f.at(s, j) = 2.0 * unit_uniform(seed, std::uint64_t(s), std::uint64_t(j)) - 1.0;
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TorusGrid(1, 8), Error);
  CHECK_THROWS_AS(TorusGrid(4, 8), Error);
  CHECK_THROWS_AS(TorusGrid(2, 3), Error);
  TorusGrid g(3, 4);
  CHECK(g.sites() == 64);
}

TEST_CASE("index round trip and wrap") {
  TorusGrid g(3, 8);
  for (std::int64_t s : {std::int64_t(0), std::int64_t(77), g.sites() - 1}) {
    CHECK(g.index(g.coords(s)) == s);
  }
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(8) == 0);
  CHECK(g.min_image(7) == -1);
  CHECK(g.min_image(3) == 3);
}

TEST_CASE("grad of constant is zero, ramp has wrap edges") {
  TorusGrid g(2, 8);
  ScalarField c(g, 5.0);
  const VectorField dc = grad(c);
  for (double v : dc.v) CHECK(v == 0.0);

  ScalarField ramp(g);
  for (std::int64_t s = 0; s < g.sites(); ++s)
    ramp.v[std::size_t(s)] = double(g.coords(s)[0]);
  const VectorField dr = grad(ramp);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    const Site x = g.coords(s);
    CHECK(dr.at(s, 0) == (x[0] == 7 ? 1.0 - 8.0 : 1.0));
    CHECK(dr.at(s, 1) == 0.0);
  }
}

TEST_CASE("grad of an indicator has exactly 4 nonzeros on d=2 L=4") {
  TorusGrid g(2, 4);
  ScalarField u(g);
  u.v[std::size_t(g.index(Site{0, 0, 0}))] = 1.0;
  const VectorField du = grad(u);
  int plus = 0, minus = 0, zero = 0;
  for (double v : du.v) {
    if (v == 1.0) ++plus;
    else if (v == -1.0) ++minus;
    else if (v == 0.0) ++zero;
  }
  CHECK(plus == 2);
  CHECK(minus == 2);
  CHECK(zero == int(du.v.size()) - 4);
}

TEST_CASE("div F of grad delta is the 5-point Laplacian column") {
  TorusGrid g(2, 4);
  ScalarField u(g);
  const std::int64_t o = g.index(Site{1, 1, 0});
  u.v[std::size_t(o)] = 1.0;
  const ScalarField lap = div(grad(u));
  CHECK(lap.v[std::size_t(o)] == -4.0);
  for (const Site& n : {Site{2, 1, 0}, Site{0, 1, 0}, Site{1, 2, 0}, Site{1, 0, 0}})
    CHECK(lap.v[std::size_t(g.index(n))] == 1.0);
  double sum = 0;
  for (double v : lap.v) sum += v;
  CHECK(sum == 0.0);
}

TEST_CASE("div of constant field is zero") {
  TorusGrid g(3, 4);
  VectorField f(g, 2.5);
  for (double v : div(f).v) CHECK(v == 0.0);
}

TEST_CASE("summation by parts is exact for random fields") {
  for (int d : {2, 3})
    for (int L : {8, 16}) {
      TorusGrid g(d, L);
      const ScalarField u = random_scalar(g, 11 + std::uint64_t(d * L));
      const VectorField f = random_vector(g, 23 + std::uint64_t(d * L));
      const ScalarField df = div(f);
      const VectorField du = grad(u);
      double a = 0, b = 0, scale = 0;
      for (std::int64_t s = 0; s < g.sites(); ++s) {
        a += u.v[std::size_t(s)] * df.v[std::size_t(s)];
        for (int j = 0; j < d; ++j) {
          b += du.at(s, j) * f.at(s, j);
          scale += std::abs(du.at(s, j) * f.at(s, j));
        }
      }
      CHECK(std::abs(a + b) <= 1e-12 * scale);
    }
}

TEST_CASE("grad and div commute with torus shifts") {
  TorusGrid g(2, 8);
  const ScalarField u = random_scalar(g, 5);
  const Site z{3, 5, 0};
  ScalarField us(g);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    Site x = g.coords(s);
    for (int k = 0; k < 2; ++k) x[k] += z[k];
    us.v[std::size_t(g.index(x))] = u.v[std::size_t(s)];
  }
  const VectorField du = grad(u);
  const VectorField dus = grad(us);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    Site x = g.coords(s);
    for (int k = 0; k < 2; ++k) x[k] += z[k];
    for (int j = 0; j < 2; ++j) CHECK(dus.at(g.index(x), j) == du.at(s, j));
  }
}

TEST_CASE("skew tensor storage is exactly antisymmetric") {
  TorusGrid g(3, 4);
  SkewTensorField s(g);
  CHECK(s.pairs == 3);
  s.at(7, SkewTensorField::pair_index(3, 0, 2)) = 1.5;
  CHECK(s.entry(7, 0, 2) == 1.5);
  CHECK(s.entry(7, 2, 0) == -1.5);
  CHECK(s.entry(7, 1, 1) == 0.0);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) CHECK(s.entry(7, j, k) + s.entry(7, k, j) == 0.0);
}

TEST_CASE("ball membership") {
  TorusGrid g(2, 8);
  CHECK(ball_sites(g, Ball{Site{3, 3, 0}, 1.0}).size() == 5);
  CHECK(ball_sites(g, Ball{Site{3, 3, 0}, 1.5}).size() == 9);
  CHECK(ball_sites(g, Ball{Site{0, 0, 0}, 0.4}).size() == 1);  // center only
  // periodic wrap: ball at the corner has the same count
  CHECK(ball_sites(g, Ball{Site{0, 0, 0}, 1.0}).size() == 5);
  CHECK_THROWS_AS(ball_sites(g, Ball{Site{0, 0, 0}, -0.5}), Error);
  try {
    ball_sites(g, Ball{Site{0, 0, 0}, -0.5});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyBall);
  }
}

TEST_CASE("ball mean of constant and of a ramp") {
  TorusGrid g(2, 8);
  ScalarField c(g, 3.0);
  CHECK(ball_mean(c, Ball{Site{2, 2, 0}, 1.5}) == 3.0);
  ScalarField ramp(g);
  for (std::int64_t s = 0; s < g.sites(); ++s)
    ramp.v[std::size_t(s)] = double(g.coords(s)[0]);
  CHECK(ball_mean(ramp, Ball{Site{3, 3, 0}, 1.0}) == doctest::Approx(3.0));
}

TEST_CASE("ball l2 deviation") {
  TorusGrid g(2, 8);
  ScalarField c(g, -2.0);
  CHECK(ball_l2_dev(c, Ball{Site{4, 4, 0}, 2.0}) == 0.0);

  // +-1 alternating on the 2-site ball {x, x+e1} around the midpoint fails to
  // exist on the lattice; use the r=1 cross and check invariance instead
  ScalarField f(g);
  for (std::int64_t s = 0; s < g.sites(); ++s)
    f.v[std::size_t(s)] = unit_uniform(77, std::uint64_t(s));
  const Ball b{Site{4, 4, 0}, 2.0};
  const double dev = ball_l2_dev(f, b);
  for (double& v : f.v) v += 10.0;
  CHECK(ball_l2_dev(f, b) == doctest::Approx(dev).epsilon(1e-12));
}

TEST_CASE("two point deviation is 1 for +-1 values") {
  // radius 0.5 ball contains one site; build the two-site set via a radius-1
  // ball on d=2 L=4 with a field that is +1 on the center row sites and -1 on
  // the off-row sites would mix 5 sites, so check the exact two-point formula
  // through the component API instead
  TorusGrid g(2, 4);
  ScalarField f(g);
  const std::int64_t a = g.index(Site{0, 0, 0});
  const std::int64_t b = g.index(Site{1, 0, 0});
  f.v[std::size_t(a)] = 1.0;
  f.v[std::size_t(b)] = -1.0;
  const std::vector<std::int64_t> sites{a, b};
  const std::vector<ComponentView> comps = components(f);
  CHECK(ball_l2_dev(g, comps, sites) == doctest::Approx(1.0));
}

TEST_CASE("vector and skew ball stats stack components") {
  TorusGrid g(2, 8);
  VectorField f(g);
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    f.at(s, 0) = 1.0;
    f.at(s, 1) = -4.0;
  }
  const auto m = ball_mean(f, Ball{Site{3, 3, 0}, 1.5});
  CHECK(m[0] == 1.0);
  CHECK(m[1] == -4.0);
  CHECK(ball_l2_dev(f, Ball{Site{3, 3, 0}, 1.5}) == 0.0);
}

TEST_CASE("cutoff eta plateau, exterior, ramp, and gradient bound") {
  TorusGrid g(2, 64);
  const Site c{32, 32, 0};
  const double r = 8.0;
  const ScalarField eta = cutoff_eta(g, c, r);
  for (std::int64_t s : ball_sites(g, Ball{c, r}))
    CHECK(eta.v[std::size_t(s)] == 1.0);
  CHECK(eta.v[std::size_t(g.index(Site{32 + 17, 32, 0}))] == 0.0);
  // distance 1.5 r: ramp value 0.5 up to one site spacing over r
  CHECK(eta.v[std::size_t(g.index(Site{44, 32, 0}))] ==
        doctest::Approx(0.5).epsilon(1.0 / r));
  const VectorField de = grad(eta);
  double dmax = 0;
  for (double v : de.v) dmax = std::max(dmax, std::abs(v));
  CHECK(dmax <= 2.0 / r);

  CHECK_THROWS_AS(cutoff_eta(g, c, 16.0), Error);
  try {
    cutoff_eta(g, c, 16.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CutoffTooLarge);
  }
}
