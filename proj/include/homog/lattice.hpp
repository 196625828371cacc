#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "homog/error.hpp"

namespace homog {

using Site = std::array<int, 3>;  // unused trailing coordinates are 0

/// Periodic lattice {0..L-1}^d, d in {2,3}. Sites are indexed
/// lexicographically: idx = x0 + L*(x1 + L*x2).
struct TorusGrid {
  int dim = 2;
  int side = 4;

  TorusGrid() = default;
  TorusGrid(int d, int L);

  std::int64_t sites() const {
    std::int64_t n = side;
    for (int k = 1; k < dim; ++k) n *= side;
    return n;
  }

  int wrap(int c) const {
    c %= side;
    return c < 0 ? c + side : c;
  }

  std::int64_t index(const Site& x) const {
    std::int64_t idx = wrap(x[dim - 1]);
    for (int k = dim - 2; k >= 0; --k) idx = idx * side + wrap(x[k]);
    return idx;
  }

  Site coords(std::int64_t idx) const {
    Site x{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      x[k] = static_cast<int>(idx % side);
      idx /= side;
    }
    return x;
  }

  bool operator==(const TorusGrid&) const = default;

  /// Shortest periodic displacement of coordinate difference c.
  int min_image(int c) const {
    c = wrap(c);
    return c > side / 2 ? c - side : c;
  }

  double periodic_dist2(const Site& x, const Site& y) const {
    double s = 0;
    for (int k = 0; k < dim; ++k) {
      double dk = min_image(x[k] - y[k]);
      s += dk * dk;
    }
    return s;
  }
};

struct ScalarField {
  TorusGrid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), v(static_cast<std::size_t>(g.sites()), fill) {}
};

/// d values per site; component j lives on the edge (x, x+e_j).
struct VectorField {
  TorusGrid grid;
  std::vector<double> v;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g, double fill = 0.0)
      : grid(g), v(static_cast<std::size_t>(g.sites()) * g.dim, fill) {}

  double& at(std::int64_t site, int j) { return v[site * grid.dim + j]; }
  double at(std::int64_t site, int j) const { return v[site * grid.dim + j]; }
};

/// Skew tensor per site, stored as the d(d-1)/2 components with j < k.
/// Pair order: d=2: (0,1); d=3: (0,1),(0,2),(1,2).
struct SkewTensorField {
  TorusGrid grid;
  int pairs = 0;
  std::vector<double> v;

  SkewTensorField() = default;
  explicit SkewTensorField(const TorusGrid& g)
      : grid(g), pairs(g.dim * (g.dim - 1) / 2),
        v(static_cast<std::size_t>(g.sites()) * pairs, 0.0) {}

  double& at(std::int64_t site, int p) { return v[site * pairs + p]; }
  double at(std::int64_t site, int p) const { return v[site * pairs + p]; }

  static int pair_index(int dim, int j, int k);  // requires j < k

  /// Full tensor entry sigma_{jk}; antisymmetry is exact by storage.
  double entry(std::int64_t site, int j, int k) const {
    if (j == k) return 0.0;
    if (j < k) return at(site, pair_index(grid.dim, j, k));
    return -at(site, pair_index(grid.dim, k, j));
  }
};

struct Ball {
  Site center{0, 0, 0};
  double radius = 1.0;
};

/// Member sites of B_r(center) under the periodic Euclidean distance,
/// in a deterministic order.
std::vector<std::int64_t> ball_sites(const TorusGrid& grid, const Ball& ball);

/// Forward difference: component j at x is u(x+e_j) - u(x).
VectorField grad(const ScalarField& u);

/// Backward-difference divergence, the exact negative adjoint of grad:
/// sum_x u (div F) = -sum_x (grad u).F holds to machine precision.
ScalarField div(const VectorField& f);

/// One scalar component of a site-indexed multi-component field.
struct ComponentView {
  const double* data = nullptr;
  int stride = 1;
};

double ball_mean(const TorusGrid& grid, ComponentView c,
                 std::span<const std::int64_t> sites);

/// Centered L2 deviation over the ball, squares summed across components.
double ball_l2_dev(const TorusGrid& grid, std::span<const ComponentView> comps,
                   std::span<const std::int64_t> sites);

double ball_mean(const ScalarField& f, const Ball& b);
std::vector<double> ball_mean(const VectorField& f, const Ball& b);
std::vector<double> ball_mean(const SkewTensorField& f, const Ball& b);

double ball_l2_dev(const ScalarField& f, const Ball& b);
double ball_l2_dev(const VectorField& f, const Ball& b);
double ball_l2_dev(const SkewTensorField& f, const Ball& b);

std::vector<ComponentView> components(const ScalarField& f);
std::vector<ComponentView> components(const VectorField& f);
std::vector<ComponentView> components(const SkewTensorField& f);

/// Piecewise-linear cutoff: 1 on B_r(center), 0 outside B_2r, ramp
/// 2 - dist/r in between. Requires 2r < L/2.
ScalarField cutoff_eta(const TorusGrid& grid, const Site& center, double r);

}  // namespace homog
