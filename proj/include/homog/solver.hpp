#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "homog/coefficients.hpp"
#include "homog/lattice.hpp"

namespace homog {

/// Constant symmetric coefficient matrix (the homogenized medium).
struct HomMatrix {
  int dim = 2;
  std::array<double, 9> a{};  // row-major d x d

  double at(int j, int k) const { return a[j * 3 + k]; }
  double& at(int j, int k) { return a[j * 3 + k]; }

  static HomMatrix diagonal(int dim, std::array<double, 3> diag) {
    HomMatrix m;
    m.dim = dim;
    for (int j = 0; j < dim; ++j) m.at(j, j) = diag[j];
    return m;
  }
};

struct SolveOptions {
  double tol = 1e-10;    // relative residual target
  int max_iter = 400000;
};

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  double seconds = 0.0;
  bool converged = true;
};

/// -div(a (.) grad u), edgewise product, periodic.
ScalarField apply_operator(const CoefficientField& a, const ScalarField& u);
/// -div(a_h grad u) for a constant full matrix, periodic. The flux at x is
/// F_j = sum_k a_jk (u(x+e_k) - u(x)); the form is symmetric for symmetric a_h.
ScalarField apply_operator(const HomMatrix& ah, const ScalarField& u);

/// Solve -div(a grad u) = div g + f on the torus by preconditioned CG on the
/// mean-zero subspace. f must have (numerically) zero mean. On success the
/// returned u has exactly zero mean and relative residual <= tol.
std::pair<ScalarField, SolveReport> solve_torus(const CoefficientField& a,
                                                const VectorField& g,
                                                const ScalarField& f,
                                                const SolveOptions& opts = {});
std::pair<ScalarField, SolveReport> solve_torus(const HomMatrix& ah,
                                                const TorusGrid& grid,
                                                const VectorField& g,
                                                const ScalarField& f,
                                                const SolveOptions& opts = {});

/// Axis-aligned box of `side` sites embedded in the torus: local coordinates
/// y in [0, side)^d correspond to physical offsets p = y - side/2 from
/// `center`, and the medium is read at the torus site wrap(center + p).
/// The box may be larger than the torus; the medium then repeats
/// periodically. The outermost site layer is the Dirichlet boundary.
struct BoxDomain {
  int dim = 2;
  int side = 8;
  Site center{0, 0, 0};

  std::int64_t sites() const {
    std::int64_t n = side;
    for (int k = 1; k < dim; ++k) n *= side;
    return n;
  }

  std::int64_t index(const Site& y) const {
    std::int64_t idx = y[dim - 1];
    for (int k = dim - 2; k >= 0; --k) idx = idx * side + y[k];
    return idx;
  }

  Site coords(std::int64_t idx) const {
    Site y{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      y[k] = static_cast<int>(idx % side);
      idx /= side;
    }
    return y;
  }

  bool contains(const Site& y) const {
    for (int k = 0; k < dim; ++k)
      if (y[k] < 0 || y[k] >= side) return false;
    return true;
  }

  bool interior(const Site& y) const {
    for (int k = 0; k < dim; ++k)
      if (y[k] < 1 || y[k] >= side - 1) return false;
    return true;
  }

  /// Local coordinates of a physical offset point p from the box center.
  Site local(const Site& p) const {
    Site y{0, 0, 0};
    for (int k = 0; k < dim; ++k) y[k] = p[k] + side / 2;
    return y;
  }

  /// Torus site backing local coordinates y.
  Site torus_site(const TorusGrid& grid, const Site& y) const {
    Site t{0, 0, 0};
    for (int k = 0; k < dim; ++k) t[k] = grid.wrap(center[k] + y[k] - side / 2);
    return t;
  }
};

struct BoxField {
  BoxDomain box;
  std::vector<double> v;

  BoxField() = default;
  explicit BoxField(const BoxDomain& b, double fill = 0.0)
      : box(b), v(static_cast<std::size_t>(b.sites()), fill) {}
};

struct BoxVectorField {
  BoxDomain box;
  std::vector<double> v;

  BoxVectorField() = default;
  explicit BoxVectorField(const BoxDomain& b, double fill = 0.0)
      : box(b), v(static_cast<std::size_t>(b.sites()) * b.dim, fill) {}

  double& at(std::int64_t site, int j) { return v[site * box.dim + j]; }
  double at(std::int64_t site, int j) const { return v[site * box.dim + j]; }
};

/// Edge conductances of the box pulled from the periodic medium, d per site.
std::vector<double> box_conductances(const CoefficientField& a, const BoxDomain& box);

/// Solve -div(a grad u) = div g + f on the box with Dirichlet values taken
/// from `boundary` on the outermost layer (zero when null). Fields outside
/// the box are treated as zero when forming fluxes.
std::pair<BoxField, SolveReport> solve_box(const CoefficientField& a,
                                           const BoxDomain& box,
                                           const BoxVectorField* g,
                                           const BoxField* f,
                                           const BoxField* boundary,
                                           const SolveOptions& opts = {});
std::pair<BoxField, SolveReport> solve_box(const HomMatrix& ah,
                                           const BoxDomain& box,
                                           const BoxVectorField* g,
                                           const BoxField* f,
                                           const BoxField* boundary,
                                           const SolveOptions& opts = {});

/// Residual b - A u restricted to interior sites, for certification.
std::vector<double> box_residual(const CoefficientField& a, const BoxDomain& box,
                                 const BoxField& u, const BoxVectorField* g,
                                 const BoxField* f);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace homog
