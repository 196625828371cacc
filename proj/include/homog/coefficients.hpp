#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "homog/lattice.hpp"

namespace homog {

/// Edge-conductance medium: one conductance per lattice edge, stored as d
/// values per site (value j on edge (x, x+e_j)). All values in [lambda, 1].
struct CoefficientField {
  TorusGrid grid;
  std::vector<double> cond;  // d per site, direction-minor within a site
  double lambda = 1.0;

  CoefficientField() = default;
  CoefficientField(const TorusGrid& g, double lam)
      : grid(g), cond(static_cast<std::size_t>(g.sites()) * g.dim, 1.0), lambda(lam) {}

  double& at(std::int64_t site, int j) { return cond[site * grid.dim + j]; }
  double at(std::int64_t site, int j) const { return cond[site * grid.dim + j]; }
};

enum class EnsembleKind { Constant, Layered, Checkerboard, Correlated };

const char* to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& s);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Checkerboard;
  double lambda = 0.25;
  // constant
  std::array<double, 3> diag{1.0, 1.0, 1.0};
  // layered / checkerboard / correlated two-value families
  double value_lo = 0.25;
  double value_hi = 1.0;
  double prob_hi = 0.5;  // checkerboard: P(edge carries value_hi)
  int period = 2;        // layered stripe period along axis 0, must divide L
  int range = 1;         // correlated: moving-average half-width

  void validate(const TorusGrid& grid) const;
};

struct SeedSpec {
  std::uint64_t seed = 0;
};

CoefficientField make_constant(const TorusGrid& grid, std::array<double, 3> diag,
                               double lambda);

/// Draw a field from the ensemble. The value on edge (x,j) is a pure function
/// of (seed, x, j), so generation is order-independent and bitwise
/// reproducible.
CoefficientField sample(const EnsembleSpec& spec, const SeedSpec& seed,
                        const TorusGrid& grid);

/// Text dump: one header line "d L lambda kind seed", then d*L^d conductances,
/// direction-major (all direction-0 edges in lexicographic site order, then
/// direction 1, ...), one value per line.
void dump_coefficients(const CoefficientField& field, const EnsembleSpec& spec,
                       std::uint64_t seed, std::ostream& out);

}  // namespace homog
