#include "homog/coefficients.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "homog/rng.hpp"

namespace homog {

namespace {

void check_value(double v, double lambda, const char* what) {
  if (!(v >= lambda && v <= 1.0))
    throw Error(ErrorCode::EllipticityViolation,
                std::string(what) + " outside [lambda, 1]");
}

char* format_double(char* buf, char* end, double v) {
  auto res = std::to_chars(buf, end, v);
  return res.ptr;
}

}  // namespace

const char* to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Constant: return "constant";
    case EnsembleKind::Layered: return "layered";
    case EnsembleKind::Checkerboard: return "checkerboard";
    case EnsembleKind::Correlated: return "correlated";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "constant") return EnsembleKind::Constant;
  if (s == "layered") return EnsembleKind::Layered;
  if (s == "checkerboard") return EnsembleKind::Checkerboard;
  if (s == "correlated") return EnsembleKind::Correlated;
  throw Error(ErrorCode::ValidationError, "unknown ensemble kind '" + s + "'");
}

void EnsembleSpec::validate(const TorusGrid& grid) const {
  if (!(lambda > 0 && lambda <= 1))
    throw Error(ErrorCode::ValidationError, "lambda must lie in (0, 1]");
  switch (kind) {
    case EnsembleKind::Constant:
      for (int j = 0; j < grid.dim; ++j) check_value(diag[j], lambda, "diag entry");
      break;
    case EnsembleKind::Layered:
      check_value(value_lo, lambda, "value_lo");
      check_value(value_hi, lambda, "value_hi");
      if (period < 2 || period % 2 != 0 || grid.side % period != 0)
        throw Error(ErrorCode::ValidationError,
                    "layered period must be even and divide L");
      break;
    case EnsembleKind::Checkerboard:
      check_value(value_lo, lambda, "value_lo");
      check_value(value_hi, lambda, "value_hi");
      if (!(prob_hi >= 0 && prob_hi <= 1))
        throw Error(ErrorCode::ValidationError, "prob_hi must lie in [0, 1]");
      break;
    case EnsembleKind::Correlated:
      check_value(value_lo, lambda, "value_lo");
      check_value(value_hi, lambda, "value_hi");
      if (range < 1 || 2 * range + 1 > grid.side)
        throw Error(ErrorCode::ValidationError, "correlated range out of bounds");
      break;
  }
}

CoefficientField make_constant(const TorusGrid& grid, std::array<double, 3> diag,
                               double lambda) {
  for (int j = 0; j < grid.dim; ++j) check_value(diag[j], lambda, "diag entry");
  CoefficientField field(grid, lambda);
  const std::int64_t n = grid.sites();
  for (std::int64_t i = 0; i < n; ++i)
    for (int j = 0; j < grid.dim; ++j) field.at(i, j) = diag[j];
  return field;
}

CoefficientField sample(const EnsembleSpec& spec, const SeedSpec& seed,
                        const TorusGrid& grid) {
  spec.validate(grid);
  if (spec.kind == EnsembleKind::Constant)
    return make_constant(grid, spec.diag, spec.lambda);

  CoefficientField field(grid, spec.lambda);
  const std::int64_t n = grid.sites();
  if (spec.kind == EnsembleKind::Layered) {
    for (std::int64_t i = 0; i < n; ++i) {
      const Site x = grid.coords(i);
      const double v =
          (x[0] % spec.period) < spec.period / 2 ? spec.value_lo : spec.value_hi;
      for (int j = 0; j < grid.dim; ++j) field.at(i, j) = v;
    }
    return field;
  }
  if (spec.kind == EnsembleKind::Checkerboard) {
    for (std::int64_t i = 0; i < n; ++i)
      for (int j = 0; j < grid.dim; ++j) {
        const double u = unit_uniform(seed.seed, std::uint64_t(i), std::uint64_t(j));
        field.at(i, j) = u < spec.prob_hi ? spec.value_hi : spec.value_lo;
      }
    return field;
  }
  // Correlated: threshold a moving average of per-site i.i.d. uniforms over
  // the periodic box of half-width `range` around the edge's base site.
  const int m = spec.range;
  const int m2 = grid.dim == 3 ? m : 0;
  std::vector<double> noise(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    noise[i] = unit_uniform(seed.seed, std::uint64_t(i), 0x100);
  for (std::int64_t i = 0; i < n; ++i) {
    const Site x = grid.coords(i);
    double s = 0;
    int count = 0;
    for (int d2 = -m2; d2 <= m2; ++d2)
      for (int d1 = -m; d1 <= m; ++d1)
        for (int d0 = -m; d0 <= m; ++d0) {
          s += noise[grid.index({x[0] + d0, x[1] + d1, x[2] + d2})];
          ++count;
        }
    const double v = s / count < 0.5 ? spec.value_lo : spec.value_hi;
    for (int j = 0; j < grid.dim; ++j) field.at(i, j) = v;
  }
  return field;
}

void dump_coefficients(const CoefficientField& field, const EnsembleSpec& spec,
                       std::uint64_t seed, std::ostream& out) {
  out << field.grid.dim << ' ' << field.grid.side << ' ';
  char buf[64];
  *format_double(buf, buf + sizeof buf, field.lambda) = 0;
  out << buf << ' ' << to_string(spec.kind) << ' ' << seed << '\n';
  const std::int64_t n = field.grid.sites();
  for (int j = 0; j < field.grid.dim; ++j)
    for (std::int64_t i = 0; i < n; ++i) {
      *format_double(buf, buf + sizeof buf, field.at(i, j)) = 0;
      out << buf << '\n';
    }
}

}  // namespace homog
