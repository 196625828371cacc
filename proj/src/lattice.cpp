#include "homog/lattice.hpp"

#include <cmath>

namespace homog {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyBall: return "EMPTY_BALL";
    case ErrorCode::CutoffTooLarge: return "CUTOFF_TOO_LARGE";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::EllipticityViolation: return "ELLIPTICITY_VIOLATION";
    case ErrorCode::NonCompatibleRhs: return "NON_COMPATIBLE_RHS";
    case ErrorCode::MaxIterExceeded: return "MAX_ITER_EXCEEDED";
    case ErrorCode::PreconditionDiv: return "PRECONDITION_DIV";
    case ErrorCode::RadiusTooLarge: return "RADIUS_TOO_LARGE";
    case ErrorCode::BallOutsideDomain: return "BALL_OUTSIDE_DOMAIN";
    case ErrorCode::PreconditionGeometry: return "PRECONDITION_GEOMETRY";
    case ErrorCode::PreconditionGrowth: return "PRECONDITION_GROWTH";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
  }
  return "UNKNOWN";
}

TorusGrid::TorusGrid(int d, int L) : dim(d), side(L) {
  if (d < 2 || d > 3) throw Error(ErrorCode::ValidationError, "dim must be 2 or 3");
  if (L < 4) throw Error(ErrorCode::ValidationError, "side must be >= 4");
}

int SkewTensorField::pair_index(int dim, int j, int k) {
  (void)dim;
  // (0,1) -> 0, (0,2) -> 1, (1,2) -> 2
  if (j == 0) return k - 1;
  return 2;
}

std::vector<std::int64_t> ball_sites(const TorusGrid& grid, const Ball& ball) {
  std::vector<std::int64_t> out;
  if (ball.radius < 0)
    throw Error(ErrorCode::EmptyBall, "ball radius is negative");
  const double r2 = ball.radius * ball.radius;
  const int m = static_cast<int>(std::floor(ball.radius));
  if (m >= grid.side / 2) {
    // Offsets would alias; test every site against the periodic distance.
    const std::int64_t n = grid.sites();
    for (std::int64_t i = 0; i < n; ++i)
      if (grid.periodic_dist2(grid.coords(i), ball.center) <= r2) out.push_back(i);
    return out;
  }
  Site x{0, 0, 0};
  const int m2 = grid.dim == 3 ? m : 0;
  for (int d2 = -m2; d2 <= m2; ++d2)
    for (int d1 = -m; d1 <= m; ++d1)
      for (int d0 = -m; d0 <= m; ++d0) {
        const double dd = double(d0) * d0 + double(d1) * d1 + double(d2) * d2;
        if (dd > r2) continue;
        x[0] = ball.center[0] + d0;
        x[1] = ball.center[1] + d1;
        x[2] = ball.center[2] + d2;
        out.push_back(grid.index(x));
      }
  return out;
}

VectorField grad(const ScalarField& u) {
  const TorusGrid& g = u.grid;
  VectorField out(g);
  const int L = g.side, d = g.dim;
  const double* uv = u.v.data();
  double* ov = out.v.data();
  const std::int64_t s1 = L;
  const std::int64_t s2 = std::int64_t(L) * L;
  const int n2 = d == 3 ? L : 1;
  for (int x2 = 0; x2 < n2; ++x2)
    for (int x1 = 0; x1 < L; ++x1) {
      const std::int64_t row = x1 * s1 + x2 * s2;
      const std::int64_t up1 = (x1 + 1 == L ? row - (L - 1) * s1 : row + s1);
      const std::int64_t up2 = (x2 + 1 == L ? row - (L - 1) * s2 : row + s2);
      for (int x0 = 0; x0 < L; ++x0) {
        const std::int64_t i = row + x0;
        const std::int64_t ip0 = (x0 + 1 == L ? row : i + 1);
        ov[i * d + 0] = uv[ip0] - uv[i];
        ov[i * d + 1] = uv[up1 + x0] - uv[i];
        if (d == 3) ov[i * d + 2] = uv[up2 + x0] - uv[i];
      }
    }
  return out;
}

ScalarField div(const VectorField& f) {
  const TorusGrid& g = f.grid;
  ScalarField out(g);
  const int L = g.side, d = g.dim;
  const double* fv = f.v.data();
  double* ov = out.v.data();
  const std::int64_t s1 = L;
  const std::int64_t s2 = std::int64_t(L) * L;
  const int n2 = d == 3 ? L : 1;
  for (int x2 = 0; x2 < n2; ++x2)
    for (int x1 = 0; x1 < L; ++x1) {
      const std::int64_t row = x1 * s1 + x2 * s2;
      const std::int64_t dn1 = (x1 == 0 ? row + (L - 1) * s1 : row - s1);
      const std::int64_t dn2 = (x2 == 0 ? row + (L - 1) * s2 : row - s2);
      for (int x0 = 0; x0 < L; ++x0) {
        const std::int64_t i = row + x0;
        const std::int64_t im0 = (x0 == 0 ? row + L - 1 : i - 1);
        double s = fv[i * d + 0] - fv[im0 * d + 0];
        s += fv[i * d + 1] - fv[(dn1 + x0) * d + 1];
        if (d == 3) s += fv[i * d + 2] - fv[(dn2 + x0) * d + 2];
        ov[i] = s;
      }
    }
  return out;
}

double ball_mean(const TorusGrid&, ComponentView c,
                 std::span<const std::int64_t> sites) {
  if (sites.empty()) throw Error(ErrorCode::EmptyBall, "ball has no member sites");
  double s = 0;
  for (std::int64_t i : sites) s += c.data[i * c.stride];
  return s / double(sites.size());
}

double ball_l2_dev(const TorusGrid& grid, std::span<const ComponentView> comps,
                   std::span<const std::int64_t> sites) {
  if (sites.empty()) throw Error(ErrorCode::EmptyBall, "ball has no member sites");
  double acc = 0;
  for (const ComponentView& c : comps) {
    const double m = ball_mean(grid, c, sites);
    double s = 0;
    for (std::int64_t i : sites) {
      const double dv = c.data[i * c.stride] - m;
      s += dv * dv;
    }
    acc += s / double(sites.size());
  }
  return std::sqrt(acc);
}

std::vector<ComponentView> components(const ScalarField& f) {
  return {ComponentView{f.v.data(), 1}};
}

std::vector<ComponentView> components(const VectorField& f) {
  std::vector<ComponentView> out;
  for (int j = 0; j < f.grid.dim; ++j)
    out.push_back(ComponentView{f.v.data() + j, f.grid.dim});
  return out;
}

std::vector<ComponentView> components(const SkewTensorField& f) {
  std::vector<ComponentView> out;
  for (int p = 0; p < f.pairs; ++p)
    out.push_back(ComponentView{f.v.data() + p, f.pairs});
  return out;
}

double ball_mean(const ScalarField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  return ball_mean(f.grid, ComponentView{f.v.data(), 1}, sites);
}

std::vector<double> ball_mean(const VectorField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  std::vector<double> out;
  for (const ComponentView& c : components(f)) out.push_back(ball_mean(f.grid, c, sites));
  return out;
}

std::vector<double> ball_mean(const SkewTensorField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  std::vector<double> out;
  for (const ComponentView& c : components(f)) out.push_back(ball_mean(f.grid, c, sites));
  return out;
}

double ball_l2_dev(const ScalarField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  const auto comps = components(f);
  return ball_l2_dev(f.grid, comps, sites);
}

double ball_l2_dev(const VectorField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  const auto comps = components(f);
  return ball_l2_dev(f.grid, comps, sites);
}

double ball_l2_dev(const SkewTensorField& f, const Ball& b) {
  const auto sites = ball_sites(f.grid, b);
  const auto comps = components(f);
  return ball_l2_dev(f.grid, comps, sites);
}

ScalarField cutoff_eta(const TorusGrid& grid, const Site& center, double r) {
  if (!(r > 0)) throw Error(ErrorCode::ValidationError, "cutoff radius must be positive");
  if (2 * r >= grid.side / 2.0)
    throw Error(ErrorCode::CutoffTooLarge, "cutoff support 2r must fit in half the torus");
  ScalarField out(grid);
  const std::int64_t n = grid.sites();
  for (std::int64_t i = 0; i < n; ++i) {
    const double dist = std::sqrt(grid.periodic_dist2(grid.coords(i), center));
    double eta = 2.0 - dist / r;
    out.v[i] = eta < 0 ? 0.0 : (eta > 1 ? 1.0 : eta);
  }
  return out;
}

}  // namespace homog
