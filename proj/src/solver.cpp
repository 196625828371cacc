#include "homog/solver.hpp"

#include <chrono>
#include <cmath>

namespace homog {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

namespace {

double mean(const std::vector<double>& a) {
  double s = 0;
  for (double v : a) s += v;
  return s / double(a.size());
}

void subtract_mean(std::vector<double>& a) {
  const double m = mean(a);
  for (double& v : a) v -= m;
}

// -div(a grad u) on the torus, edge conductances.
void torus_edge_apply(const CoefficientField& a, const double* u, double* out) {
  const TorusGrid& g = a.grid;
  const int L = g.side, d = g.dim;
  const double* c = a.cond.data();
  const std::int64_t s1 = L;
  const std::int64_t s2 = std::int64_t(L) * L;
  const int n2 = d == 3 ? L : 1;
  for (int x2 = 0; x2 < n2; ++x2)
    for (int x1 = 0; x1 < L; ++x1) {
      const std::int64_t row = x1 * s1 + x2 * s2;
      const std::int64_t up1 = (x1 + 1 == L ? row - (L - 1) * s1 : row + s1);
      const std::int64_t dn1 = (x1 == 0 ? row + (L - 1) * s1 : row - s1);
      const std::int64_t up2 = (x2 + 1 == L ? row - (L - 1) * s2 : row + s2);
      const std::int64_t dn2 = (x2 == 0 ? row + (L - 1) * s2 : row - s2);
      for (int x0 = 0; x0 < L; ++x0) {
        const std::int64_t i = row + x0;
        const std::int64_t ip0 = (x0 + 1 == L ? row : i + 1);
        const std::int64_t im0 = (x0 == 0 ? row + L - 1 : i - 1);
        const double ui = u[i];
        double s = c[i * d + 0] * (ui - u[ip0]) + c[im0 * d + 0] * (ui - u[im0]);
        const std::int64_t iu1 = up1 + x0, id1 = dn1 + x0;
        s += c[i * d + 1] * (ui - u[iu1]) + c[id1 * d + 1] * (ui - u[id1]);
        if (d == 3) {
          const std::int64_t iu2 = up2 + x0, id2 = dn2 + x0;
          s += c[i * d + 2] * (ui - u[iu2]) + c[id2 * d + 2] * (ui - u[id2]);
        }
        out[i] = s;
      }
    }
}

struct TorusEdgeOp {
  const CoefficientField& a;

  std::size_t size() const { return std::size_t(a.grid.sites()); }

  void apply(const double* u, double* out) const { torus_edge_apply(a, u, out); }

  std::vector<double> inv_diag() const {
    const TorusGrid& g = a.grid;
    const std::int64_t n = g.sites();
    const int d = g.dim;
    std::vector<double> out(std::size_t(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const Site x = g.coords(i);
      double s = 0;
      for (int j = 0; j < d; ++j) {
        Site xm = x;
        xm[j] -= 1;
        s += a.at(i, j) + a.at(g.index(xm), j);
      }
      out[std::size_t(i)] = 1.0 / s;
    }
    return out;
  }
};

struct TorusMatOp {
  HomMatrix ah;
  TorusGrid grid;
  mutable std::vector<double> flux;  // d per site scratch

  TorusMatOp(const HomMatrix& m, const TorusGrid& g)
      : ah(m), grid(g), flux(std::size_t(g.sites()) * g.dim) {}

  std::size_t size() const { return std::size_t(grid.sites()); }

  void apply(const double* u, double* out) const {
    const int L = grid.side, d = grid.dim;
    const std::int64_t s1 = L;
    const std::int64_t s2 = std::int64_t(L) * L;
    const int n2 = d == 3 ? L : 1;
    double* f = flux.data();
    for (int x2 = 0; x2 < n2; ++x2)
      for (int x1 = 0; x1 < L; ++x1) {
        const std::int64_t row = x1 * s1 + x2 * s2;
        const std::int64_t up1 = (x1 + 1 == L ? row - (L - 1) * s1 : row + s1);
        const std::int64_t up2 = (x2 + 1 == L ? row - (L - 1) * s2 : row + s2);
        for (int x0 = 0; x0 < L; ++x0) {
          const std::int64_t i = row + x0;
          const std::int64_t ip0 = (x0 + 1 == L ? row : i + 1);
          double du[3] = {u[ip0] - u[i], u[up1 + x0] - u[i], 0.0};
          if (d == 3) du[2] = u[up2 + x0] - u[i];
          for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int k = 0; k < d; ++k) s += ah.at(j, k) * du[k];
            f[i * d + j] = s;
          }
        }
      }
    for (int x2 = 0; x2 < n2; ++x2)
      for (int x1 = 0; x1 < L; ++x1) {
        const std::int64_t row = x1 * s1 + x2 * s2;
        const std::int64_t dn1 = (x1 == 0 ? row + (L - 1) * s1 : row - s1);
        const std::int64_t dn2 = (x2 == 0 ? row + (L - 1) * s2 : row - s2);
        for (int x0 = 0; x0 < L; ++x0) {
          const std::int64_t i = row + x0;
          const std::int64_t im0 = (x0 == 0 ? row + L - 1 : i - 1);
          double s = f[i * d + 0] - f[im0 * d + 0];
          s += f[i * d + 1] - f[(dn1 + x0) * d + 1];
          if (d == 3) s += f[i * d + 2] - f[(dn2 + x0) * d + 2];
          out[i] = -s;
        }
      }
  }

  std::vector<double> inv_diag() const {
    double diag = 0;
    for (int j = 0; j < grid.dim; ++j) {
      diag += ah.at(j, j);
      for (int k = 0; k < grid.dim; ++k) diag += ah.at(j, k);
    }
    return std::vector<double>(size(), 1.0 / diag);
  }
};

bool box_flux_site(const BoxDomain& box, const Site& y) {
  for (int k = 0; k < box.dim; ++k)
    if (y[k] >= box.side - 1) return false;
  return true;
}

struct BoxEdgeOp {
  BoxDomain box;
  std::vector<double> cond;  // d per box site

  std::size_t size() const { return std::size_t(box.sites()); }

  void apply(const double* u, double* out) const {
    const int n = box.side, d = box.dim;
    const std::int64_t s[3] = {1, n, std::int64_t(n) * n};
    const double* c = cond.data();
    const int n2 = d == 3 ? n : 1;
    const int lo2 = d == 3 ? 1 : 0, hi2 = d == 3 ? n - 1 : 1;
    for (std::int64_t i = 0; i < box.sites(); ++i) out[i] = 0;
    for (int y2 = lo2; y2 < hi2; ++y2)
      for (int y1 = 1; y1 < n - 1; ++y1) {
        const std::int64_t row = y1 * s[1] + y2 * s[2];
        for (int y0 = 1; y0 < n - 1; ++y0) {
          const std::int64_t i = row + y0;
          const double ui = u[i];
          double acc = c[i * d + 0] * (ui - u[i + 1]) + c[(i - 1) * d + 0] * (ui - u[i - 1]);
          acc += c[i * d + 1] * (ui - u[i + s[1]]) + c[(i - s[1]) * d + 1] * (ui - u[i - s[1]]);
          if (d == 3)
            acc += c[i * d + 2] * (ui - u[i + s[2]]) + c[(i - s[2]) * d + 2] * (ui - u[i - s[2]]);
          out[i] = acc;
        }
      }
    (void)n2;
  }

  std::vector<double> inv_diag() const {
    const int d = box.dim;
    std::vector<double> out(size(), 0.0);
    const std::int64_t n = box.sites();
    const std::int64_t s[3] = {1, box.side, std::int64_t(box.side) * box.side};
    for (std::int64_t i = 0; i < n; ++i) {
      const Site y = box.coords(i);
      if (!box.interior(y)) continue;
      double acc = 0;
      for (int j = 0; j < d; ++j) acc += cond[i * d + j] + cond[(i - s[j]) * d + j];
      out[std::size_t(i)] = 1.0 / acc;
    }
    return out;
  }
};

struct BoxMatOp {
  HomMatrix ah;
  BoxDomain box;
  mutable std::vector<double> flux;

  BoxMatOp(const HomMatrix& m, const BoxDomain& b)
      : ah(m), box(b), flux(std::size_t(b.sites()) * b.dim) {}

  std::size_t size() const { return std::size_t(box.sites()); }

  void apply(const double* u, double* out) const {
    const int n = box.side, d = box.dim;
    const std::int64_t s[3] = {1, n, std::int64_t(n) * n};
    double* f = flux.data();
    const std::int64_t total = box.sites();
    for (std::int64_t i = 0; i < total * d; ++i) f[i] = 0;
    const int hi2 = d == 3 ? n - 1 : 1;
    for (int y2 = 0; y2 < hi2; ++y2)
      for (int y1 = 0; y1 < n - 1; ++y1) {
        const std::int64_t row = y1 * s[1] + y2 * s[2];
        for (int y0 = 0; y0 < n - 1; ++y0) {
          const std::int64_t i = row + y0;
          double du[3] = {u[i + 1] - u[i], u[i + s[1]] - u[i], 0.0};
          if (d == 3) du[2] = u[i + s[2]] - u[i];
          for (int j = 0; j < d; ++j) {
            double acc = 0;
            for (int k = 0; k < d; ++k) acc += ah.at(j, k) * du[k];
            f[i * d + j] = acc;
          }
        }
      }
    for (std::int64_t i = 0; i < total; ++i) out[i] = 0;
    const int lo2 = d == 3 ? 1 : 0, hi2b = d == 3 ? n - 1 : 1;
    for (int y2 = lo2; y2 < hi2b; ++y2)
      for (int y1 = 1; y1 < n - 1; ++y1) {
        const std::int64_t row = y1 * s[1] + y2 * s[2];
        for (int y0 = 1; y0 < n - 1; ++y0) {
          const std::int64_t i = row + y0;
          double acc = f[i * d + 0] - f[(i - 1) * d + 0];
          acc += f[i * d + 1] - f[(i - s[1]) * d + 1];
          if (d == 3) acc += f[i * d + 2] - f[(i - s[2]) * d + 2];
          out[i] = -acc;
        }
      }
  }

  std::vector<double> inv_diag() const {
    double diag = 0;
    for (int j = 0; j < box.dim; ++j) {
      diag += ah.at(j, j);
      for (int k = 0; k < box.dim; ++k) diag += ah.at(j, k);
    }
    std::vector<double> out(size(), 0.0);
    const std::int64_t n = box.sites();
    for (std::int64_t i = 0; i < n; ++i)
      if (box.interior(box.coords(i))) out[std::size_t(i)] = 1.0 / diag;
    return out;
  }
};

// Preconditioned CG with fixed accumulation order. When `project` is set the
// iterates are kept on the mean-zero subspace (singular torus system).
template <class Op>
SolveReport cg(const Op& op, const std::vector<double>& b, std::vector<double>& x,
               bool project, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return report;

  const std::vector<double> inv_diag = op.inv_diag();
  std::vector<double> r = b;
  if (project) subtract_mean(r);
  std::vector<double> z(n), p(n), ap(n);
  auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (std::size_t i = 0; i < n; ++i) zz[i] = inv_diag[i] * rr[i];
    if (project) subtract_mean(zz);
  };
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  const double target = opts.tol * bnorm;

  for (int it = 1; it <= opts.max_iter; ++it) {
    op.apply(p.data(), ap.data());
    const double pap = dot(p, ap);
    if (!(pap > 0)) break;  // numerically semidefinite direction; stop
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    if (project) subtract_mean(r);
    report.iterations = it;
    if (norm2(r) <= target) {
      // Confirm with the true residual; restart if the recurrence drifted.
      op.apply(x.data(), ap.data());
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
      if (project) subtract_mean(r);
      const double true_norm = norm2(r);
      if (true_norm <= target) {
        report.rel_residual = true_norm / bnorm;
        report.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return report;
      }
      precondition(r, z);
      p = z;
      rz = dot(r, z);
      continue;
    }
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  op.apply(x.data(), ap.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  if (project) subtract_mean(r);
  report.rel_residual = norm2(r) / bnorm;
  report.converged = report.rel_residual <= opts.tol;
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::vector<double> torus_rhs(const TorusGrid& grid, const VectorField& g,
                              const ScalarField& f) {
  if (g.grid != grid || f.grid != grid)
    throw Error(ErrorCode::GridMismatch, "rhs fields disagree with the medium grid");
  double fsum = 0, fabs_sum = 0;
  for (double v : f.v) {
    fsum += v;
    fabs_sum += std::abs(v);
  }
  if (std::abs(fsum) > 1e-9 * fabs_sum && fabs_sum > 0)
    throw Error(ErrorCode::NonCompatibleRhs, "source term f must have zero mean");
  ScalarField b = div(g);
  for (std::size_t i = 0; i < b.v.size(); ++i) b.v[i] += f.v[i];
  subtract_mean(b.v);  // kill accumulation roundoff; div g is mean-free exactly
  return std::move(b.v);
}

template <class Op>
std::pair<ScalarField, SolveReport> run_torus(const Op& op, const TorusGrid& grid,
                                              const VectorField& g, const ScalarField& f,
                                              const SolveOptions& opts) {
  std::vector<double> b = torus_rhs(grid, g, f);
  ScalarField u(grid);
  SolveReport report = cg(op, b, u.v, /*project=*/true, opts);
  subtract_mean(u.v);
  return {std::move(u), report};
}

// Interior rhs with the Dirichlet boundary contribution folded in.
template <class Op>
std::pair<BoxField, SolveReport> run_box(const Op& op, const BoxDomain& box,
                                         const BoxVectorField* g, const BoxField* f,
                                         const BoxField* boundary, const SolveOptions& opts) {
  const std::int64_t total = box.sites();
  const int d = box.dim;
  const std::int64_t s[3] = {1, box.side, std::int64_t(box.side) * box.side};

  BoxField u0(box);
  if (boundary) {
    for (std::int64_t i = 0; i < total; ++i)
      if (!box.interior(box.coords(i))) u0.v[std::size_t(i)] = boundary->v[std::size_t(i)];
  }

  std::vector<double> b(std::size_t(total), 0.0);
  for (std::int64_t i = 0; i < total; ++i) {
    const Site y = box.coords(i);
    if (!box.interior(y)) continue;
    double acc = f ? f->v[std::size_t(i)] : 0.0;
    if (g)
      for (int j = 0; j < d; ++j) acc += g->at(i, j) - g->at(i - s[j], j);
    b[std::size_t(i)] = acc;
  }
  if (boundary) {
    std::vector<double> au0(std::size_t(total), 0.0);
    op.apply(u0.v.data(), au0.data());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= au0[i];
  }

  std::vector<double> w;
  SolveReport report = cg(op, b, w, /*project=*/false, opts);
  for (std::size_t i = 0; i < w.size(); ++i) u0.v[i] += w[i];
  return {std::move(u0), report};
}

}  // namespace

ScalarField apply_operator(const CoefficientField& a, const ScalarField& u) {
  if (u.grid != a.grid)
    throw Error(ErrorCode::GridMismatch, "field grid disagrees with medium grid");
  ScalarField out(u.grid);
  torus_edge_apply(a, u.v.data(), out.v.data());
  return out;
}

ScalarField apply_operator(const HomMatrix& ah, const ScalarField& u) {
  TorusMatOp op(ah, u.grid);
  ScalarField out(u.grid);
  op.apply(u.v.data(), out.v.data());
  return out;
}

std::pair<ScalarField, SolveReport> solve_torus(const CoefficientField& a,
                                                const VectorField& g,
                                                const ScalarField& f,
                                                const SolveOptions& opts) {
  TorusEdgeOp op{a};
  return run_torus(op, a.grid, g, f, opts);
}

std::pair<ScalarField, SolveReport> solve_torus(const HomMatrix& ah,
                                                const TorusGrid& grid,
                                                const VectorField& g,
                                                const ScalarField& f,
                                                const SolveOptions& opts) {
  TorusMatOp op(ah, grid);
  return run_torus(op, grid, g, f, opts);
}

std::vector<double> box_conductances(const CoefficientField& a, const BoxDomain& box) {
  const std::int64_t total = box.sites();
  const int d = box.dim;
  std::vector<double> cond(std::size_t(total) * d, 0.0);
  for (std::int64_t i = 0; i < total; ++i) {
    const Site t = box.torus_site(a.grid, box.coords(i));
    const std::int64_t ti = a.grid.index(t);
    for (int j = 0; j < d; ++j) cond[i * d + j] = a.at(ti, j);
  }
  return cond;
}

std::pair<BoxField, SolveReport> solve_box(const CoefficientField& a,
                                           const BoxDomain& box,
                                           const BoxVectorField* g, const BoxField* f,
                                           const BoxField* boundary,
                                           const SolveOptions& opts) {
  if (a.grid.dim != box.dim)
    throw Error(ErrorCode::GridMismatch, "box dimension disagrees with medium");
  BoxEdgeOp op{box, box_conductances(a, box)};
  return run_box(op, box, g, f, boundary, opts);
}

std::pair<BoxField, SolveReport> solve_box(const HomMatrix& ah, const BoxDomain& box,
                                           const BoxVectorField* g, const BoxField* f,
                                           const BoxField* boundary,
                                           const SolveOptions& opts) {
  BoxMatOp op(ah, box);
  return run_box(op, box, g, f, boundary, opts);
}

std::vector<double> box_residual(const CoefficientField& a, const BoxDomain& box,
                                 const BoxField& u, const BoxVectorField* g,
                                 const BoxField* f) {
  BoxEdgeOp op{box, box_conductances(a, box)};
  const std::int64_t total = box.sites();
  const int d = box.dim;
  const std::int64_t s[3] = {1, box.side, std::int64_t(box.side) * box.side};
  std::vector<double> au(std::size_t(total), 0.0);
  op.apply(u.v.data(), au.data());
  std::vector<double> r(std::size_t(total), 0.0);
  for (std::int64_t i = 0; i < total; ++i) {
    const Site y = box.coords(i);
    if (!box.interior(y)) continue;
    double acc = f ? f->v[std::size_t(i)] : 0.0;
    if (g)
      for (int j = 0; j < d; ++j) acc += g->at(i, j) - g->at(i - s[j], j);
    r[std::size_t(i)] = acc - au[std::size_t(i)];
  }
  return r;
}

}  // namespace homog
