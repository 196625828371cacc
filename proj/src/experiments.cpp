#include "homog/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "homog/fit.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double site_norm(const Site& x, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += double(x[k]) * x[k];
  return std::sqrt(s);
}

std::string site_str(const Site& x, int d) {
  std::string s = "(";
  for (int k = 0; k < d; ++k) s += (k ? "," : "") + std::to_string(x[k]);
  return s + ")";
}

/// Box sites within distance r of the physical offset `center`; all members
/// must be interior.
std::vector<std::int64_t> box_ball(const BoxDomain& box, const Site& center,
                                   double r) {
  std::vector<std::int64_t> out;
  const int m = int(std::floor(r));
  const double r2 = r * r;
  const int m2 = box.dim == 3 ? m : 0;
  for (int d2 = -m2; d2 <= m2; ++d2)
    for (int d1 = -m; d1 <= m; ++d1)
      for (int d0 = -m; d0 <= m; ++d0) {
        if (double(d0) * d0 + double(d1) * d1 + double(d2) * d2 > r2) continue;
        const Site y = box.local(Site{center[0] + d0, center[1] + d1, center[2] + d2});
        if (!box.interior(y))
          throw Error(ErrorCode::BallOutsideDomain, "ball leaves the box interior");
        out.push_back(box.index(y));
      }
  if (out.empty()) throw Error(ErrorCode::EmptyBall, "ball has no member sites");
  return out;
}

BoxVectorField box_gradient_field(const BoxField& u) {
  const BoxDomain& box = u.box;
  const int d = box.dim;
  const int n = box.side;
  const std::int64_t total = box.sites();
  const std::int64_t str[3] = {1, n, std::int64_t(n) * n};
  BoxVectorField g(box);
  for (std::int64_t i = 0; i < total; ++i) {
    const Site y = box.coords(i);
    for (int j = 0; j < d; ++j)
      if (y[j] + 1 < n) g.at(i, j) = u.v[std::size_t(i + str[j])] - u.v[std::size_t(i)];
  }
  return g;
}

/// D+ phi_i at the torus site backing each box site, for all directions i.
/// dphi[i].at(site,k) = D+_k phi_i.
std::vector<VectorField> corrector_gradients(const CorrectorSet& correctors) {
  std::vector<VectorField> dphi;
  dphi.reserve(correctors.phi.size());
  for (const ScalarField& p : correctors.phi) dphi.push_back(grad(p));
  return dphi;
}

void fit_decay(DecayReport& report, int d) {
  const LineFit fit = fit_loglog(report.abscissae, report.error_norms);
  int positive = 0;
  for (double e : report.error_norms)
    if (e > 0) ++positive;
  if (positive >= 3) {
    report.slope = fit.slope;
    report.slope_residual = fit.residual_rms;
    report.slope_defined = true;
  }
  report.slope_running.assign(report.abscissae.size(), 0.0);
  for (std::size_t i = 1; i < report.abscissae.size(); ++i) {
    const double num = report.error_norms[i] > 0 && report.error_norms[i - 1] > 0
                           ? std::log(report.error_norms[i] / report.error_norms[i - 1])
                           : 0.0;
    report.slope_running[i] = num / std::log(report.abscissae[i] / report.abscissae[i - 1]);
  }
  // envelope C ln(t)/t^{d+alpha}, prefactor fitted in log scale
  report.envelope.assign(report.abscissae.size(), 0.0);
  double logc = 0;
  int nc = 0;
  std::vector<double> env(report.abscissae.size(), 0.0);
  for (std::size_t i = 0; i < report.abscissae.size(); ++i) {
    const double t = report.abscissae[i] / report.r_star;
    if (t > 1.0) env[i] = std::log(t) / std::pow(t, d + report.alpha);
    if (env[i] > 0 && report.error_norms[i] > 0) {
      logc += std::log(report.error_norms[i] / env[i]);
      ++nc;
    }
  }
  report.prefactor = nc ? std::exp(logc / nc) : 0.0;
  for (std::size_t i = 0; i < env.size(); ++i)
    report.envelope[i] = report.prefactor * env[i];
}

}  // namespace

GrowthCert combine_certs(std::span<const GrowthReport> reports) {
  GrowthCert cert;
  if (reports.empty()) return cert;
  cert.certified = true;
  cert.r_star = 0.0;
  cert.alpha = 1.0;
  for (const GrowthReport& r : reports) {
    cert.r_star = std::max(cert.r_star, r.r_star);
    cert.alpha = std::min(cert.alpha, r.alpha_defined ? r.alpha_fit : 0.0);
    cert.certified = cert.certified && r.certified;
  }
  return cert;
}

BoxVectorField random_source(const BoxDomain& box, double g_radius,
                             std::uint64_t seed, double scale) {
  BoxVectorField g(box);
  const auto sites = box_ball(box, Site{0, 0, 0}, g_radius);
  for (std::int64_t s : sites) {
    const Site y = box.coords(s);
    // key on the physical offset so the density survives box resizing
    const std::uint64_t k0 = std::uint64_t(y[0] - box.side / 2 + (1 << 20));
    const std::uint64_t k1 = std::uint64_t(y[1] - box.side / 2 + (1 << 20));
    const std::uint64_t k2 = std::uint64_t(y[2] - (box.dim == 3 ? box.side / 2 : 0) + (1 << 20));
    for (int j = 0; j < box.dim; ++j)
      g.at(s, j) = scale * (2.0 * unit_uniform(seed, k0, k1, k2 * 8 + std::uint64_t(j)) - 1.0);
  }
  return g;
}

TwoScaleSolution solve_two_scale(const CoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const BoxDomain& box, double g_radius,
                                 std::uint64_t seed, double g_scale,
                                 const SolveOptions& opts, int threads) {
  TwoScaleSolution ts;
  ts.box = box;
  ts.g = random_source(box, g_radius, seed, g_scale);
  ts.g_radius = g_radius;
  ts.g_norm = norm2(ts.g.v);

  const TorusGrid& grid = a.grid;
  const std::vector<VectorField> dphi = corrector_gradients(correctors);
  BoxVectorField gtilde(box);
  for (std::int64_t s = 0; s < box.sites(); ++s) {
    bool nonzero = false;
    for (int j = 0; j < box.dim; ++j) nonzero = nonzero || ts.g.at(s, j) != 0.0;
    if (!nonzero) continue;
    const std::int64_t t = grid.index(box.torus_site(grid, box.coords(s)));
    for (int k = 0; k < box.dim; ++k) {
      double v = 0;
      for (int j = 0; j < box.dim; ++j)
        v += ts.g.at(s, j) * ((j == k ? 1.0 : 0.0) + dphi[std::size_t(k)].at(t, j));
      gtilde.at(s, k) = v;
    }
  }

  parallel_for(2, threads, [&](int job) {
    if (job == 0) {
      auto [u, rep] = solve_box(a, box, &ts.g, nullptr, nullptr, opts);
      ts.u = std::move(u);
      ts.report_u = rep;
    } else {
      auto [v, rep] = solve_box(correctors.ah, box, &gtilde, nullptr, nullptr, opts);
      ts.v = std::move(v);
      ts.report_v = rep;
    }
  });
  return ts;
}

BoxVectorField error_field(const TwoScaleSolution& ts, const CorrectorSet& correctors) {
  const BoxDomain& box = ts.box;
  const TorusGrid& grid = correctors.phi.front().grid;
  const int d = box.dim;
  const BoxVectorField du = box_gradient_field(ts.u);
  const BoxVectorField dv = box_gradient_field(ts.v);
  const std::vector<VectorField> dphi = corrector_gradients(correctors);
  BoxVectorField e(box);
  for (std::int64_t s = 0; s < box.sites(); ++s) {
    const std::int64_t t = grid.index(box.torus_site(grid, box.coords(s)));
    for (int k = 0; k < d; ++k) {
      double v = du.at(s, k);
      for (int i = 0; i < d; ++i)
        v -= dv.at(s, i) * ((i == k ? 1.0 : 0.0) + dphi[std::size_t(i)].at(t, k));
      e.at(s, k) = v;
    }
  }
  return e;
}

BoxVectorField two_scale_error_field(const BoxField& u, const BoxField& v,
                                     const CorrectorSet& correctors) {
  if (u.box.side != v.box.side || u.box.dim != v.box.dim)
    throw Error(ErrorCode::GridMismatch, "u and v live on different boxes");
  const BoxDomain& box = u.box;
  const TorusGrid& grid = correctors.phi.front().grid;
  const int d = box.dim;
  const BoxVectorField dv = box_gradient_field(v);
  BoxField w(box);
  for (std::int64_t s = 0; s < box.sites(); ++s) {
    const std::int64_t t = grid.index(box.torus_site(grid, box.coords(s)));
    double val = u.v[std::size_t(s)] - v.v[std::size_t(s)];
    for (int i = 0; i < d; ++i)
      val -= correctors.phi[std::size_t(i)].v[std::size_t(t)] * dv.at(s, i);
    w.v[std::size_t(s)] = val;
  }
  return box_gradient_field(w);
}

DecayReport theorem_T_experiment(const CoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const GrowthCert& growth,
                                 std::span<const Site> x0_list,
                                 std::uint64_t seed, int box_side, double g_scale,
                                 const SolveOptions& opts, int threads) {
  const int d = a.grid.dim;
  if (!growth.certified)
    throw Error(ErrorCode::PreconditionGrowth,
                "theorem T requires certified sublinear growth");
  double max_norm = 0;
  for (const Site& x0 : x0_list) {
    const double n = site_norm(x0, d);
    if (n < 4.0 * growth.r_star)
      throw Error(ErrorCode::PreconditionGeometry,
                  "|x0| < 4 r_star at x0 = " + site_str(x0, d));
    max_norm = std::max(max_norm, n);
  }
  BoxDomain box;
  box.dim = d;
  box.side = box_side > 0 ? box_side : int(std::ceil(8.0 * max_norm));
  box.center = Site{0, 0, 0};
  if (max_norm + growth.r_star + 2.0 > box.side / 2.0)
    throw Error(ErrorCode::PreconditionGeometry, "box too small for the x0 list");

  const TwoScaleSolution ts =
      solve_two_scale(a, correctors, box, growth.r_star, seed, g_scale, opts, threads);
  const BoxVectorField e = error_field(ts, correctors);
  const BoxVectorField dw = two_scale_error_field(ts.u, ts.v, correctors);

  DecayReport report;
  report.alpha = growth.alpha;
  report.r_star = growth.r_star;
  report.box_side = box.side;
  report.seed = seed;
  report.g_norm = ts.g_norm;
  report.total_iterations = ts.report_u.iterations + ts.report_v.iterations;
  report.all_converged = ts.report_u.converged && ts.report_v.converged;
  for (const Site& x0 : x0_list) {
    const auto sites = box_ball(box, x0, growth.r_star);
    double se = 0, sw = 0;
    for (std::int64_t s : sites)
      for (int k = 0; k < d; ++k) {
        se += e.at(s, k) * e.at(s, k);
        sw += dw.at(s, k) * dw.at(s, k);
      }
    report.abscissae.push_back(site_norm(x0, d));
    report.error_raw.push_back(std::sqrt(se));
    report.error_norms.push_back(std::sqrt(se) / ts.g_norm);
    report.w_norms.push_back(std::sqrt(sw) / ts.g_norm);
  }
  fit_decay(report, d);
  return report;
}

InvariantsReport invariants_check(const CoefficientField& a,
                                  const CorrectorSet& correctors,
                                  const TwoScaleSolution& ts,
                                  std::span<const double> r_list) {
  const BoxDomain& box = ts.box;
  const TorusGrid& grid = a.grid;
  const int d = box.dim;
  const int n = box.side;
  for (double r : r_list) {
    if (r < ts.g_radius)
      throw Error(ErrorCode::CutoffTooLarge,
                  "cutoff plateau must contain the source support");
    if (2.0 * r > box.side / 2.0 - 2.0)
      throw Error(ErrorCode::CutoffTooLarge, "cutoff shell leaves the box");
  }

  const std::int64_t str[3] = {1, n, std::int64_t(n) * n};
  const BoxVectorField du = box_gradient_field(ts.u);
  const BoxVectorField dv = box_gradient_field(ts.v);
  const std::vector<double> cond = box_conductances(a, box);
  const std::vector<VectorField> dphi = corrector_gradients(correctors);

  InvariantsReport report;
  double flux_norm2 = 0;
  for (std::int64_t s = 0; s < box.sites(); ++s)
    for (int j = 0; j < d; ++j) {
      const double f = cond[std::size_t(s) * d + j] * du.at(s, j);
      flux_norm2 += f * f;
    }

  for (double r : r_list) {
    // eta = clamp(2 - |p|/r, 0, 1) on physical offsets p from the center
    BoxField eta(box);
    for (std::int64_t s = 0; s < box.sites(); ++s) {
      const Site y = box.coords(s);
      double p2 = 0;
      for (int k = 0; k < d; ++k) {
        const double pk = double(y[k] - n / 2);
        p2 += pk * pk;
      }
      eta.v[std::size_t(s)] = std::clamp(2.0 - std::sqrt(p2) / r, 0.0, 1.0);
    }
    const BoxVectorField deta = box_gradient_field(eta);

    double i0 = 0, i0h = 0, deta_norm2 = 0;
    std::array<double, 3> lhs{}, rhs{};
    for (std::int64_t s = 0; s < box.sites(); ++s) {
      const Site y = box.coords(s);
      bool active = false;
      for (int j = 0; j < d; ++j) active = active || deta.at(s, j) != 0.0;
      if (!active) continue;
      const std::int64_t t = grid.index(box.torus_site(grid, y));
      for (int j = 0; j < d; ++j) {
        const double de = deta.at(s, j);
        if (de == 0.0) continue;
        deta_norm2 += de * de;
        if (y[j] + 1 >= n) continue;
        const std::int64_t sj = s + str[j];
        const Site yj = box.coords(sj);
        const std::int64_t tj = grid.index(box.torus_site(grid, yj));
        const double au = cond[std::size_t(s) * d + j] * du.at(s, j);
        double fh = 0;
        for (int k = 0; k < d; ++k) fh += correctors.ah.at(j, k) * dv.at(s, k);
        i0 += de * au;
        i0h += de * fh;
        for (int k = 0; k < d; ++k) {
          const double psi = double(yj[k] - n / 2) +
                             correctors.phi[std::size_t(k)].v[std::size_t(tj)];
          const double corr_flux =
              cond[std::size_t(s) * d + j] *
              ((j == k ? 1.0 : 0.0) + dphi[std::size_t(k)].at(t, j));
          lhs[std::size_t(k)] +=
              de * (psi * au - ts.u.v[std::size_t(sj)] * corr_flux);
          rhs[std::size_t(k)] += de * (double(yj[k] - n / 2) * fh -
                                       ts.v.v[std::size_t(sj)] * correctors.ah.at(j, k));
        }
      }
    }
    report.radii.push_back(r);
    report.i0.push_back(i0);
    report.i0h.push_back(i0h);
    report.i0_scale.push_back(std::sqrt(flux_norm2) * std::sqrt(deta_norm2));
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    std::array<double, 3> mm{};
    for (int k = 0; k < d; ++k) {
      const double den = std::max(std::abs(lhs[std::size_t(k)]),
                                  std::abs(rhs[std::size_t(k)]));
      mm[std::size_t(k)] =
          den > 0 ? std::abs(lhs[std::size_t(k)] - rhs[std::size_t(k)]) / den : 0.0;
    }
    report.mismatch_rel.push_back(mm);
  }
  if (report.radii.size() >= 2) {
    const auto& first = report.lhs.front();
    const auto& last = report.lhs.back();
    for (int k = 0; k < d; ++k) {
      const double den = std::max(std::abs(first[std::size_t(k)]),
                                  std::abs(last[std::size_t(k)]));
      report.r_indep_rel[std::size_t(k)] =
          den > 0 ? std::abs(first[std::size_t(k)] - last[std::size_t(k)]) / den : 0.0;
    }
  }
  return report;
}

DecayReport corollary_C_experiment(const CoefficientField& a,
                                   const CorrectorSet& correctors,
                                   const GrowthCert& growth,
                                   std::span<const Site> x0_list,
                                   int box_side, const SolveOptions& opts,
                                   int threads) {
  const int d = a.grid.dim;
  if (!growth.certified)
    throw Error(ErrorCode::PreconditionGrowth,
                "corollary C requires certified sublinear growth");
  double max_norm = 0;
  for (const Site& x0 : x0_list) {
    const double nn = site_norm(x0, d);
    if (nn < 4.0 * growth.r_star)
      throw Error(ErrorCode::PreconditionGeometry,
                  "|x0| < 4 r_star at x0 = " + site_str(x0, d));
    max_norm = std::max(max_norm, nn);
  }
  BoxDomain box;
  box.dim = d;
  box.side = box_side > 0 ? box_side : int(std::ceil(8.0 * max_norm));
  box.center = Site{0, 0, 0};
  const double rb = growth.r_star / 2.0;
  if (max_norm + rb + 2.0 > box.side / 2.0)
    throw Error(ErrorCode::PreconditionGeometry, "box too small for the x0 list");

  const TorusGrid& grid = a.grid;
  const auto src_sites = box_ball(box, Site{0, 0, 0}, rb);
  const int nsrc = int(src_sites.size()) * d;

  std::vector<BoxVectorField> du_q{std::size_t(nsrc)};
  std::vector<BoxVectorField> dv_h{std::size_t(nsrc)};
  std::atomic<long> iters{0};
  std::atomic<bool> converged{true};
  parallel_for(2 * nsrc, threads, [&](int job) {
    const int idx = job % nsrc;
    const bool quenched = job < nsrc;
    const std::int64_t y0 = src_sites[std::size_t(idx / d)];
    const int l = idx % d;
    const std::int64_t str_l = l == 0 ? 1 : (l == 1 ? box.side : std::int64_t(box.side) * box.side);
    BoxField f(box);
    f.v[std::size_t(y0 + str_l)] = 1.0;
    f.v[std::size_t(y0)] -= 1.0;
    SolveReport rep;
    if (quenched) {
      auto [u, r] = solve_box(a, box, nullptr, &f, nullptr, opts);
      du_q[std::size_t(idx)] = box_gradient_field(u);
      rep = r;
    } else {
      auto [v, r] = solve_box(correctors.ah, box, nullptr, &f, nullptr, opts);
      dv_h[std::size_t(idx)] = box_gradient_field(v);
      rep = r;
    }
    iters += rep.iterations;
    if (!rep.converged) converged = false;
  });

  const std::vector<VectorField> dphi = corrector_gradients(correctors);
  // corrected factor at the source: d_jl + D_l phi_j(y)
  std::vector<std::array<double, 9>> src_factor(src_sites.size());
  for (std::size_t si = 0; si < src_sites.size(); ++si) {
    const std::int64_t ty =
        grid.index(box.torus_site(grid, box.coords(src_sites[si])));
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l)
        src_factor[si][std::size_t(j * 3 + l)] =
            (j == l ? 1.0 : 0.0) + dphi[std::size_t(j)].at(ty, l);
  }

  DecayReport report;
  report.alpha = growth.alpha;
  report.r_star = growth.r_star;
  report.box_side = box.side;
  report.total_iterations = iters.load();
  report.all_converged = converged.load();
  for (const Site& x0 : x0_list) {
    const auto ball = box_ball(box, x0, rb);
    double acc = 0;
    for (std::int64_t s : ball) {
      const std::int64_t t = grid.index(box.torus_site(grid, box.coords(s)));
      double fac_x[9];
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          fac_x[i * 3 + k] = (i == k ? 1.0 : 0.0) + dphi[std::size_t(i)].at(t, k);
      for (std::size_t si = 0; si < src_sites.size(); ++si)
        for (int l = 0; l < d; ++l)
          for (int k = 0; k < d; ++k) {
            const std::size_t col = std::size_t(int(si) * d + l);
            double corr = 0;
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j)
                corr += dv_h[std::size_t(int(si) * d + j)].at(s, i) *
                        fac_x[i * 3 + k] *
                        src_factor[si][std::size_t(j * 3 + l)];
            const double diff = du_q[col].at(s, k) - corr;
            acc += diff * diff;
          }
    }
    report.abscissae.push_back(site_norm(x0, d));
    const double norm =
        std::sqrt(acc / (double(ball.size()) * double(src_sites.size())));
    report.error_norms.push_back(norm);
    report.error_raw.push_back(norm);
  }
  fit_decay(report, d);
  report.green_symmetry_rel =
      green_symmetry_check(a, box, x0_list.front(), Site{0, 0, 0}, opts);
  return report;
}

double green_symmetry_check(const CoefficientField& a, const BoxDomain& box,
                            const Site& x, const Site& y,
                            const SolveOptions& opts) {
  const Site lx = box.local(x);
  const Site ly = box.local(y);
  if (!box.interior(lx) || !box.interior(ly))
    throw Error(ErrorCode::BallOutsideDomain, "probe sites must be interior");
  BoxField fy(box);
  fy.v[std::size_t(box.index(ly))] = 1.0;
  auto [uy, ry] = solve_box(a, box, nullptr, &fy, nullptr, opts);
  BoxField fx(box);
  fx.v[std::size_t(box.index(lx))] = 1.0;
  auto [ux, rx] = solve_box(a, box, nullptr, &fx, nullptr, opts);
  const double gxy = uy.v[std::size_t(box.index(lx))];
  const double gyx = ux.v[std::size_t(box.index(ly))];
  const double den = std::max(std::abs(gxy), std::abs(gyx));
  return den > 0 ? std::abs(gxy - gyx) / den : 0.0;
}

double continuum_green(const HomMatrix& ah, const std::array<double, 3>& x) {
  const int d = ah.dim;
  Eigen::MatrixXd m(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) m(j, k) = ah.at(j, k);
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = x[std::size_t(k)];
  const double quad = v.dot(m.ldlt().solve(v));
  const double det = m.determinant();
  if (d == 2) return -std::log(quad) / (4.0 * M_PI * std::sqrt(det));
  return 1.0 / (4.0 * M_PI * std::sqrt(det) * std::sqrt(quad));
}

std::array<double, 9> continuum_green_hessian(const HomMatrix& ah,
                                              const std::array<double, 3>& x) {
  const int d = ah.dim;
  double r = 0;
  for (int k = 0; k < d; ++k) r += x[std::size_t(k)] * x[std::size_t(k)];
  const double h = 1e-3 * std::sqrt(r);
  std::array<double, 9> out{};
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      auto shift = [&](double sj, double sk) {
        std::array<double, 3> p = x;
        p[std::size_t(j)] += sj;
        p[std::size_t(k)] += sk;
        return continuum_green(ah, p);
      };
      double v;
      if (j == k) {
        v = (shift(h, 0) - 2.0 * shift(0, 0) + shift(-h, 0)) / (h * h);
      } else {
        v = (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) /
            (4.0 * h * h);
      }
      out[std::size_t(j * 3 + k)] = v;
    }
  return out;
}

LemmaLReport lemma_L_check(const CoefficientField& a, int R, int N, int M,
                           std::uint64_t seed, const SolveOptions& opts,
                           int threads) {
  if (M < N || N < 1)
    throw Error(ErrorCode::ValidationError, "lemma L requires M >= N >= 1");
  BoxDomain box;
  box.dim = a.grid.dim;
  box.side = 4 * R + 3;  // interior covers |x| <= 2R
  box.center = Site{0, 0, 0};

  LemmaLReport report;
  report.R = R;
  report.N = N;
  report.M = M;

  std::vector<BoxVectorField> grads{std::size_t(M)};
  std::atomic<long> iters{0};
  std::atomic<bool> converged{true};
  parallel_for(M, threads, [&](int m) {
    BoxField boundary(box);
    for (std::int64_t s = 0; s < box.sites(); ++s)
      if (!box.interior(box.coords(s)))
        boundary.v[std::size_t(s)] =
            2.0 * unit_uniform(seed, std::uint64_t(m), std::uint64_t(s)) - 1.0;
    auto [u, rep] = solve_box(a, box, nullptr, nullptr, &boundary, opts);
    grads[std::size_t(m)] = box_gradient_field(u);
    iters += rep.iterations;
    if (!rep.converged) converged = false;
  });
  report.total_iterations = iters.load();
  report.all_converged = converged.load();

  const auto ball = box_ball(box, Site{0, 0, 0}, double(R));
  const auto half = box_ball(box, Site{0, 0, 0}, R / 2.0);
  auto gram = [&](const std::vector<std::int64_t>& sites) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = i; j < M; ++j) {
        double acc = 0;
        for (std::int64_t s : sites)
          for (int k = 0; k < box.dim; ++k)
            acc += grads[std::size_t(i)].at(s, k) * grads[std::size_t(j)].at(s, k);
        g(i, j) = acc;
        g(j, i) = acc;
      }
    return g;
  };
  const Eigen::MatrixXd K = gram(ball);
  const Eigen::MatrixXd Kh = gram(half);
  report.K.assign(K.data(), K.data() + std::size_t(M) * M);
  report.K_half.assign(Kh.data(), Kh.data() + std::size_t(M) * M);

  double lhs = 0;
  for (int m = 0; m < N; ++m) lhs += Kh(m, m);
  lhs /= double(N);
  report.lhs = lhs;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cut = 1e-12 * std::max(ev(M - 1), 0.0);
  Eigen::VectorXd root = Eigen::VectorXd::Zero(M);
  for (int i = 0; i < M; ++i) {
    if (ev(i) > cut) {
      root(i) = std::sqrt(ev(i));
    } else {
      report.regularized = true;
      ++report.dropped;
    }
  }
  const Eigen::MatrixXd Khalf_pow =
      es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(M, M);
  for (int m = 0; m < N; ++m) C(m, m) = 1.0 / double(N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(Khalf_pow * C * Khalf_pow);
  report.rhs = es2.eigenvalues()(M - 1);
  report.ratio = report.rhs > 0 ? report.lhs / report.rhs : 0.0;
  return report;
}

}  // namespace homog
