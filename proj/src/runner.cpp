#include "homog/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "homog/csv.hpp"
#include "homog/excess.hpp"
#include "homog/experiments.hpp"
#include "homog/growth.hpp"

namespace homog {

namespace {

struct RunContext {
  ExperimentConfig cfg;
  RunManifest manifest;
  std::filesystem::path out_dir;

  void artifact(const std::string& name, const std::string& bytes) {
    write_file((out_dir / name).string(), bytes);
    manifest.artifacts.push_back({name, fnv1a_hex(bytes)});
  }

  void cert(const std::string& name, bool passed, const std::string& detail) {
    manifest.certifications.push_back({name, passed, detail});
  }
};

SolveOptions solve_options(const ExperimentConfig& cfg) {
  SolveOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  return opts;
}

void certify_correctors(RunContext& ctx, const CorrectorSet& cs) {
  const CorrectorCertificate& c = cs.cert;
  double phi_res = 0, sig = 0;
  for (int i = 0; i < ctx.cfg.dim; ++i) {
    phi_res = std::max(phi_res, c.phi_residual_rel[std::size_t(i)]);
    sig = std::max(sig, c.sigma_identity_rel[std::size_t(i)]);
  }
  ctx.cert("solves_converged", c.all_converged,
           "iterations=" + std::to_string(c.total_iterations));
  ctx.cert("phi_residual", phi_res <= 10.0 * ctx.cfg.tol, fmt_double(phi_res));
  ctx.cert("sigma_identity", sig <= 1e-6, fmt_double(sig));
  ctx.cert("ah_symmetry", c.ah_asymmetry <= 1e-10, fmt_double(c.ah_asymmetry));
  ctx.cert("ah_ellipticity",
           c.eig_min >= cs.lambda - 1e-8 && c.eig_max <= 1.0 + 1e-8,
           "eig in [" + fmt_double(c.eig_min) + ", " + fmt_double(c.eig_max) + "]");
}

void write_ah_csv(RunContext& ctx, const CorrectorSet& cs) {
  CsvWriter csv({"i", "j", "value"});
  for (int i = 0; i < ctx.cfg.dim; ++i)
    for (int j = 0; j < ctx.cfg.dim; ++j)
      csv.row({std::to_string(i + 1), std::to_string(j + 1),
               fmt_double(cs.ah.at(i, j))});
  ctx.artifact("ah.csv", csv.text());
}

void write_cert_csv(RunContext& ctx, const CorrectorSet& cs) {
  CsvWriter csv({"name", "direction", "value"});
  for (int i = 0; i < ctx.cfg.dim; ++i) {
    const auto d = std::to_string(i + 1);
    csv.row({"phi_residual_rel", d, fmt_double(cs.cert.phi_residual_rel[std::size_t(i)])});
    csv.row({"q_mean_abs", d, fmt_double(cs.cert.q_mean_abs[std::size_t(i)])});
    csv.row({"q_div_rel", d, fmt_double(cs.cert.q_div_rel[std::size_t(i)])});
    csv.row({"sigma_identity_rel", d,
             fmt_double(cs.cert.sigma_identity_rel[std::size_t(i)])});
  }
  csv.row({"ah_asymmetry", "0", fmt_double(cs.cert.ah_asymmetry)});
  csv.row({"eig_min", "0", fmt_double(cs.cert.eig_min)});
  csv.row({"eig_max", "0", fmt_double(cs.cert.eig_max)});
  ctx.artifact("cert.csv", csv.text());
}

void write_growth_csv(RunContext& ctx, const GrowthReport& g,
                      const std::string& name) {
  std::vector<std::string> header{"center_x1", "center_x2"};
  if (ctx.cfg.dim == 3) header.push_back("center_x3");
  header.insert(header.end(), {"r", "omega_phi", "omega_sigma", "omega_total"});
  CsvWriter csv(header);
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < ctx.cfg.dim; ++k)
      row.push_back(std::to_string(g.center[std::size_t(k)]));
    row.insert(row.end(),
               {fmt_double(g.radii[i]), fmt_double(g.omega_phi[i]),
                fmt_double(g.omega_sigma[i]), fmt_double(g.omega[i])});
    csv.row(row);
  }
  // footer: alpha_fit, r_star, certified packed into the same width
  std::vector<std::string> footer{"alpha_fit", fmt_double(g.alpha_fit)};
  if (ctx.cfg.dim == 3) footer.push_back("");
  footer.insert(footer.end(), {"r_star", fmt_double(g.r_star), "certified",
                               g.certified ? "1" : "0"});
  csv.row(footer);
  ctx.artifact(name, csv.text());
}

void write_decay_csv(RunContext& ctx, const DecayReport& r, const std::string& name) {
  CsvWriter csv({"x0_norm", "error_l2", "envelope", "slope_running"});
  for (std::size_t i = 0; i < r.abscissae.size(); ++i)
    csv.row({fmt_double(r.abscissae[i]), fmt_double(r.error_norms[i]),
             fmt_double(r.envelope[i]), fmt_double(r.slope_running[i])});
  ctx.artifact(name, csv.text());
}

std::vector<double> default_excess_radii(double r_star, int R) {
  std::vector<double> radii;
  for (double r = std::max(4.0, r_star); r <= double(R); r *= 2.0)
    radii.push_back(r);
  if (radii.empty() || radii.back() < double(R)) radii.push_back(double(R));
  return radii;
}

GrowthCert certified_growth(RunContext& ctx, const CorrectorSet& cs,
                            std::span<const Site> centers) {
  std::vector<GrowthReport> reports;
  for (const Site& c : centers)
    reports.push_back(measure_growth(cs, c, dyadic_radii(cs.phi.front().grid)));
  const GrowthCert cert = combine_certs(reports);
  ctx.cert("growth_certified", cert.certified,
           "r_star=" + fmt_double(cert.r_star) + " alpha=" + fmt_double(cert.alpha));
  return cert;
}

void run_correctors(RunContext& ctx, const CoefficientField& a) {
  const CorrectorSet cs = build_corrector_set(a, solve_options(ctx.cfg));
  ctx.manifest.solver_iterations += cs.cert.total_iterations;
  write_ah_csv(ctx, cs);
  write_cert_csv(ctx, cs);
  certify_correctors(ctx, cs);
}

void run_growth(RunContext& ctx, const CoefficientField& a) {
  const CorrectorSet cs = build_corrector_set(a, solve_options(ctx.cfg));
  ctx.manifest.solver_iterations += cs.cert.total_iterations;
  const Site center{ctx.cfg.center[0], ctx.cfg.center[1], ctx.cfg.center[2]};
  const std::vector<double> radii =
      ctx.cfg.radii.empty() ? dyadic_radii(a.grid) : ctx.cfg.radii;
  const GrowthReport g = measure_growth(cs, center, radii);
  write_growth_csv(ctx, g, "growth.csv");
  certify_correctors(ctx, cs);
  ctx.cert("growth_certified", g.certified,
           "r_star=" + fmt_double(g.r_star) + " alpha=" + fmt_double(g.alpha_fit));
}

void run_excess(RunContext& ctx, const CoefficientField& a) {
  const SolveOptions opts = solve_options(ctx.cfg);
  const CorrectorSet cs = build_corrector_set(a, opts);
  ctx.manifest.solver_iterations += cs.cert.total_iterations;
  const Site origin{0, 0, 0};
  const GrowthCert cert = certified_growth(ctx, cs, std::span(&origin, 1));
  std::vector<double> radii = ctx.cfg.radii.empty()
                                  ? default_excess_radii(cert.r_star, ctx.cfg.R)
                                  : ctx.cfg.radii;
  for (double r : radii)
    if (r < cert.r_star || r > double(ctx.cfg.R))
      throw Error(ErrorCode::PreconditionGeometry,
                  "excess radius " + fmt_double(r) + " outside [r_star, R]");
  const ExcessExperimentReport rep = excess_decay_experiment(
      a, cs, ctx.cfg.R, radii, ctx.cfg.samples, ctx.cfg.seed, cert.certified, opts);

  std::vector<std::string> header{"sample_id", "r", "excess_sqrt",
                                  "excess_sqrt_fixed_slope"};
  for (int k = 0; k < ctx.cfg.dim; ++k)
    header.push_back("xi_" + std::to_string(k + 1));
  CsvWriter csv(header);
  for (std::size_t s = 0; s < rep.samples.size(); ++s) {
    const SampleExcess& se = rep.samples[s];
    if (!se.ok) continue;
    for (std::size_t i = 0; i < se.radii.size(); ++i) {
      std::vector<std::string> row{std::to_string(s), fmt_double(se.radii[i]),
                                   fmt_double(se.excess_sqrt[i]),
                                   fmt_double(se.excess_sqrt_fixed[i])};
      for (int k = 0; k < ctx.cfg.dim; ++k)
        row.push_back(fmt_double(se.xi[i][std::size_t(k)]));
      csv.row(row);
    }
  }
  ctx.artifact("excess.csv", csv.text());

  CsvWriter agg({"sample_id", "slope_opt", "slope_fixed", "slope_residual",
                 "slope_bound_const", "ok"});
  for (std::size_t s = 0; s < rep.samples.size(); ++s) {
    const SampleExcess& se = rep.samples[s];
    agg.row({std::to_string(s), fmt_double(se.slope_opt), fmt_double(se.slope_fixed),
             fmt_double(se.slope_residual), fmt_double(se.slope_bound_const),
             se.ok ? "1" : "0"});
  }
  agg.row({"median", fmt_double(rep.median_slope_opt),
           fmt_double(rep.median_slope_fixed), "",
           fmt_double(rep.max_slope_bound_const), std::to_string(rep.n_ok)});
  ctx.artifact("aggregate.csv", agg.text());
  ctx.cert("samples_ok", rep.n_ok == int(rep.samples.size()),
           std::to_string(rep.n_ok) + "/" + std::to_string(rep.samples.size()));
  certify_correctors(ctx, cs);
}

std::vector<Site> x0_sites(const ExperimentConfig& cfg) {
  if (cfg.x0.empty())
    throw Error(ErrorCode::ValidationError, "field x0: required for this command");
  std::vector<Site> sites;
  for (double x : cfg.x0) sites.push_back(Site{int(std::lround(x)), 0, 0});
  return sites;
}

void run_thmT(RunContext& ctx, const CoefficientField& a) {
  const SolveOptions opts = solve_options(ctx.cfg);
  const CorrectorSet cs = build_corrector_set(a, opts);
  ctx.manifest.solver_iterations += cs.cert.total_iterations;
  const std::vector<Site> x0 = x0_sites(ctx.cfg);
  std::vector<Site> centers{Site{0, 0, 0}};
  centers.insert(centers.end(), x0.begin(), x0.end());
  const GrowthCert cert = certified_growth(ctx, cs, centers);
  const DecayReport rep =
      theorem_T_experiment(a, cs, cert, x0, ctx.cfg.seed, ctx.cfg.box, 1.0, opts,
                           ctx.cfg.threads);
  ctx.manifest.solver_iterations += rep.total_iterations;
  write_decay_csv(ctx, rep, "decay_T.csv");
  ctx.cert("solves_converged", rep.all_converged && cs.cert.all_converged,
           "iterations=" + std::to_string(rep.total_iterations));
  certify_correctors(ctx, cs);
}

void run_corC(RunContext& ctx, const CoefficientField& a) {
  const SolveOptions opts = solve_options(ctx.cfg);
  const CorrectorSet cs = build_corrector_set(a, opts);
  ctx.manifest.solver_iterations += cs.cert.total_iterations;
  const std::vector<Site> x0 = x0_sites(ctx.cfg);
  std::vector<Site> centers{Site{0, 0, 0}};
  centers.insert(centers.end(), x0.begin(), x0.end());
  const GrowthCert cert = certified_growth(ctx, cs, centers);
  const DecayReport rep =
      corollary_C_experiment(a, cs, cert, x0, ctx.cfg.box, opts, ctx.cfg.threads);
  ctx.manifest.solver_iterations += rep.total_iterations;
  write_decay_csv(ctx, rep, "decay_C.csv");
  ctx.cert("solves_converged", rep.all_converged && cs.cert.all_converged,
           "iterations=" + std::to_string(rep.total_iterations));
  ctx.cert("green_symmetry", rep.green_symmetry_rel <= 10.0 * ctx.cfg.tol,
           fmt_double(rep.green_symmetry_rel));
  certify_correctors(ctx, cs);
}

void run_lemmaL(RunContext& ctx, const CoefficientField& a) {
  const LemmaLReport rep = lemma_L_check(a, ctx.cfg.R, ctx.cfg.N, ctx.cfg.M,
                                         ctx.cfg.seed, solve_options(ctx.cfg),
                                         ctx.cfg.threads);
  ctx.manifest.solver_iterations += rep.total_iterations;
  CsvWriter csv({"R", "N", "lhs", "rhs", "ratio"});
  csv.row({std::to_string(rep.R), std::to_string(rep.N), fmt_double(rep.lhs),
           fmt_double(rep.rhs), fmt_double(rep.ratio)});
  ctx.artifact("lemmaL.csv", csv.text());
  ctx.cert("solves_converged", rep.all_converged,
           "iterations=" + std::to_string(rep.total_iterations));
  ctx.cert("ratio_finite", std::isfinite(rep.ratio) && rep.rhs > 0,
           fmt_double(rep.ratio));
}

}  // namespace

std::string RunManifest::text() const {
  std::string s = "# run manifest\n";
  s += "[config]\n" + config_echo;
  s += "[artifacts]\n";
  for (const ArtifactEntry& a : artifacts)
    s += a.name + " fnv1a=" + a.checksum + "\n";
  s += "[certifications]\n";
  for (const CertEntry& c : certifications)
    s += c.name + " " + (c.passed ? "PASS" : "FAIL") + " " + c.detail + "\n";
  s += "[stats]\n";
  s += "wall_seconds = " + fmt_double(wall_seconds) + "\n";
  s += "solver_iterations = " + std::to_string(solver_iterations) + "\n";
  s += std::string("all_passed = ") + (all_passed ? "1" : "0") + "\n";
  return s;
}

RunManifest run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.cfg = config;
  ctx.out_dir = config.out;
  std::filesystem::create_directories(ctx.out_dir);
  ctx.manifest.config_echo = echo_config(config);

  const TorusGrid grid(config.dim, config.size);
  const CoefficientField a = sample(config.ensemble, SeedSpec{config.seed}, grid);

  switch (config.command) {
    case Command::Correctors: run_correctors(ctx, a); break;
    case Command::Growth: run_growth(ctx, a); break;
    case Command::Excess: run_excess(ctx, a); break;
    case Command::ThmT: run_thmT(ctx, a); break;
    case Command::CorC: run_corC(ctx, a); break;
    case Command::LemmaL: run_lemmaL(ctx, a); break;
  }

  ctx.manifest.all_passed = true;
  for (const CertEntry& c : ctx.manifest.certifications)
    ctx.manifest.all_passed = ctx.manifest.all_passed && c.passed;
  ctx.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // the manifest embeds the wall time, which is not reproducible, so the
  // byte-stability contract covers the CSV artifacts; manifest written last
  write_file((ctx.out_dir / "manifest.txt").string(), ctx.manifest.text());
  return ctx.manifest;
}

}  // namespace homog
