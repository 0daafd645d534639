// mgqw: spectra, simulations, localization profiles, and weak-limit reports
// for the Szegedy walk on the magnifier graph (the Z-lattice with one pendant
// vertex per cell), driven by the drifted-walk parameters (p,q,r).

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "magnifier/graph.hpp"
#include "magnifier/io.hpp"
#include "magnifier/limitlaw.hpp"
#include "magnifier/localization.hpp"
#include "magnifier/rw.hpp"
#include "magnifier/spectral.hpp"
#include "magnifier/szegedy.hpp"
#include "magnifier/verify.hpp"

namespace {

using namespace magnifier;

struct Config {
  double p = 0.0, q = 0.0, r = 0.0;
  std::int64_t steps = 1000;
  std::int64_t window = 20;
  std::int64_t sim_window = 0;
  int kgrid = 100;
  int quad = 1 << 15;
  std::string format = "csv";
  std::string out = "-";
  bool corrupt_coin = false;
  VerifyOptions tols;
};

void add_common_options(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--p", cfg.p, "transition weight p")->required();
  cmd->add_option("--q", cfg.q, "transition weight q")->required();
  cmd->add_option("--r", cfg.r, "transition weight r")->required();
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", cfg.out, "output path, - for stdout")->capture_default_str();
  cmd->add_option("--kgrid", cfg.kgrid, "k-grid size")->check(CLI::Range(16, 1 << 22))
      ->capture_default_str();
  cmd->add_option("--quad", cfg.quad, "quadrature grid size")->check(CLI::Range(16, 1 << 24))
      ->capture_default_str();
  cmd->add_option("--tol-unitarity", cfg.tols.tol_unitarity, "unitarity tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-specmap", cfg.tols.tol_specmap, "spectral mapping tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-eigenrel", cfg.tols.tol_eigenrel, "eigen-relation tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-derivative", cfg.tols.tol_derivative, "band derivative tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-gamma", cfg.tols.tol_gamma, "branch-weight identity tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-mass", cfg.tols.tol_mass, "total-mass tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-pushforward", cfg.tols.tol_pushforward,
                  "band pushforward CDF tolerance")
      ->capture_default_str();
}

RWParams make_params(const Config& cfg) { return RWParams(cfg.p, cfg.q, cfg.r); }

void emit(const Config& cfg, const Table& table) {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;
  if (cfg.out != "-") {
    file = std::make_unique<std::ofstream>(cfg.out);
    if (!*file) throw std::runtime_error("cannot open output path " + cfg.out);
    os = file.get();
  }
  if (cfg.format == "json") {
    write_json(*os, table);
  } else {
    write_csv(*os, table);
  }
}

void add_spectral_meta(Table& table, const Config& cfg, const RWParams& params) {
  const SpectralParams s = spectral_params(params);
  table.meta.emplace_back("p", format_double(params.p));
  table.meta.emplace_back("q", format_double(params.q));
  table.meta.emplace_back("r", format_double(params.r));
  table.meta.emplace_back("a", format_double(s.a));
  table.meta.emplace_back("b", format_double(s.b));
  table.meta.emplace_back("lambda0", format_double(s.lambda0));
  table.meta.emplace_back("lambda1", format_double(s.lambda1));
  table.meta.emplace_back("theta0", format_double(s.theta0));
  table.meta.emplace_back("theta1", format_double(s.theta1));
  table.meta.emplace_back("kappa", format_double(s.kappa));
  table.meta.emplace_back("recurrent", is_recurrent(params) ? "true" : "false");
  table.meta.emplace_back("kgrid", std::to_string(cfg.kgrid));
  table.meta.emplace_back("quad", std::to_string(cfg.quad));
}

int cmd_spectrum(const Config& cfg) {
  const RWParams params = make_params(cfg);
  Table table;
  table.name = "spectrum";
  add_spectral_meta(table, cfg, params);
  const auto report = spectral_map_check(params, cfg.kgrid, cfg.tols.tol_specmap);
  table.meta.emplace_back("specmap_max_dev", format_double(report.max_dev));
  table.columns = {"k",      "j_minus", "j_zero", "j_plus",
                   "arg_u1", "arg_u2",  "arg_u3", "arg_u4", "arg_u5", "arg_u6"};
  for (int m = 0; m < cfg.kgrid; ++m) {
    const double k = 2.0 * M_PI * m / cfg.kgrid;
    const auto jspec = twisted_matrix_spectrum(params, k);
    const auto fiber = expected_fiber_spectrum(params, k);
    std::array<double, 6> args;
    for (int i = 0; i < 6; ++i) args[i] = std::arg(fiber[i]);
    std::sort(args.begin(), args.end());
    table.rows.push_back({k, jspec[0], jspec[1], jspec[2], args[0], args[1], args[2], args[3],
                          args[4], args[5]});
  }
  emit(cfg, table);
  if (!report.pass) {
    std::cerr << "spectrum: spectral mapping deviation " << report.max_dev
              << " exceeds tolerance " << cfg.tols.tol_specmap << "\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const Config& cfg) {
  const RWParams params = make_params(cfg);
  const std::int64_t n = cfg.steps;
  Distribution dist;
  try {
    dist = cfg.sim_window > 0
               ? ensemble_distribution(params, n, Window(-cfg.sim_window, cfg.sim_window))
               : ensemble_distribution(params, n);
  } catch (const WindowOverflowError&) {
    throw WindowOverflowError("simulate: window radius " + std::to_string(cfg.sim_window) +
                              " cannot hold a " + std::to_string(n) +
                              "-step run; use --window >= " + std::to_string(n + 2) +
                              " or drop --window for automatic sizing");
  }
  Table table;
  table.name = "simulate";
  add_spectral_meta(table, cfg, params);
  table.meta.emplace_back("steps", std::to_string(n));
  table.meta.emplace_back("mean", format_double(moments(dist, 1)));
  table.meta.emplace_back("second_moment", format_double(moments(dist, 2)));
  table.meta.emplace_back("total_mass", format_double(dist.total()));
  if (n >= 1) {
    table.meta.emplace_back("pseudo_velocity_empirical",
                            format_double(pseudo_velocity_empirical(dist, n, 1e-3)));
  }
  table.columns = {"j", "mass", "x", "empirical_cdf"};
  double cum = 0.0;
  for (std::int64_t c = 0; c < dist.window.cell_count(); ++c) {
    const std::int64_t j = dist.window.jmin + c;
    cum += dist.mass(c);
    table.rows.push_back({static_cast<double>(j), dist.mass(c),
                          n >= 1 ? static_cast<double>(j) / n : 0.0, cum});
  }
  emit(cfg, table);
  return 0;
}

int cmd_localization(const Config& cfg) {
  const RWParams params = make_params(cfg);
  const std::int64_t t_hi = cfg.steps;
  const std::int64_t t_lo = t_hi / 2;
  const std::int64_t radius = cfg.window;

  // wide window so the reported analytic total includes the tails
  const std::int64_t analytic_radius = std::max<std::int64_t>(radius + 2, 60);
  const Window wide(-analytic_radius, analytic_radius);
  const EnsembleProfiles profiles = mixed_localization_profiles(params, wide);
  const Distribution sim = time_averaged_distribution(params, t_lo, t_hi, radius);

  Table table;
  table.name = "localization";
  add_spectral_meta(table, cfg, params);
  table.meta.emplace_back("t_lo", std::to_string(t_lo));
  table.meta.emplace_back("t_hi", std::to_string(t_hi));
  table.meta.emplace_back("radius", std::to_string(radius));
  table.meta.emplace_back("total_analytic_time_averaged",
                          format_double(profiles.averaged.total()));
  table.meta.emplace_back("total_simulated_window", format_double(sim.total()));
  double maxdiff = 0.0;
  table.columns = {"j", "analytic_even", "analytic_odd", "analytic_avg", "simulated_avg",
                   "abs_diff"};
  for (std::int64_t j = -radius; j <= radius; ++j) {
    const double even = profiles.even.at(j);
    const double odd = profiles.odd.at(j);
    const double avg = profiles.averaged.at(j);
    const double simv = sim.at(j);
    const double diff = std::abs(avg - simv);
    maxdiff = std::max(maxdiff, diff);
    table.rows.push_back({static_cast<double>(j), even, odd, avg, simv, diff});
  }
  table.meta.emplace_back("max_cell_abs_diff", format_double(maxdiff));
  emit(cfg, table);
  return 0;
}

int cmd_limit(const Config& cfg) {
  const RWParams params = make_params(cfg);
  const LimitLaw law(params, cfg.quad);
  const LimitLawParams& lp = law.derived();

  Table table;
  table.name = "limit";
  add_spectral_meta(table, cfg, params);
  table.meta.emplace_back("atom_mass", format_double(law.atom_mass()));
  table.meta.emplace_back("calibration", format_double(law.calibration()));
  table.meta.emplace_back("raw_integral", format_double(law.raw_integral()));
  if (cfg.steps >= 1) {
    const Distribution dist = ensemble_distribution(params, cfg.steps);
    table.meta.emplace_back("steps", std::to_string(cfg.steps));
    table.meta.emplace_back("ks_distance",
                            format_double(ks_distance(dist, cfg.steps, law)));
    table.meta.emplace_back("pseudo_velocity_empirical",
                            format_double(pseudo_velocity_empirical(dist, cfg.steps, 1e-3)));
  }
  table.columns = {"x", "density", "gamma_plus", "gamma_minus", "rho_star", "cdf"};
  const int npts = 401;
  for (int i = 0; i < npts; ++i) {
    const double x = lp.kappa * (-1.0 + 2.0 * (i + 0.5) / npts);
    const auto [gp, gm] = gamma_weights(lp, x);
    table.rows.push_back({x, law.density(x), gp, gm, law.rho_star(x), law.cdf(x)});
  }
  emit(cfg, table);
  return 0;
}

int cmd_verify(const Config& cfg) {
  const RWParams params = make_params(cfg);
  VerifyOptions opt = cfg.tols;
  opt.corrupt_coin = cfg.corrupt_coin;
  opt.kgrid = cfg.kgrid;
  opt.quad_points = cfg.quad;
  const auto results = run_verification(params, opt);

  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;
  if (cfg.out != "-") {
    file = std::make_unique<std::ofstream>(cfg.out);
    if (!*file) throw std::runtime_error("cannot open output path " + cfg.out);
    os = file.get();
  }
  int failures = 0;
  for (const auto& res : results) {
    failures += res.pass ? 0 : 1;
    (*os) << (res.pass ? "[PASS] " : "[FAIL] ") << res.name << "  max_dev="
          << format_double(res.max_dev) << "  tol=" << format_double(res.tol) << "\n";
  }
  (*os) << (failures == 0 ? "verification passed" : "verification FAILED") << " ("
        << results.size() - failures << "/" << results.size() << " checks)\n";
  return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Szegedy walk on the magnifier graph: spectra, evolution, localization, "
               "weak limits"};
  app.require_subcommand(1);

  Config cfg;
  auto* spectrum = app.add_subcommand("spectrum", "closed-form and k-grid spectra");
  auto* simulate = app.add_subcommand("simulate", "mixed-ensemble distribution at time n");
  auto* localization = app.add_subcommand("localization",
                                          "analytic and time-averaged localization profiles");
  auto* limit = app.add_subcommand("limit", "calibrated weak-limit density, CDF and waves");
  auto* verify = app.add_subcommand("verify", "run the numerical invariant suites");
  for (auto* cmd : {spectrum, simulate, localization, limit, verify}) {
    add_common_options(cmd, cfg);
  }
  simulate->add_option("--steps", cfg.steps, "number of steps")->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  limit->add_option("--steps", cfg.steps,
                    "steps for the empirical comparison (0 disables)")
      ->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  localization->add_option("--steps", cfg.steps, "time-average horizon T (window [T/2,T))")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  localization->add_option("--window", cfg.window, "spatial radius of the report")
      ->check(CLI::Range(1, 1 << 16))
      ->capture_default_str();
  simulate->add_option("--window", cfg.sim_window, "window radius (0 = automatic n+2)")
      ->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  verify->add_flag("--corrupt-coin", cfg.corrupt_coin,
                   "test hook: perturb the coin so unitarity checks must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (localization->parsed()) return cmd_localization(cfg);
    if (limit->parsed()) return cmd_limit(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
  } catch (const magnifier::WindowOverflowError& e) {
    std::cerr << "window overflow: " << e.what() << "\n";
    return 3;
  } catch (const magnifier::ConvergenceError& e) {
    std::cerr << "numerical verification failure: " << e.what() << "\n";
    return 2;
  } catch (const magnifier::NumericalConsistencyError& e) {
    std::cerr << "numerical verification failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
