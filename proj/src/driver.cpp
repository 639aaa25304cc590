#include "aggdiff/driver.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "aggdiff/energy.hpp"
#include "aggdiff/stepper.hpp"

namespace fs = std::filesystem;

namespace aggdiff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSteadyTol = 1e-13;
constexpr int kSteadyMaxIter = 200000;
constexpr int kMaxHalvings = 20;

std::string snapshot_name(long step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "snapshot_%06ld.dat", step);
  return buf;
}

// FNV-1a over the model-defining parameters; keys the reference-minimizer
// cache so that unrelated configs never share a file.
std::string model_hash(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << (cfg.domain.kind == DomainKind::torus ? "torus" : "interval") << '|'
     << format_double(cfg.domain.length) << '|' << cfg.domain.cells << '|'
     << format_double(cfg.kappa) << '|';
  switch (cfg.potential.kind) {
    case Potential::Kind::kuramoto:
      ss << "kuramoto|" << format_double(cfg.potential.sigma);
      break;
    case Potential::Kind::gaussian:
      ss << "gaussian|" << format_double(cfg.potential.amplitude) << '|'
         << format_double(cfg.potential.variance);
      break;
    case Potential::Kind::tabulated:
      ss << "tabulated|" << cfg.potential.file;
      break;
  }
  const std::string canon = ss.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::vector<std::pair<std::string, DensityState>> default_seeds(const RunConfig& cfg,
                                                                const CellComplex& mesh) {
  std::vector<std::pair<std::string, DensityState>> seeds;
  const int n = mesh.n_cells();
  const double length = mesh.domain().length;
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / length);
  seeds.emplace_back("uniform", DensityState{uniform, 0.0});
  Eigen::VectorXd cosine(n);
  for (int k = 0; k < n; ++k)
    cosine[k] = 1.0 + 0.5 * std::cos(2.0 * M_PI * mesh.coords()[k] / length);
  cosine /= mesh.volumes().dot(cosine);
  seeds.emplace_back("cosine", DensityState{cosine, 0.0});
  try {
    seeds.emplace_back("initial", build_initial(cfg, mesh));
  } catch (const std::exception&) {
    // the configured initial datum is optional as a seed
  }
  return seeds;
}

TimeSeriesRow make_row(long step, double time, double dt, const EnergyReport& rep,
                       int newton_iters, double gap) {
  TimeSeriesRow row;
  row.step = step;
  row.time = time;
  row.dt = dt;
  row.mass = rep.mass;
  row.min_density = rep.min_density;
  row.free_energy = rep.free_energy;
  row.entropy = rep.entropy;
  row.interaction = rep.interaction;
  row.dissipation = rep.dissipation;
  row.rel_entropy_step = rep.rel_entropy_step;
  row.fed_residual = rep.fed_residual;
  row.newton_iters = newton_iters;
  row.energy_gap = gap;
  return row;
}

} // namespace

std::optional<DensityState> reference_minimizer(const RunConfig& cfg, const CellComplex& mesh,
                                                const KernelMatrix& kernel) {
  const fs::path cache = fs::path(cfg.output.directory) / ("refmin_" + model_hash(cfg) + ".dat");
  if (fs::exists(cache)) {
    const Snapshot snap = read_snapshot(cache.string());
    if (snap.rho.size() == mesh.n_cells()) return DensityState{snap.rho, 0.0};
  }
  std::optional<DensityState> best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& [name, seed] : default_seeds(cfg, mesh)) {
    const FixedPointResult r =
        solve_stationary(mesh, kernel, cfg.kappa, seed, kSteadyTol, kSteadyMaxIter);
    if (!r.converged) continue;
    const double f = free_energy(mesh, kernel, r.state, cfg.kappa).free_energy;
    if (f < best_f) {
      best_f = f;
      best = r.state;
    }
  }
  if (best) {
    fs::create_directories(cfg.output.directory);
    write_snapshot(cache.string(), mesh.coords(), best->rho);
    // re-read so that cached and fresh runs see bit-identical references
    const Snapshot snap = read_snapshot(cache.string());
    best->rho = snap.rho;
  }
  return best;
}

EvolveResult run_evolve(const RunConfig& cfg, const EvolveOptions& opts) {
  EvolveResult result;
  const CellComplex mesh = build_mesh(cfg);
  const Potential potential = build_potential(cfg);
  const KernelMatrix kernel = assemble_kernel(potential, mesh);
  DensityState rho = build_initial(cfg, mesh);

  fs::create_directories(cfg.output.directory);
  const fs::path outdir(cfg.output.directory);

  StepConfig scfg;
  scfg.kappa = cfg.kappa;
  scfg.dt = cfg.time.dt_init;
  scfg.flux_kind = cfg.flux;
  scfg.newton_tol = cfg.time.newton_tol;
  scfg.newton_max_iter = cfg.time.newton_max_iter;

  const double f0 = free_energy(mesh, kernel, rho, cfg.kappa).free_energy;
  const SmallnessReport small = check_smallness(mesh, scfg, potential.lipschitz(), f0);
  if (!small.all_ok())
    std::cerr << "warning: smallness condition violated (mesh margin " << small.mesh_margin
              << ", energy margin " << small.energy_margin << ", dt margin " << small.dt_margin
              << "); proceeding\n";

  std::optional<DensityState> reference;
  double f_ref = 0.0;
  if (cfg.time.energy_gap_tol > 0.0) {
    reference = reference_minimizer(cfg, mesh, kernel);
    if (reference)
      f_ref = free_energy(mesh, kernel, *reference, cfg.kappa).free_energy;
    else
      std::cerr << "warning: no reference minimizer found; gap stopping disabled\n";
  }
  auto gap_of = [&](double f) { return reference ? f - f_ref : f; };

  double dt = cfg.time.dt_init;
  double f_prev = f0;
  long step = 0;
  int stall = 0;
  result.stop_reason = "t_max";

  {
    const EnergyReport rep0 = step_report(mesh, kernel, rho, rho, 0.0, cfg.kappa);
    result.rows.push_back(make_row(0, 0.0, dt, rep0, 0, gap_of(rep0.free_energy)));
  }
  if (cfg.output.snapshot_every > 0)
    write_snapshot((outdir / snapshot_name(0)).string(), mesh.coords(), rho.rho);

  const double t_end = cfg.time.t_max;
  while (rho.time < t_end * (1.0 - 1e-14) && t_end > 0.0) {
    double dt_attempt = std::min(dt, t_end - rho.time);
    DensityState rho_new;
    NewtonStats stats;
    int halvings = 0;
    for (;;) {
      scfg.dt = dt_attempt;
      std::tie(rho_new, stats) = implicit_step(mesh, kernel, rho, scfg);
      if (stats.converged) break;
      dt_attempt *= 0.5;
      if (++halvings > kMaxHalvings) {
        std::cerr << "error: step " << step + 1 << " failed after " << kMaxHalvings
                  << " time-step halvings (t = " << rho.time << ")\n";
        result.exit_code = 1;
        result.stop_reason = "step-failure";
        break;
      }
    }
    if (result.exit_code != 0) break;

    ++step;
    const EnergyReport rep = step_report(mesh, kernel, rho, rho_new, dt_attempt, cfg.kappa);
    const double gap = gap_of(rep.free_energy);
    const TimeSeriesRow row = make_row(step, rho_new.time, dt_attempt, rep, stats.iterations, gap);
    result.rows.push_back(row);
    if (opts.observer) opts.observer(row, rho_new);
    if (cfg.output.snapshot_every > 0 && step % cfg.output.snapshot_every == 0)
      write_snapshot((outdir / snapshot_name(step)).string(), mesh.coords(), rho_new.rho);

    rho = std::move(rho_new);
    if (cfg.time.adaptive) dt = adapt_dt(stats, dt_attempt);

    if (reference && gap <= cfg.time.energy_gap_tol) {
      result.stop_reason = "energy-gap";
      break;
    }
    stall = std::abs(rep.free_energy - f_prev) < 64.0 * kEps * std::abs(rep.free_energy)
                ? stall + 1
                : 0;
    f_prev = rep.free_energy;
    if (stall >= cfg.time.stall_window) {
      result.stop_reason = "stall";
      break;
    }
  }

  write_timeseries_csv((outdir / cfg.output.csv).string(), result.rows);
  write_snapshot((outdir / "final_state.dat").string(), mesh.coords(), rho.rho);
  result.final_state = std::move(rho);
  return result;
}

SteadyResult run_steady(const RunConfig& cfg, const std::string& seed_file) {
  SteadyResult result;
  const CellComplex mesh = build_mesh(cfg);
  const Potential potential = build_potential(cfg);
  const KernelMatrix kernel = assemble_kernel(potential, mesh);

  auto seeds = default_seeds(cfg, mesh);
  if (!seed_file.empty()) {
    const Snapshot snap = read_snapshot(seed_file);
    if (snap.rho.size() != mesh.n_cells())
      throw std::runtime_error("seed file does not match the mesh size");
    Eigen::VectorXd rho = snap.rho;
    rho /= mesh.volumes().dot(rho);
    seeds.emplace_back("file", DensityState{rho, 0.0});
  }

  fs::create_directories(cfg.output.directory);
  const fs::path outdir(cfg.output.directory);

  for (const auto& [name, seed] : seeds) {
    const FixedPointResult r =
        solve_stationary(mesh, kernel, cfg.kappa, seed, kSteadyTol, kSteadyMaxIter);
    SteadySeedReport rep;
    rep.seed = name;
    rep.converged = r.converged;
    rep.iterations = r.iterations;
    rep.residual = r.residual;
    if (r.converged) {
      rep.free_energy = free_energy(mesh, kernel, r.state, cfg.kappa).free_energy;
      // deduplicate by volume-weighted l1 distance
      for (size_t i = 0; i < result.states.size(); ++i) {
        const double dist =
            mesh.volumes().dot((result.states[i].rho - r.state.rho).cwiseAbs().eval());
        if (dist < 1e-6) {
          rep.state_index = static_cast<int>(i);
          break;
        }
      }
      if (rep.state_index < 0) {
        result.states.push_back(r.state);
        rep.state_index = static_cast<int>(result.states.size()) - 1;
      }
    }
    result.seeds.push_back(rep);
  }

  // global minimizer among the distinct fixed points
  int global = -1;
  double best_f = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < result.states.size(); ++i) {
    const double f = free_energy(mesh, kernel, result.states[i], cfg.kappa).free_energy;
    if (f < best_f) {
      best_f = f;
      global = static_cast<int>(i);
    }
  }
  for (SteadySeedReport& rep : result.seeds)
    rep.global_min = rep.converged && rep.state_index == global;

  for (size_t i = 0; i < result.states.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fixedpoint_%zu.dat", i);
    write_snapshot((outdir / buf).string(), mesh.coords(), result.states[i].rho);
  }
  {
    std::ofstream out(outdir / "steady_summary.txt");
    out << "seed converged iterations residual free_energy state global_min\n";
    for (const SteadySeedReport& rep : result.seeds)
      out << rep.seed << ' ' << (rep.converged ? 1 : 0) << ' ' << rep.iterations << ' '
          << format_double(rep.residual) << ' ' << format_double(rep.free_energy) << ' '
          << rep.state_index << ' ' << (rep.global_min ? 1 : 0) << "\n";
  }

  result.exit_code = result.states.empty() ? 1 : 0;
  return result;
}

CompareResult run_compare(const RunConfig& cfg) {
  CompareResult result;
  RunConfig sg_cfg = cfg;
  sg_cfg.flux = FluxKind::scharfetter_gummel;
  sg_cfg.output.directory = (fs::path(cfg.output.directory) / "sg").string();
  RunConfig up_cfg = cfg;
  up_cfg.flux = FluxKind::upwind;
  up_cfg.output.directory = (fs::path(cfg.output.directory) / "upwind").string();

  int threads = 1;
  if (const char* env = std::getenv("AGGDIFF_THREADS")) threads = std::max(1, std::atoi(env));
  if (threads >= 2) {
    std::exception_ptr sg_err, up_err;
    std::thread sg([&] {
      try {
        result.sg = run_evolve(sg_cfg);
      } catch (...) {
        sg_err = std::current_exception();
      }
    });
    std::thread up([&] {
      try {
        result.upwind = run_evolve(up_cfg);
      } catch (...) {
        up_err = std::current_exception();
      }
    });
    sg.join();
    up.join();
    if (sg_err) std::rethrow_exception(sg_err);
    if (up_err) std::rethrow_exception(up_err);
  } else {
    result.sg = run_evolve(sg_cfg);
    result.upwind = run_evolve(up_cfg);
  }

  fs::create_directories(cfg.output.directory);
  std::ofstream gap(fs::path(cfg.output.directory) / "gap_compare.csv");
  gap << "scheme,step,time,energy_gap\n";
  for (const TimeSeriesRow& r : result.sg.rows)
    gap << "sg," << r.step << ',' << format_double(r.time) << ','
        << format_double(r.energy_gap) << "\n";
  for (const TimeSeriesRow& r : result.upwind.rows)
    gap << "upwind," << r.step << ',' << format_double(r.time) << ','
        << format_double(r.energy_gap) << "\n";

  result.exit_code = std::max(result.sg.exit_code, result.upwind.exit_code);
  return result;
}

int run_check(const RunConfig& cfg) {
  const CellComplex mesh = build_mesh(cfg);
  const Potential potential = build_potential(cfg);
  const KernelMatrix kernel = assemble_kernel(potential, mesh);
  const DensityState init = build_initial(cfg, mesh);
  const double lip = potential.lipschitz();

  bool all_ok = true;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  " << detail << "\n";
    if (!ok) all_ok = false;
  };

  const EvolveResult run = run_evolve(cfg);
  if (run.exit_code != 0) {
    report("evolution", false, "stop reason: " + run.stop_reason);
    return 1;
  }

  double worst_mass = 0.0, worst_fed = 0.0, worst_jump = -1e300, min_rho = 1e300;
  for (size_t i = 0; i < run.rows.size(); ++i) {
    const TimeSeriesRow& r = run.rows[i];
    worst_mass = std::max(worst_mass, std::abs(r.mass - 1.0));
    if (r.step > 0) {
      min_rho = std::min(min_rho, r.min_density);
      worst_fed = std::max(worst_fed,
                           std::abs(r.fed_residual) /
                               std::max(1.0, std::abs(r.free_energy) / r.dt) / 1e-9);
      worst_jump = std::max(worst_jump, r.free_energy - run.rows[i - 1].free_energy);
    }
  }
  report("mass conservation |m-1| <= 1e-13", worst_mass <= 1e-13, format_double(worst_mass));
  report("positivity after step 1", run.rows.size() < 2 || min_rho > 0.0,
         format_double(run.rows.size() < 2 ? 0.0 : min_rho));
  report("monotone free energy (slack 1e-10)", worst_jump <= 1e-10, format_double(worst_jump));
  report("dissipation identity residual <= 1e-9 scale",
         cfg.flux == FluxKind::upwind || worst_fed <= 1.0,
         cfg.flux == FluxKind::upwind ? "skipped (upwind flux)" : format_double(worst_fed * 1e-9));

  StepConfig scfg;
  scfg.kappa = cfg.kappa;
  scfg.dt = cfg.time.dt_init;
  scfg.flux_kind = cfg.flux;
  scfg.newton_tol = cfg.time.newton_tol;
  scfg.newton_max_iter = cfg.time.newton_max_iter;
  const double f0 = free_energy(mesh, kernel, init, cfg.kappa).free_energy;
  const SmallnessReport small = check_smallness(mesh, scfg, lip, f0);
  std::cout << "INFO  smallness h <= kappa/Lip: " << (small.mesh_ok ? "ok" : "violated")
            << " (margin " << format_double(small.mesh_margin) << ")\n";
  std::cout << "INFO  smallness energy condition: " << (small.energy_ok ? "ok" : "violated")
            << " (margin " << format_double(small.energy_margin) << ")\n";
  std::cout << "INFO  smallness dt Lip^2/kappa <= 3/8: " << (small.dt_ok ? "ok" : "violated")
            << " (margin " << format_double(small.dt_margin) << ")\n";

  // stability probe against a mass-preserving perturbation of the initial state
  DensityState perturbed = init;
  for (int k = 0; k < mesh.n_cells(); ++k)
    perturbed.rho[k] *= 1.0 + 1e-3 * std::cos(4.0 * M_PI * mesh.coords()[k] /
                                              mesh.domain().length);
  perturbed.rho /= mesh.volumes().dot(perturbed.rho);
  const double ratio = stability_probe(mesh, kernel, init, perturbed, scfg);
  if (lip == 0.0)
    report("stability probe ratio <= 1 (pure diffusion)", ratio <= 1.0 + 1e-12,
           format_double(ratio));
  else if (small.all_ok())
    report("stability probe ratio <= 3", ratio <= 3.0, format_double(ratio));
  else
    std::cout << "INFO  stability probe ratio " << format_double(ratio)
              << " (smallness violated, not enforced)\n";

  return all_ok ? 0 : 1;
}

} // namespace aggdiff
