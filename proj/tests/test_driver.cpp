#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aggdiff/driver.hpp"
#include "aggdiff/energy.hpp"

using namespace aggdiff;
namespace fs = std::filesystem;

namespace {

RunConfig small_kuramoto(double sigma, const std::string& outdir) {
  std::ostringstream text;
  text << "[domain]\ntype = \"torus\"\nlength = 1.0\ncells = 32\n"
       << "[model]\nkappa = 1.0\npotential = \"kuramoto\"\nsigma = " << sigma << "\n"
       << "[initial]\nkind = \"cosine\"\namplitude = 0.1\nmode = 1\n"
       << "[time]\ndt_init = 0.03125\nt_max = 2.0\nnewton_tol = 1e-12\n"
       << "energy_gap_tol = 1e-15\n"
       << "[scheme]\nflux = \"scharfetter-gummel\"\n"
       << "[output]\ndirectory = \"" << outdir << "\"\nsnapshot_every = 0\n";
  return parse_config(text.str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("zero horizon writes only the initial row") {
  const std::string dir = "out_drv_zero";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(1.9, dir);
  cfg.time.t_max = 0.0;
  cfg.time.energy_gap_tol = 0.0;
  const EvolveResult r = run_evolve(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].step == 0);
  const auto rows = read_timeseries_csv((fs::path(dir) / "timeseries.csv").string());
  CHECK(rows.size() == 1);
  CHECK(fs::exists(fs::path(dir) / "final_state.dat"));
}

TEST_CASE("fixed-step mode keeps dt at its configured value") {
  const std::string dir = "out_drv_fixed";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(1.9, dir);
  cfg.time.adaptive = false;
  cfg.time.t_max = 0.5;
  cfg.time.energy_gap_tol = 0.0;
  const EvolveResult r = run_evolve(cfg);
  CHECK(r.exit_code == 0);
  for (size_t i = 1; i + 1 < r.rows.size(); ++i) // final step may be clamped
    CHECK(r.rows[i].dt == cfg.time.dt_init);
}

TEST_CASE("evolution rows satisfy the bookkeeping invariants") {
  const std::string dir = "out_drv_run";
  fs::remove_all(dir);
  const RunConfig cfg = small_kuramoto(2.1, dir);
  int observed = 0;
  EvolveOptions opts;
  opts.observer = [&](const TimeSeriesRow& row, const DensityState& state) {
    ++observed;
    CHECK(row.min_density == state.rho.minCoeff());
  };
  const EvolveResult r = run_evolve(cfg, opts);
  CHECK(r.exit_code == 0);
  REQUIRE(r.rows.size() >= 2);
  CHECK(observed == static_cast<int>(r.rows.size()) - 1);
  for (size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(std::abs(r.rows[i].mass - 1.0) <= 1e-13);
    CHECK(r.rows[i].min_density > 0.0);
    CHECK(r.rows[i].free_energy <= r.rows[i - 1].free_energy + 1e-10);
    CHECK(r.rows[i].time > r.rows[i - 1].time);
  }
}

TEST_CASE("identical evolve invocations produce bit-identical csv files") {
  const std::string dir_a = "out_drv_det_a";
  const std::string dir_b = "out_drv_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  RunConfig cfg = small_kuramoto(2.1, dir_a);
  cfg.time.t_max = 0.5;
  run_evolve(cfg);
  // second run in the same directory reuses the cached reference minimizer
  run_evolve(cfg);
  const std::string once = slurp(fs::path(dir_a) / "timeseries.csv");
  cfg.output.directory = dir_b;
  run_evolve(cfg);
  CHECK(once == slurp(fs::path(dir_a) / "timeseries.csv"));
  CHECK(once == slurp(fs::path(dir_b) / "timeseries.csv"));
}

TEST_CASE("steady finds both kuramoto states above the transition") {
  const std::string dir = "out_drv_steady";
  fs::remove_all(dir);
  const RunConfig cfg = small_kuramoto(2.1, dir);
  const SteadyResult r = run_steady(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.states.size() == 2); // uniform and clustered
  bool global_is_clustered = false;
  for (const SteadySeedReport& s : r.seeds) {
    if (!s.global_min) continue;
    const double spread = (r.states[s.state_index].rho.array() - 1.0).abs().maxCoeff();
    global_is_clustered = spread > 1e-3;
  }
  CHECK(global_is_clustered);
  CHECK(fs::exists(fs::path(dir) / "steady_summary.txt"));
  CHECK(fs::exists(fs::path(dir) / "fixedpoint_0.dat"));
  CHECK(fs::exists(fs::path(dir) / "fixedpoint_1.dat"));
}

TEST_CASE("steady below the transition deduplicates to the uniform state") {
  const std::string dir = "out_drv_steady_sub";
  fs::remove_all(dir);
  const RunConfig cfg = small_kuramoto(1.9, dir);
  const SteadyResult r = run_steady(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.states.size() == 1);
  CHECK((r.states[0].rho.array() - 1.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("steady with zero potential returns exactly the uniform state") {
  const std::string dir = "out_drv_steady_zero";
  fs::remove_all(dir);
  const RunConfig cfg = small_kuramoto(0.0, dir);
  const SteadyResult r = run_steady(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.states.size() == 1);
  CHECK((r.states[0].rho.array() - 1.0).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("compare runs both discretizations to the shared diffusive limit") {
  const std::string dir = "out_drv_compare";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(0.0, dir);
  cfg.time.t_max = 2.0;
  cfg.time.energy_gap_tol = 0.0;
  const CompareResult r = run_compare(cfg);
  CHECK(r.exit_code == 0);
  CHECK((r.sg.final_state.rho - r.upwind.final_state.rho).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(fs::exists(fs::path(dir) / "sg" / "timeseries.csv"));
  CHECK(fs::exists(fs::path(dir) / "upwind" / "timeseries.csv"));
  CHECK(fs::exists(fs::path(dir) / "gap_compare.csv"));
}

TEST_CASE("threaded compare matches the sequential run byte for byte") {
  const std::string dir_seq = "out_drv_cmp_seq";
  const std::string dir_par = "out_drv_cmp_par";
  fs::remove_all(dir_seq);
  fs::remove_all(dir_par);
  RunConfig cfg = small_kuramoto(2.1, dir_seq);
  cfg.time.t_max = 0.5;
  unsetenv("AGGDIFF_THREADS");
  run_compare(cfg);
  cfg.output.directory = dir_par;
  setenv("AGGDIFF_THREADS", "2", 1);
  run_compare(cfg);
  unsetenv("AGGDIFF_THREADS");
  for (const char* leaf : {"sg/timeseries.csv", "upwind/timeseries.csv"})
    CHECK(slurp(fs::path(dir_seq) / leaf) == slurp(fs::path(dir_par) / leaf));
}

TEST_CASE("both discretizations reach the single-peak minimizer of the narrow gaussian") {
  const std::string dir = "out_drv_cmp_gauss";
  fs::remove_all(dir);
  RunConfig cfg;
  cfg.domain = {DomainKind::torus, 1.0, 128};
  cfg.kappa = 1.0;
  cfg.potential.kind = Potential::Kind::gaussian;
  cfg.potential.amplitude = 6.0;
  cfg.potential.variance = 0.05;
  cfg.initial.kind = InitialConfig::Kind::peaks;
  cfg.initial.centers = {0.25, 0.75, 0.5};
  cfg.initial.widths = {0.02, 0.02, 0.05};
  cfg.initial.weights = {1.0, 1.0, 1e-9};
  cfg.initial.baseline = 1e-4;
  cfg.time.dt_init = 0.0078125;
  cfg.time.t_max = 10.0;
  cfg.time.energy_gap_tol = 1e-15;
  cfg.time.stall_window = 400;
  cfg.output.directory = dir;
  const CompareResult r = run_compare(cfg);
  CHECK(r.exit_code == 0);
  for (const EvolveResult* run : {&r.sg, &r.upwind}) {
    int argmax = 0;
    for (int k = 1; k < 128; ++k)
      if (run->final_state.rho[k] > run->final_state.rho[argmax]) argmax = k;
    const double x_peak = (argmax + 0.5) / 128.0;
    CHECK(std::abs(x_peak - 0.5) <= 2.5 / 128.0);
  }
}

TEST_CASE("check passes on a healthy configuration") {
  const std::string dir = "out_drv_check";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(1.9, dir);
  cfg.time.t_max = 0.5;
  CHECK(run_check(cfg) == 0);
}

TEST_CASE("check reports the diffusive contraction for a zero potential") {
  const std::string dir = "out_drv_check_zero";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(0.0, dir);
  cfg.time.t_max = 0.5;
  cfg.time.energy_gap_tol = 0.0;
  CHECK(run_check(cfg) == 0);
}

TEST_CASE("check flags a sloppy newton tolerance") {
  const std::string dir = "out_drv_check_loose";
  fs::remove_all(dir);
  RunConfig cfg = small_kuramoto(2.1, dir);
  cfg.time.t_max = 0.5;
  cfg.time.newton_tol = 1e-3;
  CHECK(run_check(cfg) != 0);
}
