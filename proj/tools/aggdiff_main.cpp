#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "aggdiff/driver.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::string seed_file;
};

aggdiff::RunConfig load(const Args& args) {
  aggdiff::RunConfig cfg = aggdiff::load_config(args.config);
  if (!args.out.empty()) cfg.output.directory = args.out;
  return cfg;
}

void add_common(CLI::App* sub, Args& args, bool with_seed) {
  sub->add_option("--config", args.config, "run configuration file")->required();
  sub->add_option("--out", args.out, "override the output directory");
  if (with_seed) sub->add_option("--seed-file", args.seed_file, "extra fixed-point seed snapshot");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for aggregation-diffusion equations"};
  app.require_subcommand(1);

  Args args;
  CLI::App* evolve = app.add_subcommand("evolve", "advance the configured model in time");
  CLI::App* steady = app.add_subcommand("steady", "solve for stationary states");
  CLI::App* compare = app.add_subcommand("compare", "run both flux discretizations");
  CLI::App* check = app.add_subcommand("check", "run the invariant suite on the model");
  add_common(evolve, args, false);
  add_common(steady, args, true);
  add_common(compare, args, false);
  add_common(check, args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const aggdiff::RunConfig cfg = load(args);
    if (evolve->parsed()) {
      const aggdiff::EvolveResult r = aggdiff::run_evolve(cfg);
      std::cout << "evolve: " << r.rows.back().step << " steps, t = "
                << r.rows.back().time << ", F = " << r.rows.back().free_energy
                << ", stop: " << r.stop_reason << "\n";
      return r.exit_code;
    }
    if (steady->parsed()) {
      const aggdiff::SteadyResult r = aggdiff::run_steady(cfg, args.seed_file);
      for (const auto& s : r.seeds) {
        std::cout << "seed " << s.seed << ": "
                  << (s.converged ? "converged" : "not converged") << " in " << s.iterations
                  << " iterations, residual " << s.residual;
        if (s.converged)
          std::cout << ", F = " << s.free_energy << (s.global_min ? " (global minimum)" : "");
        std::cout << "\n";
      }
      std::cout << r.states.size() << " distinct fixed point(s)\n";
      return r.exit_code;
    }
    if (compare->parsed()) {
      const aggdiff::CompareResult r = aggdiff::run_compare(cfg);
      std::cout << "sg:     " << r.sg.rows.back().step << " steps, F = "
                << r.sg.rows.back().free_energy << ", stop: " << r.sg.stop_reason << "\n";
      std::cout << "upwind: " << r.upwind.rows.back().step << " steps, F = "
                << r.upwind.rows.back().free_energy << ", stop: " << r.upwind.stop_reason << "\n";
      return r.exit_code;
    }
    return aggdiff::run_check(cfg);
  } catch (const aggdiff::parse_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
