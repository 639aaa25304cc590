#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aggdiff/config.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/stationary.hpp"

namespace aggdiff {

/// Called after every accepted step with the row just recorded and the new
/// state. Used by tests and diagnostics; the CLI passes nothing.
using StepObserver = std::function<void(const TimeSeriesRow&, const DensityState&)>;

struct EvolveOptions {
  StepObserver observer;
};

struct EvolveResult {
  int exit_code = 0;
  DensityState final_state;
  std::vector<TimeSeriesRow> rows;
  std::string stop_reason;
};

/// Implicit time loop with the iteration-count controller, CSV time series,
/// density snapshots and a final-state snapshot. Stops at t_max, when the
/// free-energy gap to the reference minimizer falls below
/// time.energy_gap_tol, or when the free energy stalls at machine precision
/// for time.stall_window consecutive steps. A cascade of 20 failed step
/// halvings aborts with a nonzero exit code.
EvolveResult run_evolve(const RunConfig& cfg, const EvolveOptions& opts = {});

struct SteadySeedReport {
  std::string seed;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double free_energy = 0.0;
  int state_index = -1; // distinct fixed point this seed converged to
  bool global_min = false;
};

struct SteadyResult {
  int exit_code = 0;
  std::vector<SteadySeedReport> seeds;
  std::vector<DensityState> states; // distinct fixed points
};

/// Runs the fixed-point solver from the default seed set (uniform, single
/// cosine, the configured initial datum) plus an optional seed file,
/// deduplicates the limits and flags the free-energy global minimizer.
SteadyResult run_steady(const RunConfig& cfg, const std::string& seed_file = "");

struct CompareResult {
  int exit_code = 0;
  EvolveResult sg;
  EvolveResult upwind;
};

/// Runs the same configuration under both flux discretizations (SG into
/// <out>/sg, upwind into <out>/upwind) and writes a merged gap-vs-time table
/// for semilog plots. Honors AGGDIFF_THREADS >= 2 by running concurrently.
CompareResult run_compare(const RunConfig& cfg);

/// Invariant bundle on the configured model: per-step mass conservation,
/// positivity, monotone free energy and the dissipation-identity residual,
/// plus the (advisory) smallness report and a stability probe. Prints one
/// line per check; nonzero exit on any hard failure.
int run_check(const RunConfig& cfg);

/// Lowest-free-energy fixed point from the default seeds, cached as a
/// snapshot keyed by a hash of the model parameters. Returns nothing when no
/// seed converges.
std::optional<DensityState> reference_minimizer(const RunConfig& cfg, const CellComplex& mesh,
                                                const KernelMatrix& kernel);

} // namespace aggdiff
