#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "aggdiff/interaction.hpp"
#include "aggdiff/mesh.hpp"

namespace aggdiff {

enum class FluxKind { scharfetter_gummel, upwind };

struct StepConfig {
  double kappa = 1.0;
  double dt = 1e-2;
  FluxKind flux_kind = FluxKind::scharfetter_gummel;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
};

struct NewtonStats {
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  std::vector<double> residual_history; // sup norms after each accepted update
};

/// Scharfetter–Gummel edge fluxes F_KL = tau_KL theta(kappa, rho_K, rho_L,
/// d_KL q_KL); antisymmetric by single storage. Densities must be nonnegative.
EdgeField sg_flux(const CellComplex& mesh, const DensityState& rho_new, const EdgeField& q,
                  double kappa);

/// Upwind edge fluxes F~_KL = tau_KL (rho_K (Q_KL)_+ - rho_L (Q_KL)_-) with
/// Q_KL = kappa log(rho_K/rho_L) + d_KL q_KL; the logarithm argument is
/// truncated at machine epsilon.
EdgeField upwind_flux(const CellComplex& mesh, const DensityState& rho_new, const EdgeField& q,
                      double kappa);

/// One implicit step of the scheme
///   |K| (rho_K^{new} - rho_K^{old}) / dt + sum_{L~K} F_KL[rho^{new}] = 0,
/// with the drift built from the time average (rho^{new} + rho^{old})/2,
/// solved by undamped Newton with an analytic dense Jacobian (the upwind
/// residual is only piecewise smooth and uses a finite-difference Jacobian).
/// A residual increase triggers up to 8 update halvings; if the residual
/// still grows, or newton_max_iter is exhausted, the step fails:
/// stats.converged is false and the returned state is rho_old. Callers retry
/// with a smaller dt.
std::pair<DensityState, NewtonStats> implicit_step(const CellComplex& mesh,
                                                   const KernelMatrix& kernel,
                                                   const DensityState& rho_old,
                                                   const StepConfig& cfg);

/// Iteration-count step controller: more than 4 Newton iterations (or a
/// failed step) halves dt, fewer than 2 grows it by 10%.
double adapt_dt(const NewtonStats& stats, double dt);

/// The residual the implicit step drives to zero, in density units:
///   R_K = rho_K - rho_old_K + (dt/|K|) sum_{L~K} F_KL[rho],
/// evaluated at an arbitrary state (diagnostics and solver verification).
Eigen::VectorXd step_residual(const CellComplex& mesh, const KernelMatrix& kernel,
                              const DensityState& rho_old, const StepConfig& cfg,
                              const Eigen::VectorXd& state);

/// The Jacobian the Newton iteration assembles at the given state (analytic
/// for the SG flux, central differences for upwind).
Eigen::MatrixXd step_jacobian(const CellComplex& mesh, const KernelMatrix& kernel,
                              const DensityState& rho_old, const StepConfig& cfg,
                              const Eigen::VectorXd& state);

/// Mesh/time-step smallness conditions. Advisory: callers warn and proceed.
struct SmallnessReport {
  bool mesh_ok = false;    // h <= kappa / Lip(W)
  bool energy_ok = false;  // 64 C F0 Lip^2/k^2 dt + 512 C^2 Lip^4/k^2 dt^2 <= 1
  bool dt_ok = false;      // dt Lip^2 / kappa <= 3/8
  double mesh_margin = 0.0;   // kappa/Lip - h
  double energy_margin = 0.0; // 1 - lhs
  double dt_margin = 0.0;     // 3/8 - dt Lip^2/kappa
  bool all_ok() const { return mesh_ok && energy_ok && dt_ok; }
};

SmallnessReport check_smallness(const CellComplex& mesh, const StepConfig& cfg, double lip,
                                double f0);

/// Advances two equal-mass states one step each and returns the l1 (volume
/// weighted) amplification ||a' - b'|| / ||a - b||; identical inputs give 0.
double stability_probe(const CellComplex& mesh, const KernelMatrix& kernel,
                       const DensityState& rho_a, const DensityState& rho_b,
                       const StepConfig& cfg);

} // namespace aggdiff
