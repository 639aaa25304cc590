#pragma once

#include <Eigen/Dense>

#include "aggdiff/interaction.hpp"
#include "aggdiff/mesh.hpp"

namespace aggdiff {

struct FixedPointResult {
  DensityState state;
  int iterations = 0;
  double residual = 0.0; // sup norm of rho - Phi[rho]
  bool converged = false;
  // Normalization of the final map evaluation. Overflows to +inf when the
  // Boltzmann exponents exceed the double range (tiny kappa); the map output
  // itself is unaffected because the max shift cancels in the quotient.
  double z_h = 0.0;
};

/// Normalized Boltzmann map
///   Phi_K[rho] = exp(-kappa^{-1} (W*rho)_K) / Z^h(rho),
///   Z^h(rho) = sum_K |K| exp(-kappa^{-1} (W*rho)_K),
/// whose fixed points are exactly the stationary states of the scheme. The
/// exponent is max-shifted before exponentiation; the shift cancels in the
/// quotient. Output is a strictly positive probability distribution.
DensityState km_map(const CellComplex& mesh, const KernelMatrix& kernel, const DensityState& rho,
                    double kappa, double* z_h = nullptr);

/// Damped Picard iteration rho <- (1-omega) rho + omega Phi[rho], omega
/// starting at 1 and halved (down to 1/16) whenever the fixed-point residual
/// increases. Non-convergence returns the best iterate with converged=false.
FixedPointResult solve_stationary(const CellComplex& mesh, const KernelMatrix& kernel, double kappa,
                                  const DensityState& init, double tol, int max_iter);

struct StationarityDefect {
  double flux_balance = 0.0; // max_K |sum_L F_KL|
  double dissipation = 0.0;  // D^h
};

/// Steady-state defects with the drift built from rho itself. Both vanish
/// exactly at stationary states.
StationarityDefect stationarity_defect(const CellComplex& mesh, const KernelMatrix& kernel,
                                       const DensityState& rho, double kappa);

} // namespace aggdiff
