#pragma once

#include <Eigen/Dense>

#include "aggdiff/interaction.hpp"
#include "aggdiff/mesh.hpp"

namespace aggdiff {

/// Diagnostics for one state (or one accepted step when old/new pairs are
/// available). free_energy = kappa * entropy + interaction exactly as summed.
struct EnergyReport {
  double free_energy = 0.0;
  double entropy = 0.0;
  double interaction = 0.0;
  double dissipation = 0.0;
  double rel_entropy_step = 0.0;
  double fed_residual = 0.0;
  double mass = 0.0;
  double min_density = 0.0;
  double fisher = 0.0;
};

/// Discrete entropy S^h = sum_K |K| rho_K log rho_K with 0 log 0 = 0.
template <typename Derived>
double discrete_entropy(const CellComplex& mesh, const Eigen::MatrixBase<Derived>& rho) {
  double s = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double r = rho[k];
    if (r > 0.0) s += mesh.volumes()[k] * r * std::log(r);
  }
  return s;
}

/// Pairwise interaction energy E^h = 1/2 sum_{K,L} |K||L| w_KL rho_K rho_L.
template <typename Derived>
double interaction_energy(const CellComplex& mesh, const KernelMatrix& kernel,
                          const Eigen::MatrixBase<Derived>& rho) {
  const Eigen::VectorXd m = mesh.volumes().cwiseProduct(rho);
  return 0.5 * m.dot(kernel.w * m);
}

struct FreeEnergyParts {
  double free_energy;
  double entropy;
  double interaction;
};

/// F^h = kappa S^h + E^h. Cells with rho_K = 0 contribute nothing to S^h.
FreeEnergyParts free_energy(const CellComplex& mesh, const KernelMatrix& kernel,
                            const DensityState& rho, double kappa);

/// Relative entropy H(rho | rho_ref) = sum_K |K| rho_K log(rho_K / rho_ref_K),
/// nonnegative for equal-mass states. Requires rho_ref > 0 wherever rho > 0.
double relative_entropy(const CellComplex& mesh, const DensityState& rho,
                        const DensityState& rho_ref);

/// Dissipation functional: the sum over edges of kappa tau_KL
/// alpha_kappa(rho_K, rho_L; d_KL q_KL). Each undirected edge enters once;
/// alpha is invariant under (a,b,v) -> (b,a,-v), so the directed double sum
/// would be exactly twice this value, and it is this single-count sum that
/// balances the free-energy dissipation identity. Requires rho > 0.
double dissipation(const CellComplex& mesh, const DensityState& rho, const EdgeField& q,
                   double kappa);

/// Residual of the per-step dissipation identity,
///   (F^h(new) - F^h(old))/dt + kappa H(old|new)/dt + D^h(new),
/// with the drift rebuilt from the semi-implicit average (new + old)/2
/// independently of whatever the stepper cached. Zero up to solver error.
double fed_residual(const CellComplex& mesh, const KernelMatrix& kernel, const DensityState& rho_old,
                    const DensityState& rho_new, double dt, double kappa);

/// Discrete Fisher-information diagnostic
///   sum_K sum_{L~K} (|K|L|/d_KL) (sqrt(rho_K) - sqrt(rho_L))^2
/// (directed double sum; each undirected edge counted twice).
double fisher_diagnostic(const CellComplex& mesh, const DensityState& rho);

/// Full per-step report used for time-series rows; for the initial state call
/// with rho_old == rho_new and dt <= 0, which zeroes the step-coupled fields
/// and evaluates the dissipation with the steady drift q[rho].
EnergyReport step_report(const CellComplex& mesh, const KernelMatrix& kernel,
                         const DensityState& rho_old, const DensityState& rho_new, double dt,
                         double kappa);

} // namespace aggdiff
