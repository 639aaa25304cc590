#include "aggdiff/stationary.hpp"

#include <cmath>
#include <stdexcept>

#include "aggdiff/energy.hpp"
#include "aggdiff/stepper.hpp"

namespace aggdiff {

DensityState km_map(const CellComplex& mesh, const KernelMatrix& kernel, const DensityState& rho,
                    double kappa, double* z_h) {
  if (rho.rho.size() != mesh.n_cells()) throw std::invalid_argument("km_map: dimension mismatch");
  const Eigen::VectorXd exponent = -convolution_field(kernel, mesh, rho.rho) / kappa;
  const double shift = exponent.maxCoeff();
  const Eigen::VectorXd boltzmann = (exponent.array() - shift).exp();
  const double z_shifted = mesh.volumes().dot(boltzmann);
  if (z_h) *z_h = std::exp(shift + std::log(z_shifted));
  return DensityState{boltzmann / z_shifted, rho.time};
}

FixedPointResult solve_stationary(const CellComplex& mesh, const KernelMatrix& kernel, double kappa,
                                  const DensityState& init, double tol, int max_iter) {
  FixedPointResult result;
  Eigen::VectorXd rho = init.rho;
  double omega = 1.0;
  double best_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best = rho, best_mapped = rho;

  for (int it = 0; it < max_iter; ++it) {
    double z = 0.0;
    const DensityState mapped = km_map(mesh, kernel, DensityState{rho, 0.0}, kappa, &z);
    const double residual = (rho - mapped.rho).lpNorm<Eigen::Infinity>();
    result.iterations = it;
    result.residual = residual;
    result.z_h = z;
    if (residual <= tol) {
      result.state = DensityState{rho, init.time};
      result.converged = true;
      return result;
    }
    if (residual < best_residual) {
      best_residual = residual;
      best = rho;
      best_mapped = mapped.rho;
    } else if (omega > 1.0 / 16.0) {
      // residual grew: halve the damping and move again from the best iterate
      omega *= 0.5;
      rho = (1.0 - omega) * best + omega * best_mapped;
      continue;
    }
    rho = (1.0 - omega) * rho + omega * mapped.rho;
  }
  result.state = DensityState{best, init.time};
  result.residual = best_residual;
  return result;
}

StationarityDefect stationarity_defect(const CellComplex& mesh, const KernelMatrix& kernel,
                                       const DensityState& rho, double kappa) {
  if ((rho.rho.array() <= 0.0).any())
    throw std::domain_error("stationarity_defect: density must be positive");
  const EdgeField q = drift(kernel, mesh, rho);
  const EdgeField f = sg_flux(mesh, rho, q, kappa);
  StationarityDefect defect;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    double div = 0.0;
    for (const AdjEntry& adj : mesh.adjacency(k)) div += adj.sign * f.values[adj.edge];
    defect.flux_balance = std::max(defect.flux_balance, std::abs(div));
  }
  defect.dissipation = dissipation(mesh, rho, q, kappa);
  return defect;
}

} // namespace aggdiff
