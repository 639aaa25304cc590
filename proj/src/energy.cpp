#include "aggdiff/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "aggdiff/kernels.hpp"

namespace aggdiff {

FreeEnergyParts free_energy(const CellComplex& mesh, const KernelMatrix& kernel,
                            const DensityState& rho, double kappa) {
  FreeEnergyParts parts{};
  parts.entropy = discrete_entropy(mesh, rho.rho);
  parts.interaction = interaction_energy(mesh, kernel, rho.rho);
  parts.free_energy = kappa * parts.entropy + parts.interaction;
  return parts;
}

double relative_entropy(const CellComplex& mesh, const DensityState& rho,
                        const DensityState& rho_ref) {
  if (rho.rho.size() != rho_ref.rho.size() || rho.rho.size() != mesh.n_cells())
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  double h = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double r = rho.rho[k];
    if (r <= 0.0) continue;
    const double ref = rho_ref.rho[k];
    if (!(ref > 0.0)) throw std::domain_error("relative_entropy: reference vanishes on the support");
    h += mesh.volumes()[k] * r * std::log(r / ref);
  }
  return h;
}

double dissipation(const CellComplex& mesh, const DensityState& rho, const EdgeField& q,
                   double kappa) {
  if (q.values.size() != mesh.n_edges())
    throw std::invalid_argument("dissipation: edge field does not match the mesh");
  double d = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    const double a = rho.rho[edge.a];
    const double b = rho.rho[edge.b];
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("dissipation: density must be positive");
    d += kappa * edge.tau() * alpha(kappa, a, b, edge.dist * q.values[e]);
  }
  return d;
}

double fed_residual(const CellComplex& mesh, const KernelMatrix& kernel, const DensityState& rho_old,
                    const DensityState& rho_new, double dt, double kappa) {
  DensityState mid{0.5 * (rho_old.rho + rho_new.rho), rho_old.time};
  const EdgeField q = drift(kernel, mesh, mid);
  const double f_new = free_energy(mesh, kernel, rho_new, kappa).free_energy;
  const double f_old = free_energy(mesh, kernel, rho_old, kappa).free_energy;
  const double h = relative_entropy(mesh, rho_old, rho_new);
  return (f_new - f_old) / dt + kappa * h / dt + dissipation(mesh, rho_new, q, kappa);
}

double fisher_diagnostic(const CellComplex& mesh, const DensityState& rho) {
  double f = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    const double d = std::sqrt(std::max(rho.rho[edge.a], 0.0)) -
                     std::sqrt(std::max(rho.rho[edge.b], 0.0));
    f += 2.0 * edge.tau() * d * d;
  }
  return f;
}

EnergyReport step_report(const CellComplex& mesh, const KernelMatrix& kernel,
                         const DensityState& rho_old, const DensityState& rho_new, double dt,
                         double kappa) {
  EnergyReport rep{};
  const FreeEnergyParts parts = free_energy(mesh, kernel, rho_new, kappa);
  rep.free_energy = parts.free_energy;
  rep.entropy = parts.entropy;
  rep.interaction = parts.interaction;
  rep.mass = mesh.volumes().dot(rho_new.rho);
  rep.min_density = rho_new.rho.minCoeff();
  rep.fisher = fisher_diagnostic(mesh, rho_new);
  if (dt > 0.0) {
    DensityState mid{0.5 * (rho_old.rho + rho_new.rho), rho_old.time};
    const EdgeField q = drift(kernel, mesh, mid);
    rep.dissipation = dissipation(mesh, rho_new, q, kappa);
    rep.rel_entropy_step = relative_entropy(mesh, rho_old, rho_new);
    const double f_old = free_energy(mesh, kernel, rho_old, kappa).free_energy;
    rep.fed_residual =
        (rep.free_energy - f_old) / dt + kappa * rep.rel_entropy_step / dt + rep.dissipation;
  } else {
    const EdgeField q = drift(kernel, mesh, rho_new);
    rep.dissipation = rho_new.rho.minCoeff() > 0.0 ? dissipation(mesh, rho_new, q, kappa) : 0.0;
  }
  return rep;
}

} // namespace aggdiff
