#include "aggdiff/stepper.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aggdiff/kernels.hpp"
#include "aggdiff/mesh.hpp"

namespace aggdiff {

namespace {

double clamped_log_ratio(double a, double b) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::log(std::max(a, eps)) - std::log(std::max(b, eps));
}

// Residual in density units, R_K = rho_K - rho_old_K + (dt/|K|) sum_L F_KL,
// with the drift from the semi-implicit mean. theta is evaluated through the
// raw two-Bernoulli form so that transient negative Newton iterates remain
// evaluable; the converged solution is positive.
class StepResidual {
public:
  StepResidual(const CellComplex& mesh, const KernelMatrix& kernel, const DensityState& rho_old,
               const StepConfig& cfg)
      : mesh_(mesh), kernel_(kernel), rho_old_(rho_old.rho), cfg_(cfg) {}

  Eigen::VectorXd operator()(const Eigen::VectorXd& rho, double* scale = nullptr) const {
    const Eigen::VectorXd u = field(rho);
    return assemble(rho, u, scale);
  }

  Eigen::VectorXd field(const Eigen::VectorXd& rho) const {
    return kernel_.w * mesh_.volumes().cwiseProduct(0.5 * (rho + rho_old_)).eval();
  }

  // Residual, plus (optionally) the magnitude the assembly is rounded at:
  // max_K of |rho_K| + |rho_old_K| + (dt/|K|) sum_L |tau| (|B(-v) a| + |B(v) b|).
  // Residual norms below eps times this scale are arithmetic noise.
  Eigen::VectorXd assemble(const Eigen::VectorXd& rho, const Eigen::VectorXd& u,
                           double* scale = nullptr) const {
    const int n = mesh_.n_cells();
    Eigen::VectorXd flux(mesh_.n_edges()), magnitude(mesh_.n_edges());
    for (int e = 0; e < mesh_.n_edges(); ++e) {
      const Edge& edge = mesh_.edges()[e];
      const double v = u[edge.a] - u[edge.b]; // = d_KL q_KL
      if (cfg_.flux_kind == FluxKind::scharfetter_gummel) {
        const double ja = bernoulli(cfg_.kappa, -v) * rho[edge.a];
        const double jb = bernoulli(cfg_.kappa, v) * rho[edge.b];
        flux[e] = edge.tau() * (ja - jb);
        magnitude[e] = edge.tau() * (std::abs(ja) + std::abs(jb));
      } else {
        const double q = cfg_.kappa * clamped_log_ratio(rho[edge.a], rho[edge.b]) + v;
        const double ja = rho[edge.a] * std::max(q, 0.0);
        const double jb = rho[edge.b] * std::max(-q, 0.0);
        flux[e] = edge.tau() * (ja - jb);
        magnitude[e] = edge.tau() * (std::abs(ja) + std::abs(jb));
      }
    }
    Eigen::VectorXd r = rho - rho_old_;
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      double div = 0.0, mag = 0.0;
      for (const AdjEntry& adj : mesh_.adjacency(k)) {
        div += adj.sign * flux[adj.edge];
        mag += magnitude[adj.edge];
      }
      const double weight = cfg_.dt / mesh_.volumes()[k];
      r[k] += weight * div;
      if (scale)
        worst = std::max(worst, std::abs(rho[k]) + std::abs(rho_old_[k]) + weight * mag);
    }
    if (scale) *scale = worst;
    return r;
  }

  // Analytic Jacobian of the SG residual. Per edge e = (K, L) with
  // v = u_K - u_L:
  //   dF_e/drho_M = tau ( B(-v) d_KM - B(v) d_LM
  //                       + theta_v * |M| (w_KM - w_LM) / 2 ),
  // the last term from the semi-implicit mean inside the drift.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& rho, const Eigen::VectorXd& u) const {
    const int n = mesh_.n_cells();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    Eigen::RowVectorXd coupling(n);
    for (int e = 0; e < mesh_.n_edges(); ++e) {
      const Edge& edge = mesh_.edges()[e];
      const int ka = edge.a, kb = edge.b;
      const double v = u[ka] - u[kb];
      const double tau = edge.tau();
      const double da = bernoulli(cfg_.kappa, -v);
      const double db = -bernoulli(cfg_.kappa, v);
      const double dv = theta_dv(cfg_.kappa, rho[ka], rho[kb], v);
      coupling = 0.5 * tau * dv *
                 (kernel_.w.row(ka) - kernel_.w.row(kb)).cwiseProduct(mesh_.volumes().transpose());
      const double wa = cfg_.dt / mesh_.volumes()[ka];
      const double wb = cfg_.dt / mesh_.volumes()[kb];
      jac.row(ka) += wa * coupling;
      jac.row(kb) -= wb * coupling;
      jac(ka, ka) += wa * tau * da;
      jac(ka, kb) += wa * tau * db;
      jac(kb, ka) -= wb * tau * da;
      jac(kb, kb) -= wb * tau * db;
    }
    return jac;
  }

  // Central-difference Jacobian for the piecewise-smooth upwind residual.
  // Only the convolution field depends linearly on the perturbed entry, so it
  // is updated incrementally instead of recomputed.
  Eigen::MatrixXd fd_jacobian(const Eigen::VectorXd& rho) const {
    const int n = mesh_.n_cells();
    const Eigen::VectorXd u0 = field(rho);
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd pert = rho;
    for (int m = 0; m < n; ++m) {
      const double eps = 1e-7 * std::max(1.0, std::abs(rho[m]));
      const Eigen::VectorXd du = 0.5 * eps * mesh_.volumes()[m] * kernel_.w.col(m);
      pert[m] = rho[m] + eps;
      const Eigen::VectorXd rp = assemble(pert, u0 + du);
      pert[m] = rho[m] - eps;
      const Eigen::VectorXd rm = assemble(pert, u0 - du);
      pert[m] = rho[m];
      jac.col(m) = (rp - rm) / (2.0 * eps);
    }
    return jac;
  }

private:
  const CellComplex& mesh_;
  const KernelMatrix& kernel_;
  const Eigen::VectorXd& rho_old_;
  const StepConfig& cfg_;
};

} // namespace

EdgeField sg_flux(const CellComplex& mesh, const DensityState& rho_new, const EdgeField& q,
                  double kappa) {
  if (q.values.size() != mesh.n_edges() || rho_new.rho.size() != mesh.n_cells())
    throw std::invalid_argument("sg_flux: dimension mismatch");
  if ((rho_new.rho.array() < 0.0).any())
    throw std::domain_error("sg_flux: negative density");
  EdgeField f;
  f.values.resize(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    f.values[e] =
        edge.tau() * theta(kappa, rho_new.rho[edge.a], rho_new.rho[edge.b], edge.dist * q.values[e]);
  }
  return f;
}

EdgeField upwind_flux(const CellComplex& mesh, const DensityState& rho_new, const EdgeField& q,
                      double kappa) {
  if (q.values.size() != mesh.n_edges() || rho_new.rho.size() != mesh.n_cells())
    throw std::invalid_argument("upwind_flux: dimension mismatch");
  EdgeField f;
  f.values.resize(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    const double a = rho_new.rho[edge.a];
    const double b = rho_new.rho[edge.b];
    const double big_q = kappa * clamped_log_ratio(a, b) + edge.dist * q.values[e];
    f.values[e] = edge.tau() * (a * std::max(big_q, 0.0) - b * std::max(-big_q, 0.0));
  }
  return f;
}

std::pair<DensityState, NewtonStats> implicit_step(const CellComplex& mesh,
                                                   const KernelMatrix& kernel,
                                                   const DensityState& rho_old,
                                                   const StepConfig& cfg) {
  if (rho_old.rho.size() != mesh.n_cells())
    throw std::invalid_argument("implicit_step: state does not match the mesh");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("implicit_step: dt must be positive");

  const StepResidual residual(mesh, kernel, rho_old, cfg);
  const double tol = cfg.newton_tol * std::max(1.0, rho_old.rho.lpNorm<Eigen::Infinity>());
  constexpr double eps = std::numeric_limits<double>::epsilon();

  NewtonStats stats;
  Eigen::VectorXd rho = rho_old.rho;
  double res_scale = 0.0;
  Eigen::VectorXd res = residual(rho, &res_scale);
  double res_norm = res.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(res_norm)) return {rho_old, stats};
  stats.final_residual_norm = res_norm;

  while (res_norm > tol) {
    // a tolerance below the rounding level of the assembly is met once the
    // residual reaches that level and the updates stop moving it
    const double floor = 4.0 * eps * res_scale;
    if (stats.iterations >= cfg.newton_max_iter) {
      if (res_norm <= floor) break;
      return {rho_old, stats};
    }
    ++stats.iterations;

    Eigen::MatrixXd jac;
    if (cfg.flux_kind == FluxKind::scharfetter_gummel) {
      jac = residual.jacobian(rho, residual.field(rho));
    } else {
      jac = residual.fd_jacobian(rho);
    }
    const Eigen::VectorXd delta = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-res);
    if (!delta.allFinite()) return {rho_old, stats};

    // Halve the update until the residual decreases; negative iterates are
    // handled here rather than by projection, which would break mass.
    double lambda = 1.0;
    bool improved = false;
    for (int cut = 0; cut <= 8; ++cut) {
      const Eigen::VectorXd trial = rho + lambda * delta;
      double trial_scale = 0.0;
      const Eigen::VectorXd trial_res = residual(trial, &trial_scale);
      const double trial_norm = trial_res.lpNorm<Eigen::Infinity>();
      if (std::isfinite(trial_norm) && trial_norm < res_norm) {
        rho = trial;
        res = trial_res;
        res_norm = trial_norm;
        res_scale = trial_scale;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      stats.final_residual_norm = res_norm;
      if (res_norm <= floor) break;
      return {rho_old, stats};
    }
    const double prev_norm = stats.residual_history.empty()
                                 ? stats.final_residual_norm
                                 : stats.residual_history.back();
    stats.residual_history.push_back(res_norm);
    stats.final_residual_norm = res_norm;
    if (res_norm > 0.9 * prev_norm && res_norm <= floor) break; // stalled in the noise band
  }

  if ((rho.array() <= 0.0).any()) return {rho_old, stats}; // safeguard failed
  stats.converged = true;
  return {DensityState{std::move(rho), rho_old.time + cfg.dt}, stats};
}

double adapt_dt(const NewtonStats& stats, double dt) {
  if (!stats.converged || stats.iterations > 4) return dt / 2.0;
  if (stats.iterations < 2) return 1.1 * dt;
  return dt;
}

Eigen::VectorXd step_residual(const CellComplex& mesh, const KernelMatrix& kernel,
                              const DensityState& rho_old, const StepConfig& cfg,
                              const Eigen::VectorXd& state) {
  return StepResidual(mesh, kernel, rho_old, cfg)(state);
}

Eigen::MatrixXd step_jacobian(const CellComplex& mesh, const KernelMatrix& kernel,
                              const DensityState& rho_old, const StepConfig& cfg,
                              const Eigen::VectorXd& state) {
  const StepResidual residual(mesh, kernel, rho_old, cfg);
  if (cfg.flux_kind == FluxKind::scharfetter_gummel)
    return residual.jacobian(state, residual.field(state));
  return residual.fd_jacobian(state);
}

SmallnessReport check_smallness(const CellComplex& mesh, const StepConfig& cfg, double lip,
                                double f0) {
  const MeshQuality q = mesh_quality(mesh);
  const double kappa = cfg.kappa;
  const double dt = cfg.dt;
  SmallnessReport rep;
  const double h_bound = lip > 0.0 ? kappa / lip : std::numeric_limits<double>::infinity();
  rep.mesh_margin = h_bound - q.h;
  rep.mesh_ok = q.h <= h_bound;
  const double lhs = 64.0 * q.c_iso * lip * lip * f0 / (kappa * kappa) * dt +
                     512.0 * q.c_iso * q.c_iso * std::pow(lip, 4) / (kappa * kappa) * dt * dt;
  rep.energy_margin = 1.0 - lhs;
  rep.energy_ok = lhs <= 1.0;
  const double dt_lhs = dt * lip * lip / kappa;
  rep.dt_margin = 3.0 / 8.0 - dt_lhs;
  rep.dt_ok = dt_lhs <= 3.0 / 8.0;
  return rep;
}

double stability_probe(const CellComplex& mesh, const KernelMatrix& kernel,
                       const DensityState& rho_a, const DensityState& rho_b,
                       const StepConfig& cfg) {
  const Eigen::VectorXd diff = (rho_a.rho - rho_b.rho).cwiseAbs();
  const double denom = mesh.volumes().dot(diff);
  auto [a_new, stats_a] = implicit_step(mesh, kernel, rho_a, cfg);
  auto [b_new, stats_b] = implicit_step(mesh, kernel, rho_b, cfg);
  if (!stats_a.converged || !stats_b.converged)
    throw std::runtime_error("stability_probe: step failed");
  if (denom == 0.0) return 0.0;
  const double numer = mesh.volumes().dot((a_new.rho - b_new.rho).cwiseAbs().eval());
  return numer / denom;
}

} // namespace aggdiff
