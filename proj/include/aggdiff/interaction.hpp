#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "aggdiff/mesh.hpp"

namespace aggdiff {

struct invalid_potential_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric interaction potential W with a computed Lipschitz bound.
/// Kuramoto: W(x) = -sigma cos(2 pi x).
/// Gaussian: W(x) = -amplitude exp(-x^2 / variance).
/// Tabulated potentials are evaluated by linear interpolation between
/// strictly increasing samples and must be symmetric about 0.
class Potential {
public:
  enum class Kind { kuramoto, gaussian, tabulated };

  static Potential kuramoto(double sigma);
  static Potential gaussian(double amplitude, double variance);
  static Potential tabulated(Eigen::VectorXd x, Eigen::VectorXd w);
  /// Two-column text, `x value` per line, strictly increasing x.
  static Potential tabulated_from_file(const std::string& path);

  Kind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  double operator()(double r) const;
  /// Lower end of the tabulated range; +inf extent for analytic kinds.
  double coverage() const;

  double sigma() const { return sigma_; }
  double amplitude() const { return amplitude_; }
  double variance() const { return variance_; }

private:
  Potential() = default;

  Kind kind_ = Kind::kuramoto;
  double sigma_ = 0.0;
  double amplitude_ = 0.0;
  double variance_ = 1.0;
  Eigen::VectorXd tab_x_, tab_w_;
  double lipschitz_ = 0.0;
};

double lipschitz_bound(const Potential& potential);

/// Probability density on the cells of a mesh, nonnegative and
/// |K|-weighted mass normalized.
struct DensityState {
  Eigen::VectorXd rho;
  double time = 0.0;
};

/// Precomputed pairwise values w[K][J] = W(x_K - x_J); symmetric, built from
/// the minimal periodic image on a torus. Immutable after assembly.
struct KernelMatrix {
  Eigen::MatrixXd w;
  const CellComplex* mesh = nullptr;
};

/// One scalar per undirected edge record, read with the sign of the
/// direction: value(e, a->b) = values[e], value(e, b->a) = -values[e].
/// Antisymmetry is exact because each edge is stored once.
struct EdgeField {
  Eigen::VectorXd values;

  double directed(const AdjEntry& adj) const { return adj.sign * values[adj.edge]; }
};

KernelMatrix assemble_kernel(const Potential& potential, const CellComplex& mesh);

/// Semi-implicit edge drift
///   q_KL = sum_J |J| rho_J (w[K][J] - w[L][J]) / d_KL,
/// evaluated as two steps: the potential field u = w (|.| rho), then the edge
/// difference (u_K - u_L)/d_KL, which makes antisymmetry structural. The
/// caller supplies the time average (rho^{n+1} + rho^n)/2 where required.
EdgeField drift(const KernelMatrix& kernel, const CellComplex& mesh, const DensityState& rho_half);

/// The potential field u_K = sum_J |J| rho_J w[K][J] on its own; drift edges
/// are differences of it.
Eigen::VectorXd convolution_field(const KernelMatrix& kernel, const CellComplex& mesh,
                                  const Eigen::VectorXd& rho);

} // namespace aggdiff
