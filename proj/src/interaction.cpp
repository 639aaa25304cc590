#include "aggdiff/interaction.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace aggdiff {

Potential Potential::kuramoto(double sigma) {
  Potential p;
  p.kind_ = Kind::kuramoto;
  p.sigma_ = sigma;
  p.lipschitz_ = 2.0 * M_PI * std::abs(sigma);
  return p;
}

Potential Potential::gaussian(double amplitude, double variance) {
  if (!(variance > 0.0)) throw invalid_potential_error("gaussian potential: variance must be positive");
  Potential p;
  p.kind_ = Kind::gaussian;
  p.amplitude_ = amplitude;
  p.variance_ = variance;
  // |W'(x)| = (2|A||x|/v) e^{-x^2/v} peaks at x = sqrt(v/2)
  p.lipschitz_ = std::abs(amplitude) * std::sqrt(2.0 / variance) * std::exp(-0.5);
  return p;
}

Potential Potential::tabulated(Eigen::VectorXd x, Eigen::VectorXd w) {
  if (x.size() != w.size() || x.size() < 2)
    throw invalid_potential_error("tabulated potential: need at least two samples");
  for (int i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw invalid_potential_error("tabulated potential: sample abscissae must be strictly increasing");
  Potential p;
  p.kind_ = Kind::tabulated;
  p.tab_x_ = std::move(x);
  p.tab_w_ = std::move(w);
  double lip = 0.0;
  for (int i = 1; i < p.tab_x_.size(); ++i)
    lip = std::max(lip, std::abs((p.tab_w_[i] - p.tab_w_[i - 1]) / (p.tab_x_[i] - p.tab_x_[i - 1])));
  p.lipschitz_ = lip;
  // symmetry about 0, checked by sampling each node against the mirrored value
  double scale = 1.0;
  for (int i = 0; i < p.tab_w_.size(); ++i) scale = std::max(scale, std::abs(p.tab_w_[i]));
  for (int i = 0; i < p.tab_x_.size(); ++i) {
    const double mirrored = -p.tab_x_[i];
    if (mirrored < p.tab_x_[0] || mirrored > p.tab_x_[p.tab_x_.size() - 1]) continue;
    if (std::abs(p(mirrored) - p.tab_w_[i]) > 1e-9 * scale)
      throw invalid_potential_error("tabulated potential: samples are not symmetric about 0");
  }
  return p;
}

Potential Potential::tabulated_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_potential_error("tabulated potential: cannot open " + path);
  std::vector<double> xs, ws;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    double x, w;
    if (!(ss >> x)) continue; // blank line
    if (!(ss >> w))
      throw invalid_potential_error("tabulated potential: " + path + ":" + std::to_string(lineno) +
                                    ": expected `x value`");
    xs.push_back(x);
    ws.push_back(w);
  }
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<long>(xs.size()));
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<long>(ws.size()));
  return tabulated(std::move(x), std::move(w));
}

double Potential::operator()(double r) const {
  switch (kind_) {
    case Kind::kuramoto:
      return -sigma_ * std::cos(2.0 * M_PI * r);
    case Kind::gaussian:
      return -amplitude_ * std::exp(-r * r / variance_);
    case Kind::tabulated: {
      const int n = static_cast<int>(tab_x_.size());
      if (r < tab_x_[0] || r > tab_x_[n - 1])
        throw invalid_potential_error("tabulated potential: evaluation outside sample range");
      // binary search for the bracketing interval
      int lo = 0, hi = n - 1;
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (tab_x_[mid] <= r ? lo : hi) = mid;
      }
      const double t = (r - tab_x_[lo]) / (tab_x_[hi] - tab_x_[lo]);
      return tab_w_[lo] + t * (tab_w_[hi] - tab_w_[lo]);
    }
  }
  return 0.0;
}

double Potential::coverage() const {
  if (kind_ != Kind::tabulated) return std::numeric_limits<double>::infinity();
  return std::min(-tab_x_[0], tab_x_[tab_x_.size() - 1]);
}

double lipschitz_bound(const Potential& potential) { return potential.lipschitz(); }

KernelMatrix assemble_kernel(const Potential& potential, const CellComplex& mesh) {
  const int n = mesh.n_cells();
  if (potential.kind() == Potential::Kind::tabulated) {
    const double need = mesh.domain().kind == DomainKind::torus ? mesh.domain().length / 2.0
                                                                : mesh.domain().length;
    if (potential.coverage() < need)
      throw invalid_potential_error("tabulated potential does not cover the domain");
  }
  KernelMatrix kernel;
  kernel.mesh = &mesh;
  kernel.w.resize(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j <= k; ++j) {
      const double v = potential(mesh.displacement(k, j));
      kernel.w(k, j) = v;
      kernel.w(j, k) = v; // mirrored, symmetry exact
    }
  }
  return kernel;
}

Eigen::VectorXd convolution_field(const KernelMatrix& kernel, const CellComplex& mesh,
                                  const Eigen::VectorXd& rho) {
  if (kernel.w.rows() != mesh.n_cells() || rho.size() != mesh.n_cells())
    throw std::invalid_argument("convolution_field: dimension mismatch");
  return kernel.w * mesh.volumes().cwiseProduct(rho).eval();
}

EdgeField drift(const KernelMatrix& kernel, const CellComplex& mesh, const DensityState& rho_half) {
  const Eigen::VectorXd u = convolution_field(kernel, mesh, rho_half.rho);
  EdgeField q;
  q.values.resize(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    q.values[e] = (u[edge.a] - u[edge.b]) / edge.dist;
  }
  return q;
}

} // namespace aggdiff
