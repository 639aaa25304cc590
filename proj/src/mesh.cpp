#include "aggdiff/mesh.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace aggdiff {

CellComplex::CellComplex(Eigen::VectorXd coords, Eigen::VectorXd volumes, std::vector<Edge> edges,
                         Domain domain, Eigen::VectorXd boundary_area, int dimension)
    : coord_(std::move(coords)),
      volume_(std::move(volumes)),
      boundary_area_(std::move(boundary_area)),
      edges_(std::move(edges)),
      domain_(domain),
      dimension_(dimension) {
  if (boundary_area_.size() == 0) boundary_area_ = Eigen::VectorXd::Zero(volume_.size());
  validate();
  adjacency_.assign(n_cells(), {});
  for (int e = 0; e < n_edges(); ++e) {
    adjacency_[edges_[e].a].push_back({e, edges_[e].b, +1.0});
    adjacency_[edges_[e].b].push_back({e, edges_[e].a, -1.0});
  }
}

void CellComplex::validate() const {
  const int n = n_cells();
  if (n < 2) throw invalid_mesh_error("mesh must have at least 2 cells");
  if (coord_.size() != n || boundary_area_.size() != n)
    throw invalid_mesh_error("mesh arrays have inconsistent sizes");
  if (!(domain_.length > 0.0)) throw invalid_mesh_error("domain length must be positive");
  for (int k = 0; k < n; ++k) {
    if (!(volume_[k] > 0.0)) throw invalid_mesh_error("cell volume must be positive");
  }
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l)
      if (coord_[k] == coord_[l]) throw invalid_mesh_error("cell generators must be pairwise distinct");
  for (const Edge& e : edges_) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.a == e.b)
      throw invalid_mesh_error("edge endpoints out of range");
    if (!(e.dist > 0.0)) throw invalid_mesh_error("edge center distance must be positive");
    if (!(e.area > 0.0)) throw invalid_mesh_error("edge area must be positive");
    if (!std::isfinite(e.tau())) throw invalid_mesh_error("transmission coefficient must be finite");
  }
}

double CellComplex::displacement(int k, int l) const {
  double d = coord_[k] - coord_[l];
  if (domain_.kind == DomainKind::torus) {
    const double L = domain_.length;
    d -= L * std::round(d / L);
  }
  return d;
}

CellComplex build_torus_1d(int n_cells, double length) {
  if (n_cells < 2) throw invalid_mesh_error("build_torus_1d: n_cells must be >= 2");
  if (!(length > 0.0)) throw invalid_mesh_error("build_torus_1d: length must be positive");
  const double h = length / n_cells;
  Eigen::VectorXd x(n_cells), vol(n_cells);
  for (int k = 0; k < n_cells; ++k) {
    x[k] = (k + 0.5) * h;
    vol[k] = h;
  }
  std::vector<Edge> edges;
  edges.reserve(n_cells);
  for (int k = 0; k < n_cells; ++k) edges.push_back({k, (k + 1) % n_cells, 1.0, h});
  return CellComplex(std::move(x), std::move(vol), std::move(edges),
                     {DomainKind::torus, length});
}

CellComplex build_interval_1d(int n_cells, double length) {
  if (n_cells < 2) throw invalid_mesh_error("build_interval_1d: n_cells must be >= 2");
  if (!(length > 0.0)) throw invalid_mesh_error("build_interval_1d: length must be positive");
  const double h = length / n_cells;
  Eigen::VectorXd x(n_cells), vol(n_cells);
  for (int k = 0; k < n_cells; ++k) {
    x[k] = (k + 0.5) * h;
    vol[k] = h;
  }
  std::vector<Edge> edges;
  edges.reserve(n_cells - 1);
  for (int k = 0; k + 1 < n_cells; ++k) edges.push_back({k, k + 1, 1.0, h});
  Eigen::VectorXd bnd = Eigen::VectorXd::Zero(n_cells);
  bnd[0] = 1.0;
  bnd[n_cells - 1] = 1.0;
  return CellComplex(std::move(x), std::move(vol), std::move(edges),
                     {DomainKind::interval, length}, std::move(bnd));
}

MeshQuality mesh_quality(const CellComplex& mesh) {
  // 1-D: the cell diameter is the cell length, i.e. its volume.
  MeshQuality q;
  q.h = mesh.volumes().maxCoeff();
  for (int k = 0; k < mesh.n_cells(); ++k) {
    double surface = mesh.boundary_area()[k];
    for (const AdjEntry& adj : mesh.adjacency(k)) surface += mesh.edges()[adj.edge].area;
    q.c_iso = std::max(q.c_iso, surface * q.h / mesh.volumes()[k]);
  }
  return q;
}

} // namespace aggdiff
