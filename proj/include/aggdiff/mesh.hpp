#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace aggdiff {

struct invalid_mesh_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DomainKind { torus, interval };

struct Domain {
  DomainKind kind = DomainKind::torus;
  double length = 1.0;
};

/// One undirected neighbor record (a, b) with shared face area and center
/// distance. Directed quantities attached to it carry the a -> b sign.
struct Edge {
  int a = -1;
  int b = -1;
  double area = 0.0; // |K|L|, length^(d-1)
  double dist = 0.0; // d_KL > 0
  double tau() const { return area / dist; }
};

/// Adjacency entry seen from one cell: the edge record index, the neighbor
/// cell, and the sign (+1 if the cell is the edge's `a` endpoint).
struct AdjEntry {
  int edge = -1;
  int neighbor = -1;
  double sign = 1.0;
};

struct MeshQuality {
  double h = 0.0;     // max cell diameter
  double c_iso = 0.0; // max over cells of |dK| h / |K|
};

/// Finite-volume cell graph. Dimension-agnostic storage; only 1-D
/// constructors ship. Immutable after construction, safe to share across
/// threads read-only.
class CellComplex {
public:
  CellComplex() = default;
  CellComplex(Eigen::VectorXd coords, Eigen::VectorXd volumes, std::vector<Edge> edges,
              Domain domain, Eigen::VectorXd boundary_area = {}, int dimension = 1);

  int n_cells() const { return static_cast<int>(volume_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Eigen::VectorXd& coords() const { return coord_; }
  const Eigen::VectorXd& volumes() const { return volume_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<AdjEntry>& adjacency(int cell) const { return adjacency_[cell]; }
  /// Outer boundary face area per cell (zero on a torus).
  const Eigen::VectorXd& boundary_area() const { return boundary_area_; }

  const Domain& domain() const { return domain_; }
  int dimension() const { return dimension_; }
  double total_volume() const { return volume_.sum(); }

  /// Signed displacement from cell L to cell K; on a torus the minimal
  /// periodic image.
  double displacement(int k, int l) const;

private:
  void validate() const;

  Eigen::VectorXd coord_;
  Eigen::VectorXd volume_;
  Eigen::VectorXd boundary_area_;
  std::vector<Edge> edges_;
  std::vector<std::vector<AdjEntry>> adjacency_;
  Domain domain_;
  int dimension_ = 1;
};

/// Uniform periodic mesh: n_cells cells of volume length/n_cells, generators
/// at the midpoints, wrap-around edge included. For n_cells == 2 the two
/// connecting edges (left and right wrap) are kept as distinct records.
CellComplex build_torus_1d(int n_cells, double length);

/// Uniform mesh on [0, length] without the wrap edge; boundary cells carry
/// one outer face of unit area.
CellComplex build_interval_1d(int n_cells, double length);

MeshQuality mesh_quality(const CellComplex& mesh);

} // namespace aggdiff
