#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "aggdiff/mesh.hpp"

using namespace aggdiff;

TEST_CASE("uniform torus construction") {
  const CellComplex mesh = build_torus_1d(4, 1.0);
  REQUIRE(mesh.n_cells() == 4);
  REQUIRE(mesh.n_edges() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(mesh.volumes()[k] == 0.25);
    CHECK(mesh.coords()[k] == doctest::Approx((k + 0.5) * 0.25));
    CHECK(mesh.adjacency(k).size() == 2);
  }
  std::set<std::pair<int, int>> pairs;
  for (const Edge& e : mesh.edges()) {
    pairs.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
    CHECK(e.dist == 0.25);
    CHECK(e.area == 1.0);
    CHECK(e.tau() == 4.0);
  }
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

TEST_CASE("torus at the figure resolution") {
  const CellComplex mesh = build_torus_1d(1 << 6, 1.0);
  CHECK(mesh.n_cells() == 64);
  CHECK(mesh_quality(mesh).h == doctest::Approx(1.0 / 64).epsilon(1e-15));
}

TEST_CASE("two-cell torus keeps the parallel wrap edges distinct") {
  const CellComplex mesh = build_torus_1d(2, 1.0);
  REQUIRE(mesh.n_edges() == 2);
  for (const Edge& e : mesh.edges()) CHECK(std::set<int>{e.a, e.b} == std::set<int>{0, 1});
  CHECK(mesh.adjacency(0).size() == 2);
  CHECK(mesh.adjacency(1).size() == 2);
  // merging them would silently double the transmission between the two cells
  CHECK(mesh.edges()[0].tau() + mesh.edges()[1].tau() == 4.0);
}

TEST_CASE("interval construction") {
  const CellComplex m3 = build_interval_1d(3, 1.0);
  REQUIRE(m3.n_edges() == 2);
  CHECK(m3.edges()[0].a == 0);
  CHECK(m3.edges()[0].b == 1);
  CHECK(m3.edges()[1].a == 1);
  CHECK(m3.edges()[1].b == 2);
  CHECK(m3.adjacency(0).size() == 1);
  CHECK(m3.adjacency(1).size() == 2);

  const CellComplex m2 = build_interval_1d(2, 0.5);
  REQUIRE(m2.n_edges() == 1);
  CHECK(m2.edges()[0].dist == 0.25);
  CHECK(m2.edges()[0].tau() == 4.0);

  const CellComplex m8 = build_interval_1d(8, 1.0);
  CHECK(m8.total_volume() == 1.0);
}

TEST_CASE("mesh partitions the domain") {
  for (int n : {2, 3, 7, 64, 1000}) {
    CHECK(std::abs(build_torus_1d(n, 1.0).total_volume() - 1.0) <= 1e-14);
    CHECK(std::abs(build_interval_1d(n, 2.5).total_volume() - 2.5) <= 1e-14 * 2.5);
  }
}

TEST_CASE("invalid meshes are rejected") {
  CHECK_THROWS_AS(build_torus_1d(1, 1.0), invalid_mesh_error);
  CHECK_THROWS_AS(build_interval_1d(0, 1.0), invalid_mesh_error);
  CHECK_THROWS_AS(build_torus_1d(4, -1.0), invalid_mesh_error);
}

TEST_CASE("mesh quality") {
  const MeshQuality torus = mesh_quality(build_torus_1d(64, 1.0));
  CHECK(torus.h == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK(torus.c_iso == doctest::Approx(2.0).epsilon(1e-14));

  // boundary faces are counted on intervals
  const MeshQuality interval = mesh_quality(build_interval_1d(4, 1.0));
  CHECK(interval.h == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(interval.c_iso == doctest::Approx(2.0).epsilon(1e-14));

  // nonuniform two-cell interval, volumes {0.1, 0.9}: the small cell dominates
  Eigen::VectorXd x(2), vol(2), bnd(2);
  x << 0.05, 0.55;
  vol << 0.1, 0.9;
  bnd << 1.0, 1.0;
  const CellComplex mesh(x, vol, {{0, 1, 1.0, 0.5}}, {DomainKind::interval, 1.0}, bnd);
  const MeshQuality q = mesh_quality(mesh);
  CHECK(q.h == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(q.c_iso == doctest::Approx(2.0 * 0.9 / 0.1).epsilon(1e-13));
}

TEST_CASE("directed traversal visits each undirected edge exactly twice") {
  for (const CellComplex& mesh : {build_torus_1d(9, 1.0), build_interval_1d(6, 2.0)}) {
    std::vector<int> visits(mesh.n_edges(), 0);
    double signed_sum = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
      for (const AdjEntry& adj : mesh.adjacency(k)) {
        ++visits[adj.edge];
        signed_sum += adj.sign;
      }
    }
    for (int v : visits) CHECK(v == 2);
    CHECK(signed_sum == 0.0);
  }
}

TEST_CASE("transmission coefficient times distance is the stored area") {
  const CellComplex mesh = build_torus_1d(17, 3.0);
  for (const Edge& e : mesh.edges()) CHECK(e.tau() * e.dist == e.area);
}
