#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "stripgap/meshgen.hpp"

using namespace stripgap;

namespace {

HoleShape disk(double r, double cx, double cy) {
  HoleShape h;
  h.shape = Disk{r};
  h.center = Vec2(cx, cy);
  return h;
}

double mesh_hash(const PeriodicMesh& m) {
  // cheap order-sensitive fingerprint for determinism checks
  double acc = 0;
  int i = 0;
  for (const auto& v : m.vertices) acc += (++i % 97) * (v.x() + 2.0 * v.y());
  for (const auto& t : m.triangles) acc += 1e-6 * (t[0] + 3.0 * t[1] + 7.0 * t[2]);
  return acc;
}

// sum of areas of the mesh's own hole boundary loops (shoelace over the
// boundary edges, which form closed polygons)
double mesh_hole_area(const PeriodicMesh& m) {
  double s = 0;
  for (const auto& e : m.boundary_edges) {
    if (e.tag != EdgeTag::hole) continue;
    const Vec2& a = m.vertices[e.v0];
    const Vec2& b = m.vertices[e.v1];
    s += 0.5 * (a.x() * b.y() - b.x() * a.y());
  }
  // hole boundary edges run clockwise around each hole as seen from the
  // domain, so the shoelace sum is negative the enclosed area
  return std::abs(s);
}

}  // namespace

TEST_CASE("unperforated cell mesh: structured, paired, quality") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 1;
  PeriodicMesh m = mesh_cell(spec, 0.1);
  m.validate();
  CHECK(m.min_angle_deg >= 20.0);
  CHECK(m.h <= 1.5 * 0.1);
  // identical left/right trace ordinates
  std::set<double> left_y, right_y;
  for (const auto& [mm, ss] : m.periodic_pairs) {
    left_y.insert(m.vertices[mm].y());
    right_y.insert(m.vertices[ss].y());
    CHECK(m.vertices[mm].y() == m.vertices[ss].y());
  }
  CHECK(left_y == right_y);
  CHECK(left_y.size() >= 5);
  // area exact
  CHECK(m.total_area() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("perforated cell mesh: tags, area, pairing bijection") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 2;
  spec.hole = disk(0.08, 0.0, 0.2);
  PeriodicMesh m = mesh_cell(spec, 0.008);
  m.validate();
  CHECK(m.min_angle_deg >= 20.0);

  // every hole-tagged edge endpoint sits on its hole polygon
  int hole_edges = 0;
  for (const auto& e : m.boundary_edges) {
    if (e.tag != EdgeTag::hole) continue;
    ++hole_edges;
    double tol = std::max(spec.hole->tolerance(spec.H), 1e-9);
    CHECK(distance_to_polygon_boundary(m.vertices[e.v0], m.holes[e.hole_index]) < tol);
  }
  CHECK(hole_edges > 20);

  // conforming cover: triangle areas sum to rectangle minus the mesh hole loops
  double expect = 1.0 * 0.4 - mesh_hole_area(m);
  CHECK(std::abs(m.total_area() - expect) <= 1e-10 * expect);

  // pairing is a bijection between the two trace vertex sets
  std::set<int> masters, slaves;
  for (const auto& [mm, ss] : m.periodic_pairs) {
    masters.insert(mm);
    slaves.insert(ss);
  }
  CHECK(masters.size() == m.periodic_pairs.size());
  CHECK(slaves.size() == m.periodic_pairs.size());
}

TEST_CASE("halving target_h grows vertex count by a factor in [3,5]") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 2;
  spec.hole = disk(0.08, 0.0, 0.2);
  PeriodicMesh a = mesh_cell(spec, 0.012);
  PeriodicMesh b = mesh_cell(spec, 0.006);
  double ratio = static_cast<double>(b.num_vertices()) / a.num_vertices();
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("cell mesh determinism") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 4;
  spec.hole = disk(0.08, 0.0, 0.2);
  PeriodicMesh a = mesh_cell(spec, 0.009);
  PeriodicMesh b = mesh_cell(spec, 0.009);
  REQUIRE(a.num_vertices() == b.num_vertices());
  REQUIRE(a.num_triangles() == b.num_triangles());
  CHECK(mesh_hash(a) == mesh_hash(b));
}

TEST_CASE("precondition violations raise mesh errors") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 8;
  spec.hole = disk(0.08, 0.0, 0.2);
  CHECK_THROWS_AS(mesh_cell(spec, 0.02), MeshError);  // too coarse for eps/8 holes
}

TEST_CASE("strip mesh: rectangle with matched bottom/top traces") {
  StripSpec spec;
  spec.H = 0.4;
  spec.T = 1.0;
  PeriodicMesh m = mesh_strip(spec, 0.05);
  m.validate();
  CHECK(m.pair_direction == PairDirection::bottom_top);
  for (const auto& [mm, ss] : m.periodic_pairs)
    CHECK(m.vertices[mm].x() == m.vertices[ss].x());
  CHECK(m.total_area() == doctest::Approx(2.0 * 0.4).epsilon(1e-12));
}

TEST_CASE("strip mesh with disk hole: grading=1 keeps h uniform") {
  StripSpec spec;
  spec.H = 0.4;
  spec.T = 1.0;
  spec.hole = disk(0.08, 0.0, 0.2);
  PeriodicMesh m = mesh_strip(spec, 0.02, 1.0);
  m.validate();
  CHECK(m.h <= 0.02 * (1 + 1e-9));
}

TEST_CASE("graded strip mesh: vertex count within [0.5,2]x of sizing-field estimate") {
  StripSpec spec;
  spec.H = 0.4;
  spec.T = 1.2;
  spec.hole = disk(0.08, 0.0, 0.2);
  const double target_h = 0.02, grading = 1.2;

  // calibrate the density constant on the uniform mesh
  PeriodicMesh uni = mesh_strip(spec, target_h, 1.0);
  double hole_area = M_PI * 0.08 * 0.08;
  double area = 2 * 1.2 * 0.4 - hole_area;
  double c = uni.num_vertices() / (area / (target_h * target_h));

  // sizing-field integral oracle for the graded mesh: size target_h at the
  // hole growing by `grading` per layer, capped so the decay window keeps
  // enough layers, with the 0.7x projection guard band around the hole
  PeriodicMesh graded = mesh_strip(spec, target_h, grading);
  double T = 1.2, H = 0.4;
  double far_cap = std::min(H / 3.0, (T / 2.0 - H) / 6.0);
  double estimate = 0;
  int nx = 240, ny = 80;
  double dx = 2 * T / nx, dy = H / ny;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      Vec2 q(-T + (i + 0.5) * dx, (j + 0.5) * dy);
      double d = (q - Vec2(0.0, 0.2)).norm();
      if (d < 0.08) continue;  // inside hole
      double h = std::min(far_cap, target_h + (grading - 1.0) * std::max(0.0, d - 0.08));
      if (d - 0.08 < 2.0 * h) h *= 0.7;
      estimate += dx * dy / (h * h);
    }
  }
  estimate *= c;
  double ratio = graded.num_vertices() / estimate;
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 2.0);
  // grading saves vertices
  CHECK(graded.num_vertices() < uni.num_vertices());
}

TEST_CASE("uniform refinement: nested, tags carried, quality preserved") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 2;
  spec.hole = disk(0.08, 0.0, 0.2);
  PeriodicMesh m = mesh_cell(spec, 0.01);
  PeriodicMesh r = refine_uniform(m);
  r.validate();
  CHECK(r.num_triangles() == 4 * m.num_triangles());
  CHECK(r.min_angle_deg == doctest::Approx(m.min_angle_deg).epsilon(1e-12));
  // original vertices are a prefix (nested spaces)
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK(r.vertices[v].x() == m.vertices[v].x());
    CHECK(r.vertices[v].y() == m.vertices[v].y());
  }
  CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-13));
}

TEST_CASE("mesh dump format") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 1;
  PeriodicMesh m = mesh_cell(spec, 0.15);
  std::ostringstream os;
  dump_mesh(os, m);
  std::istringstream is(os.str());
  std::string word;
  is >> word;
  CHECK(word == "mesh");
  int nv, nt, ne;
  is >> nv >> nt >> ne;
  CHECK(nv == m.num_vertices());
  CHECK(nt == m.num_triangles());
}
