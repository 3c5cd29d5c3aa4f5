#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "stripgap/geometry.hpp"

namespace stripgap {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EdgeTag { left, right, bottom, top, hole };

struct TaggedEdge {
  int v0 = -1, v1 = -1;
  EdgeTag tag = EdgeTag::hole;
  int hole_index = -1;  // valid when tag == hole
};

enum class PairDirection { left_right, bottom_top };

/// Conforming triangulation of a rectangle minus hole polygons, with exactly
/// matching vertex traces on the two periodic sides.
struct PeriodicMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<TaggedEdge> boundary_edges;
  std::vector<std::pair<int, int>> periodic_pairs;  // (master, slave)
  PairDirection pair_direction = PairDirection::left_right;

  // Domain box [x0,x1] x [y0,y1] and the hole polygons actually cut.
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  std::vector<Polygon> holes;

  double h = 0.0;              // max element diameter
  double min_angle_deg = 0.0;  // quality

  /// Distance slack allowed between hole-tagged edge endpoints and the hole
  /// polygons; grows under refine_uniform because chord midpoints stay on the
  /// chord, not the polygon.
  double hole_boundary_tol = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  double total_area() const;

  /// Conformity, positive areas, pairing coordinate match, quality floor,
  /// hole-tagged edges on their polygons. Throws MeshError on violation.
  void validate() const;
};

/// Uniform mesh of the periodicity cell with left/right pairing.
/// Pre: target_h < min(eps * diam(hole) / 4, H / 4) when perforated.
PeriodicMesh mesh_cell(const CellSpec& spec, double target_h);

/// Graded mesh of the truncated strip Xi_T with bottom/top pairing; element
/// size near the hole <= target_h, growing by <= `grading` per layer.
PeriodicMesh mesh_strip(const StripSpec& spec, double target_h, double grading = 1.25);

/// Nested 4-way (red) refinement; same polygonal geometry, tags and pairing
/// carried over. Quality preserved exactly.
PeriodicMesh refine_uniform(const PeriodicMesh& mesh);

/// Plain-text dump: header, then `v x y`, `t i j k`, `e i j tag` lines.
void dump_mesh(std::ostream& os, const PeriodicMesh& mesh);

std::string edge_tag_name(EdgeTag tag);

}  // namespace stripgap
