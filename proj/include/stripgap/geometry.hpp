#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace stripgap {

using Vec2 = Eigen::Vector2d;

/// Closed boundary polygon, counterclockwise, last vertex != first.
using Polygon = std::vector<Vec2>;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Disk {
  double radius = 0.0;
};
struct Ellipse {
  double semi_axis_x = 0.0;
  double semi_axis_y = 0.0;
};
/// r(theta) = base_radius * (1 + amplitude * cos(frequency * theta))
struct SmoothStar {
  double base_radius = 0.0;
  double amplitude = 0.0;
  int frequency = 0;
};

/// A smooth hole in the unit strip 0 < xi2 < H, represented for all
/// downstream computations by a closed polygon sampled from the parametric
/// curve to a chord-sagitta tolerance.
struct HoleShape {
  std::variant<Disk, Ellipse, SmoothStar> shape = Disk{};
  Vec2 center = Vec2::Zero();
  /// Max chord-sagitta error of the polygonal approximation.
  /// <= 0 means auto: 1e-3 * min(strip height, hole diameter).
  double boundary_tolerance = 0.0;

  double diameter() const;
  double tolerance(double strip_height) const;

  /// Adaptive polygonal sampling; checks simplicity and positive area.
  Polygon boundary_polygon(double strip_height) const;

  /// Full invariants: closure strictly inside the strip with margin
  /// >= 2 * tolerance, simple closed boundary, positive area.
  void validate(double strip_height) const;
};

/// One x1-period of the perforated strip: height H, N scaled hole copies
/// (epsilon = 1/N), period 1 along x1. An empty hole means the unperforated
/// (limit) cell.
struct CellSpec {
  double H = 0.0;
  int N = 1;
  std::optional<HoleShape> hole;  // unit-strip (xi) coordinates

  double epsilon() const { return 1.0 / static_cast<double>(N); }
  void validate() const;
};

/// Truncated boundary-layer strip Xi_T = (-T,T) x (0,H) minus the hole.
struct StripSpec {
  double H = 0.0;
  std::optional<HoleShape> hole;
  /// Truncation half-length; <= 0 means auto:
  /// max(4 * diam(omega), 1.5 * H * ln(1e6) / (2 pi)).
  double T = 0.0;

  double truncation() const;
  void validate() const;
};

// Polygon utilities.
double polygon_area(const Polygon& p);  // signed; CCW positive
double polygon_diameter(const Polygon& p);
bool polygon_is_simple(const Polygon& p);
bool point_in_polygon(const Vec2& q, const Polygon& p);
double distance_to_polygon_boundary(const Vec2& q, const Polygon& p);
bool polygons_overlap(const Polygon& a, const Polygon& b);

/// Symmetrized vertex-to-chain Hausdorff distance between boundaries.
double polygon_hausdorff(const Polygon& a, const Polygon& b);

/// Hausdorff distance between the hole boundary polygon and its reflection
/// across xi2 = H/2; zero for mirror-symmetric holes.
double mirror_symmetry_defect(const HoleShape& hole, double strip_height);

/// The N hole polygons of the periodicity cell, k-th one equal to the base
/// polygon scaled by epsilon and translated by (0, epsilon*k*H).
/// Throws GeometryError naming the offending copy on overlap or boundary
/// contact with the cell.
std::vector<Polygon> instantiate_cell(const CellSpec& spec);

void dump_polygon_csv(std::ostream& os, const Polygon& p);

}  // namespace stripgap
