#include <cmath>

#include "doctest.h"
#include "stripgap/geometry.hpp"

using namespace stripgap;

namespace {
HoleShape disk(double r, double cx, double cy) {
  HoleShape h;
  h.shape = Disk{r};
  h.center = Vec2(cx, cy);
  return h;
}
}  // namespace

TEST_CASE("disk polygon area and diameter") {
  HoleShape h = disk(0.08, 0.0, 0.2);
  Polygon p = h.boundary_polygon(0.4);
  double tol = h.tolerance(0.4);
  CHECK(std::abs(polygon_area(p) - M_PI * 0.08 * 0.08) < 2 * M_PI * 0.08 * tol * 2);
  CHECK(polygon_diameter(p) == doctest::Approx(0.16).epsilon(1e-2));
  CHECK(polygon_is_simple(p));
}

TEST_CASE("mirror symmetry defect: centered disk is symmetric") {
  const double H = 0.4;
  CHECK(mirror_symmetry_defect(disk(0.08, 0.0, H / 2), H) < 1e-12);
}

TEST_CASE("mirror symmetry defect: offset disk gives 2d") {
  const double H = 0.4;
  const double d = 0.03;
  double defect = mirror_symmetry_defect(disk(0.05, 0.0, H / 2 + d), H);
  double tol = disk(0.05, 0, 0).tolerance(H);
  CHECK(std::abs(defect - 2 * d) < 3 * tol);
}

TEST_CASE("mirror symmetry defect: even star centered on the axis") {
  const double H = 0.4;
  HoleShape h;
  h.shape = SmoothStar{0.06, 0.25, 4};  // even frequency: mirror symmetric
  h.center = Vec2(0.0, H / 2);
  double defect = mirror_symmetry_defect(h, H);
  // brute-force polygonal reflection distance stays at sampling scale
  CHECK(defect <= 2 * h.tolerance(H));
}

TEST_CASE("mirror symmetry defect invariant under horizontal translation") {
  const double H = 0.4;
  HoleShape a = disk(0.05, 0.0, 0.17);
  HoleShape b = disk(0.05, 0.31, 0.17);
  CHECK(mirror_symmetry_defect(a, H) ==
        doctest::Approx(mirror_symmetry_defect(b, H)).epsilon(1e-12));
}

TEST_CASE("instantiate_cell: N=1 identity scale") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 1;
  spec.hole = disk(0.08, 0.0, 0.2);
  auto polys = instantiate_cell(spec);
  REQUIRE(polys.size() == 1);
  double area = polygon_area(polys[0]);
  CHECK(area == doctest::Approx(M_PI * 0.08 * 0.08).epsilon(1e-3));
}

TEST_CASE("instantiate_cell: N=4 disk positions") {
  const double H = 0.4;
  CellSpec spec;
  spec.H = H;
  spec.N = 4;
  spec.hole = disk(0.1 * H, 0.0, H / 2);
  auto polys = instantiate_cell(spec);
  REQUIRE(polys.size() == 4);
  for (int k = 0; k < 4; ++k) {
    Vec2 centroid = Vec2::Zero();
    for (const auto& v : polys[k]) centroid += v;
    centroid /= static_cast<double>(polys[k].size());
    double expect_y = H / 8 + k * H / 4;  // H/8, 3H/8, 5H/8, 7H/8
    CHECK(centroid.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(centroid.y() == doctest::Approx(expect_y).epsilon(1e-9));
    // radius eps * 0.1 H = 0.025 H
    double rmax = 0;
    for (const auto& v : polys[k]) rmax = std::max(rmax, (v - centroid).norm());
    CHECK(rmax == doctest::Approx(0.025 * H).epsilon(1e-2));
  }
}

TEST_CASE("instantiate_cell: overlapping copies rejected") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 4;
  spec.hole = disk(0.6 * spec.H, 0.0, spec.H / 2);
  CHECK_THROWS_AS(instantiate_cell(spec), GeometryError);
}

TEST_CASE("instantiate_cell total removed area ~ eps^2 N |omega|") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 8;
  spec.hole = disk(0.08, 0.0, 0.2);
  auto polys = instantiate_cell(spec);
  double total = 0;
  for (const auto& p : polys) total += polygon_area(p);
  double omega = M_PI * 0.08 * 0.08;
  double expect = spec.N * spec.epsilon() * spec.epsilon() * omega;
  double tol = 10.0 * spec.hole->tolerance(spec.H) / spec.hole->diameter();
  CHECK(std::abs(total - expect) / expect < tol);
}

TEST_CASE("instantiate_cell deterministic") {
  CellSpec spec;
  spec.H = 0.4;
  spec.N = 4;
  spec.hole = disk(0.08, 0.01, 0.21);
  auto a = instantiate_cell(spec);
  auto b = instantiate_cell(spec);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k].size() == b[k].size());
    for (size_t i = 0; i < a[k].size(); ++i) {
      CHECK(a[k][i].x() == b[k][i].x());
      CHECK(a[k][i].y() == b[k][i].y());
    }
  }
}

TEST_CASE("degenerate holes rejected") {
  const double H = 0.4;
  HoleShape bad;
  bad.shape = Disk{-0.01};
  CHECK_THROWS_AS(bad.boundary_polygon(H), GeometryError);
  HoleShape crack;
  crack.shape = SmoothStar{0.05, 1.2, 3};  // r goes negative: crack-like
  crack.center = Vec2(0, 0.2);
  CHECK_THROWS_AS(crack.boundary_polygon(H), GeometryError);
  HoleShape outside = disk(0.3, 0.0, 0.2);  // pokes through the walls
  CHECK_THROWS_AS(outside.validate(H), GeometryError);
}

TEST_CASE("ellipse polygon respects tolerance") {
  HoleShape h;
  h.shape = Ellipse{0.09, 0.04};
  h.center = Vec2(0, 0.2);
  Polygon p = h.boundary_polygon(0.4);
  CHECK(polygon_is_simple(p));
  CHECK(polygon_area(p) == doctest::Approx(M_PI * 0.09 * 0.04).epsilon(2e-3));
}
