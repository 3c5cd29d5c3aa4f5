#include "stripgap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace stripgap {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Vec2 curve_point(const HoleShape& h, double theta) {
  if (const auto* d = std::get_if<Disk>(&h.shape)) {
    return h.center + d->radius * Vec2(std::cos(theta), std::sin(theta));
  }
  if (const auto* e = std::get_if<Ellipse>(&h.shape)) {
    return h.center + Vec2(e->semi_axis_x * std::cos(theta),
                           e->semi_axis_y * std::sin(theta));
  }
  const auto& s = std::get<SmoothStar>(h.shape);
  double r = s.base_radius * (1.0 + s.amplitude * std::cos(s.frequency * theta));
  return h.center + r * Vec2(std::cos(theta), std::sin(theta));
}

double point_segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (q - a).norm();
  double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                                 const Vec2& d) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  double d1 = cross(b - a, c - a);
  double d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c);
  double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

void check_shape_params(const HoleShape& h) {
  if (const auto* d = std::get_if<Disk>(&h.shape)) {
    if (!(d->radius > 0.0)) throw GeometryError("disk radius must be positive");
  } else if (const auto* e = std::get_if<Ellipse>(&h.shape)) {
    if (!(e->semi_axis_x > 0.0) || !(e->semi_axis_y > 0.0))
      throw GeometryError("ellipse semi-axes must be positive");
  } else {
    const auto& s = std::get<SmoothStar>(h.shape);
    if (!(s.base_radius > 0.0)) throw GeometryError("star base radius must be positive");
    if (s.frequency < 1) throw GeometryError("star frequency must be >= 1");
    if (!(s.amplitude >= 0.0) || s.amplitude >= 1.0)
      throw GeometryError("star amplitude must lie in [0,1) to keep r > 0");
  }
}

}  // namespace

double HoleShape::diameter() const {
  if (const auto* d = std::get_if<Disk>(&shape)) return 2.0 * d->radius;
  if (const auto* e = std::get_if<Ellipse>(&shape))
    return 2.0 * std::max(e->semi_axis_x, e->semi_axis_y);
  const auto& s = std::get<SmoothStar>(shape);
  return 2.0 * s.base_radius * (1.0 + s.amplitude);
}

double HoleShape::tolerance(double strip_height) const {
  if (boundary_tolerance > 0.0) return boundary_tolerance;
  return 1e-3 * std::min(strip_height, diameter());
}

Polygon HoleShape::boundary_polygon(double strip_height) const {
  check_shape_params(*this);
  const double tol = tolerance(strip_height);

  // Adaptive bisection of parameter intervals until the chord-sagitta error
  // of every segment is below tol.
  struct Seg {
    double t0, t1;
  };
  int n0 = 32;
  if (const auto* s = std::get_if<SmoothStar>(&shape)) n0 = std::max(32, 8 * s->frequency);
  std::vector<double> params;
  params.reserve(static_cast<size_t>(n0) + 1);
  for (int i = 0; i <= n0; ++i) params.push_back(kTwoPi * i / n0);

  std::vector<double> out;
  out.reserve(params.size() * 2);
  for (size_t i = 0; i + 1 < params.size(); ++i) {
    // iterative stack-based subdivision of [params[i], params[i+1]]
    std::vector<Seg> stack{{params[i], params[i + 1]}};
    std::vector<double> local;
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      double tm = 0.5 * (s.t0 + s.t1);
      Vec2 p0 = curve_point(*this, s.t0);
      Vec2 p1 = curve_point(*this, s.t1);
      Vec2 pm = curve_point(*this, tm);
      double sag = point_segment_distance(pm, p0, p1);
      if (sag > tol && (s.t1 - s.t0) > 1e-6) {
        // push right first so left is processed first (ascending order)
        stack.push_back({tm, s.t1});
        stack.push_back({s.t0, tm});
      } else {
        local.push_back(s.t0);
      }
    }
    out.insert(out.end(), local.begin(), local.end());
  }

  Polygon poly;
  poly.reserve(out.size());
  for (double t : out) poly.push_back(curve_point(*this, t));

  if (poly.size() < 3) throw GeometryError("degenerate hole boundary");
  double area = polygon_area(poly);
  if (!(area > 0.0)) throw GeometryError("hole polygon area not positive");
  if (!polygon_is_simple(poly))
    throw GeometryError("hole boundary polygon is self-intersecting");
  return poly;
}

void HoleShape::validate(double strip_height) const {
  Polygon poly = boundary_polygon(strip_height);
  const double tol = tolerance(strip_height);
  double ymin = std::numeric_limits<double>::max();
  double ymax = std::numeric_limits<double>::lowest();
  for (const auto& v : poly) {
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  if (ymin < 2.0 * tol || ymax > strip_height - 2.0 * tol) {
    std::ostringstream msg;
    msg << "hole closure not strictly inside the strip 0 < xi2 < " << strip_height
        << " (y range [" << ymin << ", " << ymax << "], margin 2*tol = " << 2.0 * tol
        << ")";
    throw GeometryError(msg.str());
  }
  double area = polygon_area(poly);
  double d = diameter();
  if (area < 1e-12 * d * d) throw GeometryError("hole area degenerate");
}

void CellSpec::validate() const {
  if (!(H > 0.0)) throw GeometryError("strip height H must be positive");
  if (N < 1) throw GeometryError("N must be a positive integer");
  if (hole) {
    hole->validate(H);
    instantiate_cell(*this);  // copy-level invariants
  }
}

double StripSpec::truncation() const {
  if (T > 0.0) return T;
  double d = hole ? hole->diameter() : 0.0;
  return std::max(4.0 * d, 1.5 * H * std::log(1e6) / kTwoPi);
}

void StripSpec::validate() const {
  if (!(H > 0.0)) throw GeometryError("strip height H must be positive");
  if (!hole) return;
  hole->validate(H);
  const double Tr = truncation();
  Polygon poly = hole->boundary_polygon(H);
  for (const auto& v : poly) {
    if (std::abs(v.x()) >= Tr - H)
      throw GeometryError("hole closure must be inside |xi1| < T - H for far-field extraction");
  }
}

double polygon_area(const Polygon& p) {
  double s = 0.0;
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

double polygon_diameter(const Polygon& p) {
  double d2 = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      d2 = std::max(d2, (p[i] - p[j]).squaredNorm());
  return std::sqrt(d2);
}

bool polygon_is_simple(const Polygon& p) {
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // skip segments sharing a vertex
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

bool point_in_polygon(const Vec2& q, const Polygon& p) {
  bool inside = false;
  const size_t n = p.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((p[i].y() > q.y()) != (p[j].y() > q.y())) {
      double xint =
          p[j].x() + (p[i].x() - p[j].x()) * (q.y() - p[j].y()) / (p[i].y() - p[j].y());
      if (q.x() < xint) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polygon_boundary(const Vec2& q, const Polygon& p) {
  double d = std::numeric_limits<double>::max();
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(q, p[i], p[(i + 1) % n]));
  return d;
}

bool polygons_overlap(const Polygon& a, const Polygon& b) {
  auto bbox = [](const Polygon& p) {
    Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Vec2 hi(std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest());
    for (const auto& v : p) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return std::pair<Vec2, Vec2>(lo, hi);
  };
  auto [alo, ahi] = bbox(a);
  auto [blo, bhi] = bbox(b);
  if (ahi.x() < blo.x() || bhi.x() < alo.x() || ahi.y() < blo.y() || bhi.y() < alo.y())
    return false;
  const size_t na = a.size(), nb = b.size();
  for (size_t i = 0; i < na; ++i)
    for (size_t j = 0; j < nb; ++j)
      if (segments_properly_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]))
        return true;
  // containment without boundary crossing
  if (point_in_polygon(a[0], b) || point_in_polygon(b[0], a)) return true;
  return false;
}

double polygon_hausdorff(const Polygon& a, const Polygon& b) {
  double d = 0.0;
  for (const auto& v : a) d = std::max(d, distance_to_polygon_boundary(v, b));
  for (const auto& v : b) d = std::max(d, distance_to_polygon_boundary(v, a));
  return d;
}

double mirror_symmetry_defect(const HoleShape& hole, double strip_height) {
  Polygon p = hole.boundary_polygon(strip_height);
  Polygon r;
  r.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it)
    r.emplace_back(it->x(), strip_height - it->y());
  return polygon_hausdorff(p, r);
}

std::vector<Polygon> instantiate_cell(const CellSpec& spec) {
  if (!(spec.H > 0.0)) throw GeometryError("strip height H must be positive");
  if (spec.N < 1) throw GeometryError("N must be a positive integer");
  if (!spec.hole) return {};
  const double eps = spec.epsilon();
  Polygon base = spec.hole->boundary_polygon(spec.H);

  std::vector<Polygon> out;
  out.reserve(spec.N);
  for (int k = 0; k < spec.N; ++k) {
    Polygon pk;
    pk.reserve(base.size());
    for (const auto& v : base)
      pk.emplace_back(eps * v.x(), eps * (v.y() + k * spec.H));
    out.push_back(std::move(pk));
  }

  for (int k = 0; k < spec.N; ++k) {
    for (const auto& v : out[k]) {
      if (std::abs(v.x()) >= 0.5 || v.y() <= 0.0 || v.y() >= spec.H) {
        std::ostringstream msg;
        msg << "hole copy k=" << k << " touches or leaves the cell boundary";
        throw GeometryError(msg.str());
      }
    }
  }
  for (int k = 0; k < spec.N; ++k) {
    for (int l = k + 1; l < spec.N; ++l) {
      if (polygons_overlap(out[k], out[l])) {
        std::ostringstream msg;
        msg << "hole copies k=" << k << " and k=" << l << " overlap";
        throw GeometryError(msg.str());
      }
    }
  }
  return out;
}

void dump_polygon_csv(std::ostream& os, const Polygon& p) {
  os << "x,y\n";
  char buf[64];
  for (const auto& v : p) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", v.x(), v.y());
    os << buf;
  }
}

}  // namespace stripgap
