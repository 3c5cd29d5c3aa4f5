#include "stripgap/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace stripgap {

namespace {

constexpr double kQualityFloorDeg = 20.0;

inline uint64_t ekey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  double area2 = std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                          (c.x() - a.x()) * (b.y() - a.y()));
  if (la <= 0 || lb <= 0 || lc <= 0) return 0.0;
  // sin of angle at A = area2 / (lb*lc), etc.
  double sA = area2 / (lb * lc);
  double sB = area2 / (lc * la);
  double sC = area2 / (la * lb);
  double cA = (lb * lb + lc * lc - la * la) / (2 * lb * lc);
  double cB = (lc * lc + la * la - lb * lb) / (2 * lc * la);
  double cC = (la * la + lb * lb - lc * lc) / (2 * la * lb);
  double angA = std::atan2(sA, cA), angB = std::atan2(sB, cB), angC = std::atan2(sC, cC);
  return std::min({angA, angB, angC}) * 180.0 / M_PI;
}

Vec2 closest_point_on_polygon(const Vec2& q, const Polygon& p) {
  double best = std::numeric_limits<double>::max();
  Vec2 bp = p[0];
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    Vec2 ab = b - a;
    double len2 = ab.squaredNorm();
    double t = len2 > 0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec2 c = a + t * ab;
    double d = (q - c).squaredNorm();
    if (d < best) {
      best = d;
      bp = c;
    }
  }
  return bp;
}

struct BBox {
  Vec2 lo, hi;
  bool contains(const Vec2& q, double pad) const {
    return q.x() >= lo.x() - pad && q.x() <= hi.x() + pad && q.y() >= lo.y() - pad &&
           q.y() <= hi.y() + pad;
  }
};

BBox poly_bbox(const Polygon& p) {
  BBox b{Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max()),
         Vec2(std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest())};
  for (const auto& v : p) {
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
  }
  return b;
}

// Side bits for vertices on the outer rectangle.
enum : uint8_t { kX0 = 1, kX1 = 2, kY0 = 4, kY1 = 8 };

struct Builder {
  double x0, x1, y0, y1;
  PairDirection dir;
  std::vector<Vec2> verts;
  struct Tri {
    std::array<int, 3> v;
    bool alive = true;
  };
  std::vector<Tri> tris;
  std::unordered_map<uint64_t, std::array<int, 2>> adj;  // alive triangles per edge
  std::unordered_map<uint64_t, int> midpoint;
  std::vector<int> partner;       // periodic partner vertex, -1 if none
  std::vector<uint8_t> side;      // outer-box side bits
  std::vector<int> projected_to;  // hole index the vertex was snapped to, -1 if none

  int add_vertex(const Vec2& p, uint8_t s) {
    verts.push_back(p);
    side.push_back(s);
    partner.push_back(-1);
    projected_to.push_back(-1);
    return static_cast<int>(verts.size()) - 1;
  }

  void adj_add(int a, int b, int t) {
    auto& slots = adj.try_emplace(ekey(a, b), std::array<int, 2>{-1, -1}).first->second;
    if (slots[0] == t || slots[1] == t) return;
    if (slots[0] < 0)
      slots[0] = t;
    else if (slots[1] < 0)
      slots[1] = t;
    else
      throw MeshError("non-manifold edge during meshing");
  }
  void adj_remove(int a, int b, int t) {
    auto it = adj.find(ekey(a, b));
    if (it == adj.end()) return;
    if (it->second[0] == t) it->second[0] = -1;
    if (it->second[1] == t) it->second[1] = -1;
    if (it->second[0] < 0 && it->second[1] < 0) adj.erase(it);
  }

  int add_triangle(int a, int b, int c) {
    tris.push_back(Tri{{a, b, c}, true});
    int t = static_cast<int>(tris.size()) - 1;
    adj_add(a, b, t);
    adj_add(b, c, t);
    adj_add(c, a, t);
    return t;
  }
  void kill_triangle(int t) {
    auto& tr = tris[t];
    if (!tr.alive) return;
    tr.alive = false;
    adj_remove(tr.v[0], tr.v[1], t);
    adj_remove(tr.v[1], tr.v[2], t);
    adj_remove(tr.v[2], tr.v[0], t);
  }

  // Longest edge of a triangle as (vertex, vertex); deterministic tie-break.
  std::pair<int, int> longest_edge(int t) const {
    const auto& v = tris[t].v;
    double best = -1.0;
    int ba = -1, bb = -1;
    for (int i = 0; i < 3; ++i) {
      int a = v[i], b = v[(i + 1) % 3];
      double l2 = (verts[a] - verts[b]).squaredNorm();
      int lo = std::min(a, b), hi = std::max(a, b);
      int cl = std::min(ba, bb), ch = std::max(ba, bb);
      if (l2 > best * (1 + 1e-14) ||
          (l2 > best * (1 - 1e-14) && (lo < cl || (lo == cl && hi < ch)))) {
        best = l2;
        ba = a;
        bb = b;
      }
    }
    return {ba, bb};
  }

  uint8_t pair_bits() const { return dir == PairDirection::left_right ? (kX0 | kX1) : (kY0 | kY1); }

  // Recursive longest-edge (Rivara) bisection of the edge (a, b).
  int split_edge(int a, int b, int depth = 0) {
    if (depth > 128) throw MeshError("bisection cascade too deep");
    uint64_t key = ekey(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;

    // make the edge the longest edge of all its adjacent triangles
    while (true) {
      auto it = adj.find(key);
      if (it == adj.end()) throw MeshError("edge lost during refinement");
      int bad = -1;
      for (int t : it->second) {
        if (t < 0) continue;
        auto [la, lb] = longest_edge(t);
        if (ekey(la, lb) != key) {
          bad = t;
          break;
        }
      }
      if (bad < 0) break;
      auto [la, lb] = longest_edge(bad);
      split_edge(la, lb, depth + 1);
    }

    uint8_t ms = static_cast<uint8_t>(side[a] & side[b]);
    Vec2 pm = 0.5 * (verts[a] + verts[b]);
    // keep outer-box coordinates exact
    if (ms & kX0) pm.x() = x0;
    if (ms & kX1) pm.x() = x1;
    if (ms & kY0) pm.y() = y0;
    if (ms & kY1) pm.y() = y1;
    int m = add_vertex(pm, ms);
    midpoint[key] = m;

    // split adjacent triangles (copy the list first; splitting mutates adj)
    std::array<int, 2> local = adj.at(key);
    for (int t : local) {
      if (t < 0) continue;
      const auto v = tris[t].v;
      kill_triangle(t);
      for (int i = 0; i < 3; ++i) {
        int p = v[i], q = v[(i + 1) % 3], r = v[(i + 2) % 3];
        if (ekey(p, q) == key) {
          add_triangle(p, m, r);
          add_triangle(m, q, r);
          break;
        }
      }
    }

    // periodic co-refinement keeps the two traces identical
    if ((ms & pair_bits()) != 0 && partner[a] >= 0 && partner[b] >= 0) {
      int pmv;
      uint64_t pk = ekey(partner[a], partner[b]);
      if (auto it = midpoint.find(pk); it != midpoint.end())
        pmv = it->second;
      else
        pmv = split_edge(partner[a], partner[b], depth + 1);
      partner[m] = pmv;
      partner[pmv] = m;
    }
    return m;
  }
};

struct GenParams {
  double x0, x1, y0, y1;
  PairDirection dir;
  std::function<double(const Vec2&)> sizing;
  double base_h;  // coarse background cell size
  std::vector<Polygon> holes;
};

void build_base_grid(Builder& B, const GenParams& P) {
  const double W = P.x1 - P.x0, H = P.y1 - P.y0;
  int ny = std::max(2, static_cast<int>(std::ceil(H / P.base_h)));
  ny += ny & 1;
  double sy = H / ny;
  int nx = std::max(2, static_cast<int>(std::ceil(W / sy)));
  nx += nx & 1;

  B.verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    double y = (j == 0) ? P.y0 : (j == ny ? P.y1 : P.y0 + j * sy);
    for (int i = 0; i <= nx; ++i) {
      double x = (i == 0) ? P.x0 : (i == nx ? P.x1 : P.x0 + i * (W / nx));
      uint8_t s = 0;
      if (i == 0) s |= kX0;
      if (i == nx) s |= kX1;
      if (j == 0) s |= kY0;
      if (j == ny) s |= kY1;
      B.add_vertex(Vec2(x, y), s);
    }
  }
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };

  // union-jack diagonal pattern: mirror-symmetric for even nx, ny
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        B.add_triangle(v00, v10, v11);
        B.add_triangle(v00, v11, v01);
      } else {
        B.add_triangle(v00, v10, v01);
        B.add_triangle(v10, v11, v01);
      }
    }
  }

  // periodic partners on the paired sides
  if (P.dir == PairDirection::left_right) {
    for (int j = 0; j <= ny; ++j) {
      B.partner[vid(0, j)] = vid(nx, j);
      B.partner[vid(nx, j)] = vid(0, j);
    }
  } else {
    for (int i = 0; i <= nx; ++i) {
      B.partner[vid(i, 0)] = vid(i, ny);
      B.partner[vid(i, ny)] = vid(i, 0);
    }
  }
}

void refine_to_sizing(Builder& B, const GenParams& P) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t t = 0; t < B.tris.size(); ++t) {
      if (!B.tris[t].alive) continue;
      const auto& v = B.tris[t].v;
      Vec2 c = (B.verts[v[0]] + B.verts[v[1]] + B.verts[v[2]]) / 3.0;
      double target = P.sizing(c);
      auto [a, b] = B.longest_edge(t);
      double l2 = (B.verts[a] - B.verts[b]).squaredNorm();
      if (l2 > target * target * (1.0 + 1e-12)) {
        B.split_edge(a, b);
        changed = true;
      }
    }
  }
}

void cut_holes(Builder& B, const GenParams& P) {
  if (P.holes.empty()) return;
  std::vector<BBox> boxes;
  boxes.reserve(P.holes.size());
  for (const auto& h : P.holes) boxes.push_back(poly_bbox(h));

  auto inside_hole = [&](const Vec2& q) -> int {
    for (size_t k = 0; k < P.holes.size(); ++k)
      if (boxes[k].contains(q, 0.0) && point_in_polygon(q, P.holes[k])) return static_cast<int>(k);
    return -1;
  };
  auto nearest_hole = [&](const Vec2& q, double pad) -> int {
    int best = -1;
    double bd = std::numeric_limits<double>::max();
    for (size_t k = 0; k < P.holes.size(); ++k) {
      if (!boxes[k].contains(q, pad)) continue;
      double d = distance_to_polygon_boundary(q, P.holes[k]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    return best;
  };

  // delete triangles with centroid inside a hole
  for (size_t t = 0; t < B.tris.size(); ++t) {
    if (!B.tris[t].alive) continue;
    const auto& v = B.tris[t].v;
    Vec2 c = (B.verts[v[0]] + B.verts[v[1]] + B.verts[v[2]]) / 3.0;
    if (inside_hole(c) >= 0) B.kill_triangle(static_cast<int>(t));
  }

  // project cavity-boundary vertices onto the hole polygons; repeat until the
  // alive set is clean (projection can push a centroid inside or flip a
  // sliver, which then gets deleted)
  double pad = 0.0;
  for (const auto& t : B.tris)
    if (t.alive)
      for (int i = 0; i < 3; ++i)
        pad = std::max(pad, (B.verts[t.v[i]] - B.verts[t.v[(i + 1) % 3]]).norm());

  for (int round = 0; round < 8; ++round) {
    bool touched = false;
    // cavity boundary vertices = endpoints of edges with one alive triangle
    // that are not outer-box edges
    std::vector<char> on_cavity(B.verts.size(), 0);
    for (size_t t = 0; t < B.tris.size(); ++t) {
      if (!B.tris[t].alive) continue;
      const auto& v = B.tris[t].v;
      for (int i = 0; i < 3; ++i) {
        int a = v[i], b = v[(i + 1) % 3];
        auto it = B.adj.find(ekey(a, b));
        int cnt = 0;
        for (int tt : it->second) cnt += (tt >= 0);
        if (cnt != 1) continue;
        if ((B.side[a] & B.side[b]) != 0) continue;  // outer boundary
        on_cavity[a] = on_cavity[b] = 1;
      }
    }
    for (size_t v = 0; v < B.verts.size(); ++v) {
      if (!on_cavity[v] || B.projected_to[v] >= 0) continue;
      int k = nearest_hole(B.verts[v], pad);
      if (k < 0) throw MeshError("cavity vertex has no nearby hole polygon");
      B.verts[v] = closest_point_on_polygon(B.verts[v], P.holes[k]);
      B.projected_to[v] = k;
      touched = true;
    }
    // vertices strictly inside a hole attached to alive triangles
    std::vector<char> used(B.verts.size(), 0);
    for (const auto& t : B.tris)
      if (t.alive)
        for (int i = 0; i < 3; ++i) used[t.v[i]] = 1;
    for (size_t v = 0; v < B.verts.size(); ++v) {
      if (!used[v] || B.projected_to[v] >= 0) continue;
      int k = inside_hole(B.verts[v]);
      if (k >= 0) {
        B.verts[v] = closest_point_on_polygon(B.verts[v], P.holes[k]);
        B.projected_to[v] = k;
        touched = true;
      }
    }
    // remove triangles that became degenerate or sank into a hole
    bool killed = false;
    for (size_t t = 0; t < B.tris.size(); ++t) {
      if (!B.tris[t].alive) continue;
      const auto& v = B.tris[t].v;
      double ar = tri_area(B.verts[v[0]], B.verts[v[1]], B.verts[v[2]]);
      Vec2 c = (B.verts[v[0]] + B.verts[v[1]] + B.verts[v[2]]) / 3.0;
      if (ar < 1e-12 * pad * pad || inside_hole(c) >= 0) {
        B.kill_triangle(static_cast<int>(t));
        killed = true;
      }
    }
    if (!touched && !killed) break;
  }
}

struct Compact {
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> partner;
  std::vector<uint8_t> side;
  std::vector<int> projected_to;
};

Compact compact(const Builder& B) {
  Compact C;
  std::vector<int> vmap(B.verts.size(), -1);
  for (const auto& t : B.tris) {
    if (!t.alive) continue;
    for (int i = 0; i < 3; ++i) vmap[t.v[i]] = 0;
  }
  // keep paired boundary vertices even if momentarily orphaned (they are not)
  int next = 0;
  for (size_t v = 0; v < B.verts.size(); ++v)
    if (vmap[v] == 0) vmap[v] = next++;
  C.verts.resize(next);
  C.partner.assign(next, -1);
  C.side.resize(next);
  C.projected_to.resize(next);
  for (size_t v = 0; v < B.verts.size(); ++v) {
    if (vmap[v] < 0) continue;
    C.verts[vmap[v]] = B.verts[v];
    C.side[vmap[v]] = B.side[v];
    C.projected_to[vmap[v]] = B.projected_to[v];
    if (B.partner[v] >= 0 && vmap[B.partner[v]] >= 0) C.partner[vmap[v]] = vmap[B.partner[v]];
  }
  for (const auto& t : B.tris) {
    if (!t.alive) continue;
    C.tris.push_back({vmap[t.v[0]], vmap[t.v[1]], vmap[t.v[2]]});
  }
  return C;
}

// Quality-guarded Laplacian smoothing (free vertices move to the neighbor
// average, projected vertices slide along their hole polygon) and min-angle
// improving edge flips, restricted to the neighborhood of the cut boundaries.
void smooth_and_flip(Compact& C, const std::vector<Polygon>& holes, int rounds) {
  const int nv = static_cast<int>(C.verts.size());
  // ring-3 region around projected vertices
  std::vector<char> region(nv, 0);
  for (int v = 0; v < nv; ++v)
    if (C.projected_to[v] >= 0) region[v] = 1;

  auto build_incidence = [&]() {
    std::vector<std::vector<int>> inc(nv);
    for (size_t t = 0; t < C.tris.size(); ++t)
      for (int i = 0; i < 3; ++i) inc[C.tris[t][i]].push_back(static_cast<int>(t));
    return inc;
  };
  auto inc = build_incidence();
  for (int ring = 0; ring < 3; ++ring) {
    std::vector<char> next = region;
    for (int v = 0; v < nv; ++v) {
      if (!region[v]) continue;
      for (int t : inc[v])
        for (int i = 0; i < 3; ++i) next[C.tris[t][i]] = 1;
    }
    region.swap(next);
  }

  auto min_incident_angle = [&](int v, const std::vector<std::vector<int>>& in) {
    double m = 180.0;
    for (int t : in[v]) {
      const auto& tv = C.tris[t];
      m = std::min(m, tri_min_angle(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]));
    }
    return m;
  };

  for (int round = 0; round < rounds; ++round) {
    // smoothing pass
    for (int v = 0; v < nv; ++v) {
      if (!region[v] || C.side[v] != 0) continue;
      std::vector<int> nbr;
      for (int t : inc[v]) {
        for (int i = 0; i < 3; ++i)
          if (C.tris[t][i] != v) nbr.push_back(C.tris[t][i]);
      }
      std::sort(nbr.begin(), nbr.end());
      nbr.erase(std::unique(nbr.begin(), nbr.end()), nbr.end());
      if (nbr.empty()) continue;
      Vec2 avg = Vec2::Zero();
      if (C.projected_to[v] >= 0) {
        // slide along the polygon: average the projected neighbors only, then
        // re-project, so boundary vertices redistribute along the curve
        int nb = 0;
        for (int u : nbr)
          if (C.projected_to[u] == C.projected_to[v]) {
            avg += C.verts[u];
            ++nb;
          }
        if (nb < 2) continue;
        avg = closest_point_on_polygon(avg / nb, holes[C.projected_to[v]]);
      } else {
        for (int u : nbr) avg += C.verts[u];
        avg /= static_cast<double>(nbr.size());
      }
      double before = min_incident_angle(v, inc);
      Vec2 old = C.verts[v];
      bool accepted = false;
      for (double step : {1.0, 0.5}) {
        Vec2 cand = old + step * (avg - old);
        if (C.projected_to[v] >= 0 && step != 1.0)
          cand = closest_point_on_polygon(cand, holes[C.projected_to[v]]);
        C.verts[v] = cand;
        bool ok = true;
        for (int t : inc[v]) {
          const auto& tv = C.tris[t];
          if (tri_area(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]) <= 0) ok = false;
        }
        double after = ok ? min_incident_angle(v, inc) : 0.0;
        if (ok && after >= std::min(before, 30.0)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) C.verts[v] = old;
    }

    // flip pass over edges of region triangles
    std::map<uint64_t, std::array<int, 2>> emap;
    for (size_t t = 0; t < C.tris.size(); ++t) {
      bool in_region = region[C.tris[t][0]] || region[C.tris[t][1]] || region[C.tris[t][2]];
      if (!in_region) continue;
      for (int i = 0; i < 3; ++i) {
        auto& slots = emap[ekey(C.tris[t][i], C.tris[t][(i + 1) % 3])];
        if (slots[0] == 0 && slots[1] == 0) slots = {-1, -1};
        if (slots[0] < 0)
          slots[0] = static_cast<int>(t);
        else
          slots[1] = static_cast<int>(t);
      }
    }
    bool flipped_any = false;
    for (auto& [key, slots] : emap) {
      if (slots[0] < 0 || slots[1] < 0) continue;
      int t1 = slots[0], t2 = slots[1];
      auto& A = C.tris[t1];
      auto& B2 = C.tris[t2];
      int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      // a previous flip in this sweep may have invalidated the entry
      auto has = [](const std::array<int, 3>& t, int v) {
        return t[0] == v || t[1] == v || t[2] == v;
      };
      if (!has(A, a) || !has(A, b) || !has(B2, a) || !has(B2, b)) continue;
      // opposite vertices
      int c = -1, d = -1;
      for (int i = 0; i < 3; ++i)
        if (A[i] != a && A[i] != b) c = A[i];
      for (int i = 0; i < 3; ++i)
        if (B2[i] != a && B2[i] != b) d = B2[i];
      if (c < 0 || d < 0 || c == d) continue;
      // both endpoints on a constrained boundary: leave alone
      double old_q = std::min(tri_min_angle(C.verts[A[0]], C.verts[A[1]], C.verts[A[2]]),
                              tri_min_angle(C.verts[B2[0]], C.verts[B2[1]], C.verts[B2[2]]));
      // orient: A contains directed edge (a,b) or (b,a)
      // new triangles: (a,d,c) and (b,c,d) — orientation checked by area
      double ar1 = tri_area(C.verts[a], C.verts[d], C.verts[c]);
      double ar2 = tri_area(C.verts[b], C.verts[c], C.verts[d]);
      if (ar1 <= 0 || ar2 <= 0) continue;
      double new_q = std::min(tri_min_angle(C.verts[a], C.verts[d], C.verts[c]),
                              tri_min_angle(C.verts[b], C.verts[c], C.verts[d]));
      if (new_q <= old_q + 1e-12) continue;
      A = {a, d, c};
      B2 = {b, c, d};
      flipped_any = true;
      // emap is stale after a flip; finish this sweep conservatively
      slots = {-1, -1};
    }
    if (flipped_any) inc = build_incidence();
  }
}

// Direct pattern-search repositioning of the vertices of sub-floor triangles;
// rescues the few configurations Laplacian smoothing cannot improve.
void rescue_worst(Compact& C, const std::vector<Polygon>& holes, double floor_deg) {
  const int nv = static_cast<int>(C.verts.size());
  std::vector<std::vector<int>> inc(nv);
  for (size_t t = 0; t < C.tris.size(); ++t)
    for (int i = 0; i < 3; ++i) inc[C.tris[t][i]].push_back(static_cast<int>(t));

  auto local_quality = [&](int v) {
    double m = 180.0;
    for (int t : inc[v]) {
      const auto& tv = C.tris[t];
      double ar = tri_area(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]);
      if (ar <= 0) return -1.0;
      m = std::min(m, tri_min_angle(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]));
    }
    return m;
  };

  for (int pass = 0; pass < 30; ++pass) {
    bool improved = false;
    for (size_t t = 0; t < C.tris.size(); ++t) {
      const auto tv = C.tris[t];
      double ang = tri_min_angle(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]);
      if (ang >= floor_deg) continue;
      for (int i = 0; i < 3; ++i) {
        int v = tv[i];
        if (C.side[v] != 0) continue;
        double lmin = std::numeric_limits<double>::max();
        for (int tt : inc[v]) {
          const auto& w = C.tris[tt];
          for (int e = 0; e < 3; ++e)
            lmin = std::min(lmin, (C.verts[w[e]] - C.verts[w[(e + 1) % 3]]).norm());
        }
        Vec2 old = C.verts[v];
        double best = local_quality(v);
        Vec2 best_pos = old;
        for (double r : {0.3, 0.15, 0.07}) {
          for (int d = 0; d < 8; ++d) {
            double a = 2.0 * M_PI * d / 8.0;
            Vec2 cand = old + r * lmin * Vec2(std::cos(a), std::sin(a));
            if (C.projected_to[v] >= 0)
              cand = closest_point_on_polygon(cand, holes[C.projected_to[v]]);
            C.verts[v] = cand;
            double q = local_quality(v);
            if (q > best + 1e-12) {
              best = q;
              best_pos = cand;
            }
          }
        }
        C.verts[v] = best_pos;
        if ((best_pos - old).norm() > 0) improved = true;
      }
    }
    if (!improved) break;
    double worst = 180;
    for (const auto& tv : C.tris)
      worst = std::min(worst, tri_min_angle(C.verts[tv[0]], C.verts[tv[1]], C.verts[tv[2]]));
    if (worst >= floor_deg) break;
  }
}

PeriodicMesh finalize(Compact& C, const GenParams& P, double boundary_snap_tol) {
  PeriodicMesh M;
  M.vertices = std::move(C.verts);
  M.triangles = std::move(C.tris);
  M.pair_direction = P.dir;
  M.x0 = P.x0;
  M.x1 = P.x1;
  M.y0 = P.y0;
  M.y1 = P.y1;
  M.holes = P.holes;

  // boundary edges
  std::map<uint64_t, int> count;
  for (const auto& t : M.triangles)
    for (int i = 0; i < 3; ++i) count[ekey(t[i], t[(i + 1) % 3])]++;
  std::vector<BBox> boxes;
  for (const auto& h : P.holes) boxes.push_back(poly_bbox(h));
  for (const auto& t : M.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      if (count[ekey(a, b)] != 1) continue;
      uint8_t s = static_cast<uint8_t>(C.side[a] & C.side[b]);
      TaggedEdge e;
      e.v0 = a;
      e.v1 = b;
      if (s & kX0)
        e.tag = EdgeTag::left;
      else if (s & kX1)
        e.tag = EdgeTag::right;
      else if (s & kY0)
        e.tag = EdgeTag::bottom;
      else if (s & kY1)
        e.tag = EdgeTag::top;
      else {
        e.tag = EdgeTag::hole;
        Vec2 mid = 0.5 * (M.vertices[a] + M.vertices[b]);
        double bd = std::numeric_limits<double>::max();
        for (size_t k = 0; k < P.holes.size(); ++k) {
          double d = distance_to_polygon_boundary(mid, P.holes[k]);
          if (d < bd) {
            bd = d;
            e.hole_index = static_cast<int>(k);
          }
        }
        if (e.hole_index < 0) throw MeshError("untaggable boundary edge");
      }
      M.boundary_edges.push_back(e);
    }
  }

  // periodic pairs: (master, slave) = (x0-side, x1-side) or (y0, y1)
  uint8_t master_bit = P.dir == PairDirection::left_right ? kX0 : kY0;
  for (int v = 0; v < M.num_vertices(); ++v) {
    if ((C.side[v] & master_bit) && C.partner[v] >= 0)
      M.periodic_pairs.emplace_back(v, C.partner[v]);
  }

  double h = 0, minang = 180;
  for (const auto& t : M.triangles) {
    for (int i = 0; i < 3; ++i)
      h = std::max(h, (M.vertices[t[i]] - M.vertices[t[(i + 1) % 3]]).norm());
    minang = std::min(minang, tri_min_angle(M.vertices[t[0]], M.vertices[t[1]], M.vertices[t[2]]));
  }
  M.h = h;
  M.min_angle_deg = minang;

  if (minang < kQualityFloorDeg) {
    // find the worst triangle for the report
    double worst = 180;
    Vec2 wc = Vec2::Zero();
    for (const auto& t : M.triangles) {
      double a = tri_min_angle(M.vertices[t[0]], M.vertices[t[1]], M.vertices[t[2]]);
      if (a < worst) {
        worst = a;
        wc = (M.vertices[t[0]] + M.vertices[t[1]] + M.vertices[t[2]]) / 3.0;
      }
    }
    std::ostringstream msg;
    msg << "quality floor unreachable: worst triangle min angle " << worst << " deg near ("
        << wc.x() << ", " << wc.y() << ")";
    throw MeshError(msg.str());
  }
  (void)boundary_snap_tol;
  return M;
}

PeriodicMesh generate(GenParams P) {
  // projection onto the hole polygons stretches nearby edges by up to the
  // snap distance; refine a band around each hole below the nominal sizing so
  // the stretched edges still meet it
  if (!P.holes.empty()) {
    struct Guard {
      Vec2 c;
      double R;
    };
    std::vector<Guard> guards;
    for (const auto& hp : P.holes) {
      BBox b = poly_bbox(hp);
      Vec2 c = 0.5 * (b.lo + b.hi);
      double R = 0;
      for (const auto& v : hp) R = std::max(R, (v - c).norm());
      guards.push_back({c, R});
    }
    auto base_sizing = P.sizing;
    P.sizing = [base_sizing, guards](const Vec2& x) {
      double h = base_sizing(x);
      for (const auto& g : guards) {
        double d = (x - g.c).norm() - g.R;
        if (d < 2.0 * h) return 0.7 * h;
      }
      return h;
    };
  }

  Builder B;
  B.x0 = P.x0;
  B.x1 = P.x1;
  B.y0 = P.y0;
  B.y1 = P.y1;
  B.dir = P.dir;
  build_base_grid(B, P);
  refine_to_sizing(B, P);
  cut_holes(B, P);
  Compact C = compact(B);
  if (!P.holes.empty()) {
    smooth_and_flip(C, P.holes, 10);
    rescue_worst(C, P.holes, 21.0);
  }
  PeriodicMesh M = finalize(C, P, 0);
  M.validate();
  return M;
}

}  // namespace

double PeriodicMesh::triangle_area(int t) const {
  const auto& tv = triangles[t];
  return tri_area(vertices[tv[0]], vertices[tv[1]], vertices[tv[2]]);
}

double PeriodicMesh::total_area() const {
  double s = 0;
  for (int t = 0; t < num_triangles(); ++t) s += triangle_area(t);
  return s;
}

void PeriodicMesh::validate() const {
  const double scale = std::max(x1 - x0, y1 - y0);
  for (int t = 0; t < num_triangles(); ++t)
    if (!(triangle_area(t) > 0)) throw MeshError("non-positive triangle area");

  std::map<uint64_t, int> count;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) count[ekey(t[i], t[(i + 1) % 3])]++;
  for (const auto& [k, c] : count)
    if (c > 2) throw MeshError("non-conforming mesh: edge shared by >2 triangles");
  size_t nb = 0;
  for (const auto& [k, c] : count) nb += (c == 1);
  if (nb != boundary_edges.size()) throw MeshError("boundary edge bookkeeping mismatch");

  for (const auto& e : boundary_edges) {
    if (count[ekey(e.v0, e.v1)] != 1) throw MeshError("tagged edge is not a boundary edge");
    if (e.tag == EdgeTag::hole) {
      if (e.hole_index < 0 || e.hole_index >= static_cast<int>(holes.size()))
        throw MeshError("hole tag index out of range");
      double tol = std::max(1e-9 * scale, hole_boundary_tol);
      if (distance_to_polygon_boundary(vertices[e.v0], holes[e.hole_index]) > tol ||
          distance_to_polygon_boundary(vertices[e.v1], holes[e.hole_index]) > tol)
        throw MeshError("hole-tagged edge endpoint off its polygon");
    }
  }

  std::vector<char> used_master(vertices.size(), 0), used_slave(vertices.size(), 0);
  for (const auto& [m, s] : periodic_pairs) {
    if (used_master[m]++ || used_slave[s]++) throw MeshError("periodic pairing not a bijection");
    double dm, ds, cm, cs;
    if (pair_direction == PairDirection::left_right) {
      dm = vertices[m].x() - x0;
      ds = vertices[s].x() - x1;
      cm = vertices[m].y();
      cs = vertices[s].y();
    } else {
      dm = vertices[m].y() - y0;
      ds = vertices[s].y() - y1;
      cm = vertices[m].x();
      cs = vertices[s].x();
    }
    if (std::abs(dm) > 1e-12 * scale || std::abs(ds) > 1e-12 * scale)
      throw MeshError("periodic pair vertex off its side");
    if (std::abs(cm - cs) > 1e-12 * scale)
      throw MeshError("periodic pair coordinates do not match");
  }
  if (min_angle_deg < kQualityFloorDeg - 1e-9) throw MeshError("quality below 20 degree floor");
}

PeriodicMesh mesh_cell(const CellSpec& spec, double target_h) {
  if (!(spec.H > 0)) throw MeshError("H must be positive");
  std::vector<Polygon> holes;
  if (spec.hole) {
    holes = instantiate_cell(spec);
    double lim = std::min(spec.epsilon() * spec.hole->diameter() / 4.0, spec.H / 4.0);
    if (!(target_h < lim)) {
      std::ostringstream msg;
      msg << "target_h=" << target_h << " must be < min(eps*diam/4, H/4) = " << lim;
      throw MeshError(msg.str());
    }
  } else if (!(target_h < spec.H / 2)) {
    throw MeshError("target_h too coarse for the cell height");
  }
  GenParams P;
  P.x0 = -0.5;
  P.x1 = 0.5;
  P.y0 = 0.0;
  P.y1 = spec.H;
  P.dir = PairDirection::left_right;
  P.base_h = target_h;
  P.sizing = [target_h](const Vec2&) { return target_h; };
  P.holes = std::move(holes);
  return generate(P);
}

PeriodicMesh mesh_strip(const StripSpec& spec, double target_h, double grading) {
  if (!(spec.H > 0)) throw MeshError("H must be positive");
  if (!(grading >= 1.0)) throw MeshError("grading must be >= 1");
  const double T = spec.truncation();
  std::vector<Polygon> holes;
  Vec2 hc = Vec2::Zero();
  double hr = 0;
  if (spec.hole) {
    spec.validate();
    holes.push_back(spec.hole->boundary_polygon(spec.H));
    hc = spec.hole->center;
    for (const auto& v : holes[0]) hr = std::max(hr, (v - hc).norm());
    if (!(target_h < spec.hole->diameter() / 4.0))
      throw MeshError("target_h must resolve the hole (< diam/4)");
  }
  if (!(target_h < spec.H / 2)) throw MeshError("target_h too coarse for the strip height");

  double maxdist = std::hypot(T + std::abs(hc.x()), spec.H);
  // keep the far field fine enough for the decay window [T/2, T-H]
  double far_cap = spec.H / 3.0;
  if (T / 2.0 - spec.H > 0) far_cap = std::min(far_cap, (T / 2.0 - spec.H) / 6.0);
  far_cap = std::max(far_cap, 2.0 * target_h);
  double h_far = (grading <= 1.0 + 1e-12 || holes.empty())
                     ? target_h
                     : std::min(target_h + (grading - 1.0) * maxdist, far_cap);
  GenParams P;
  P.x0 = -T;
  P.x1 = T;
  P.y0 = 0.0;
  P.y1 = spec.H;
  P.dir = PairDirection::bottom_top;
  P.base_h = h_far;
  if (holes.empty() || grading <= 1.0 + 1e-12) {
    P.sizing = [target_h](const Vec2&) { return target_h; };
  } else {
    double g = grading;
    P.sizing = [target_h, g, hc, hr, h_far](const Vec2& x) {
      double d = std::max(0.0, (x - hc).norm() - hr);
      return std::min(h_far, target_h + (g - 1.0) * d);
    };
  }
  P.holes = std::move(holes);
  return generate(P);
}

PeriodicMesh refine_uniform(const PeriodicMesh& mesh) {
  PeriodicMesh out;
  out.vertices = mesh.vertices;
  out.pair_direction = mesh.pair_direction;
  out.x0 = mesh.x0;
  out.x1 = mesh.x1;
  out.y0 = mesh.y0;
  out.y1 = mesh.y1;
  out.holes = mesh.holes;

  std::map<uint64_t, int> mid;
  auto midpoint_of = [&](int a, int b) {
    uint64_t k = ekey(a, b);
    auto it = mid.find(k);
    if (it != mid.end()) return it->second;
    Vec2 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    out.vertices.push_back(p);
    int m = static_cast<int>(out.vertices.size()) - 1;
    mid[k] = m;
    return m;
  };

  for (const auto& t : mesh.triangles) {
    int m01 = midpoint_of(t[0], t[1]);
    int m12 = midpoint_of(t[1], t[2]);
    int m20 = midpoint_of(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({m01, t[1], m12});
    out.triangles.push_back({m20, m12, t[2]});
    out.triangles.push_back({m01, m12, m20});
  }
  double hole_tol = mesh.hole_boundary_tol;
  for (const auto& e : mesh.boundary_edges) {
    int m = midpoint_of(e.v0, e.v1);
    out.boundary_edges.push_back({e.v0, m, e.tag, e.hole_index});
    out.boundary_edges.push_back({m, e.v1, e.tag, e.hole_index});
    if (e.tag == EdgeTag::hole) {
      // the chord midpoint sits off the polygon by the sagitta
      double d = distance_to_polygon_boundary(out.vertices[m], mesh.holes[e.hole_index]);
      hole_tol = std::max(hole_tol, d * (1 + 1e-9));
    }
  }
  // pairs: carry old ones and add midpoints of paired boundary edges
  out.periodic_pairs = mesh.periodic_pairs;
  std::map<uint64_t, uint64_t> slave_edge_of;  // master edge -> slave edge
  {
    std::map<int, int> p;
    for (auto [m, s] : mesh.periodic_pairs) p[m] = s;
    for (const auto& e : mesh.boundary_edges) {
      bool master_side = (mesh.pair_direction == PairDirection::left_right)
                             ? e.tag == EdgeTag::left
                             : e.tag == EdgeTag::bottom;
      if (!master_side) continue;
      auto i0 = p.find(e.v0), i1 = p.find(e.v1);
      if (i0 == p.end() || i1 == p.end()) throw MeshError("paired side edge without vertex pairs");
      uint64_t me = ekey(e.v0, e.v1), se = ekey(i0->second, i1->second);
      if (mid.count(me) && mid.count(se))
        out.periodic_pairs.emplace_back(mid[me], mid[se]);
    }
  }

  out.h = mesh.h / 2.0;
  out.min_angle_deg = mesh.min_angle_deg;
  out.hole_boundary_tol = hole_tol;
  out.validate();
  return out;
}

void dump_mesh(std::ostream& os, const PeriodicMesh& mesh) {
  os << "mesh " << mesh.num_vertices() << " " << mesh.num_triangles() << " "
     << mesh.boundary_edges.size() << "\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g\n", v.x(), v.y());
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << "t " << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges) {
    os << "e " << e.v0 << " " << e.v1 << " " << edge_tag_name(e.tag);
    if (e.tag == EdgeTag::hole) os << "(" << e.hole_index << ")";
    os << "\n";
  }
}

std::string edge_tag_name(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::left: return "left";
    case EdgeTag::right: return "right";
    case EdgeTag::bottom: return "bottom";
    case EdgeTag::top: return "top";
    case EdgeTag::hole: return "hole";
  }
  return "?";
}

}  // namespace stripgap
