#pragma once

// Polygonal multi-loop curves in the plane and the geometry kernel used by
// everything else: validation, orientation/nesting normalization, edge/vertex
// frames, enclosed area, convex hull with per-vertex hull distance,
// arclength remeshing, connected-component extraction and a boolean union
// used when evolving fronts collide.
//
// Conventions: outer loops are counterclockwise, holes clockwise, so the
// outward normal of an edge is always the tangent rotated by -90 degrees.
// Nesting is resolved by even-odd containment counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "types.hpp"

namespace wulff2d {

template <typename Scalar>
struct Loop {
  Points<Scalar> pts;

  Index size() const { return pts.rows(); }
  Vec2<Scalar> vertex(Index i) const { return pts.row(i).transpose(); }
};

template <typename Scalar>
struct MultiCurve {
  std::vector<Loop<Scalar>> loops;

  Index vertex_count() const {
    Index n = 0;
    for (const auto& l : loops) n += l.size();
    return n;
  }
  // Offset of loop k's vertices in the flat (global) vertex indexing.
  Index offset(std::size_t k) const {
    Index n = 0;
    for (std::size_t j = 0; j < k; ++j) n += loops[j].size();
    return n;
  }
};

// ---------------------------------------------------------------- primitives

template <typename Scalar>
Scalar signed_area(const Points<Scalar>& pts) {
  const Index n = pts.rows();
  Scalar a = 0;
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    a += pts(i, 0) * pts(j, 1) - pts(j, 0) * pts(i, 1);
  }
  return a / 2;
}

template <typename Scalar>
Scalar loop_length(const Loop<Scalar>& l) {
  Scalar s = 0;
  const Index n = l.size();
  for (Index i = 0; i < n; ++i) s += (l.vertex((i + 1) % n) - l.vertex(i)).norm();
  return s;
}

template <typename Scalar>
Scalar point_segment_distance(const Vec2<Scalar>& p, const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  const Vec2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 == Scalar(0)) return (p - a).norm();
  Scalar t = (p - a).dot(ab) / len2;
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

template <typename Scalar>
Scalar segment_segment_distance(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                                const Vec2<Scalar>& c, const Vec2<Scalar>& d) {
  Scalar m = point_segment_distance(a, c, d);
  m = std::min(m, point_segment_distance(b, c, d));
  m = std::min(m, point_segment_distance(c, a, b));
  return std::min(m, point_segment_distance(d, a, b));
}

namespace detail {

template <typename Scalar>
int orient_sign(const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c, Scalar eps) {
  const Scalar v = cross2<Scalar>(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

template <typename Scalar>
bool bbox_disjoint(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                   const Vec2<Scalar>& c, const Vec2<Scalar>& d) {
  return std::max(a.x(), b.x()) < std::min(c.x(), d.x()) ||
         std::max(c.x(), d.x()) < std::min(a.x(), b.x()) ||
         std::max(a.y(), b.y()) < std::min(c.y(), d.y()) ||
         std::max(c.y(), d.y()) < std::min(a.y(), b.y());
}

}  // namespace detail

// True when closed segments [a,b] and [c,d] share a point.  Exactness is not a
// goal here; ties within eps count as contact, which is the safe side for a
// simplicity check.
template <typename Scalar>
bool segments_intersect(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                        const Vec2<Scalar>& c, const Vec2<Scalar>& d,
                        Scalar eps = Scalar(0)) {
  if (detail::bbox_disjoint(a, b, c, d)) return false;
  const int o1 = detail::orient_sign(a, b, c, eps);
  const int o2 = detail::orient_sign(a, b, d, eps);
  const int o3 = detail::orient_sign(c, d, a, eps);
  const int o4 = detail::orient_sign(c, d, b, eps);
  if (o1 != o2 && o3 != o4) return true;
  auto on = [eps](const Vec2<Scalar>& p, const Vec2<Scalar>& q, const Vec2<Scalar>& r) {
    return detail::orient_sign(p, q, r, eps) == 0 &&
           r.x() <= std::max(p.x(), q.x()) + eps && r.x() + eps >= std::min(p.x(), q.x()) &&
           r.y() <= std::max(p.y(), q.y()) + eps && r.y() + eps >= std::min(p.y(), q.y());
  };
  return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

// Even-odd crossing test.  Points on the boundary are classified by the ray
// parity and are not meaningful; callers keep query points off the loops.
template <typename Scalar>
bool point_in_loop(const Vec2<Scalar>& p, const Loop<Scalar>& l) {
  const Index n = l.size();
  bool in = false;
  for (Index i = 0; i < n; ++i) {
    const Vec2<Scalar> a = l.vertex(i), b = l.vertex((i + 1) % n);
    const bool cross_y = (a.y() > p.y()) != (b.y() > p.y());
    if (cross_y) {
      const Scalar x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (x > p.x()) in = !in;
    }
  }
  return in;
}

template <typename Scalar>
bool loop_self_intersects(const Loop<Scalar>& l, Scalar eps = Scalar(0)) {
  const Index n = l.size();
  for (Index i = 0; i < n; ++i) {
    const Vec2<Scalar> a = l.vertex(i), b = l.vertex((i + 1) % n);
    for (Index j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // shared endpoint
      if (segments_intersect(a, b, l.vertex(j), l.vertex((j + 1) % n), eps)) return true;
    }
  }
  return false;
}

template <typename Scalar>
bool loops_intersect(const Loop<Scalar>& p, const Loop<Scalar>& q, Scalar eps = Scalar(0)) {
  for (Index i = 0; i < p.size(); ++i) {
    const Vec2<Scalar> a = p.vertex(i), b = p.vertex((i + 1) % p.size());
    for (Index j = 0; j < q.size(); ++j) {
      if (segments_intersect(a, b, q.vertex(j), q.vertex((j + 1) % q.size()), eps)) return true;
    }
  }
  return false;
}

// --------------------------------------------------------------------- build

// Validates raw loops and normalizes orientation: each loop must have >= 3
// vertices, positive edge lengths and no self or pairwise intersections.
// Loops contained in an even number of other loops become ccw (region
// boundary), odd ones cw (holes).
template <typename Scalar>
MultiCurve<Scalar> build(std::vector<Loop<Scalar>> loops) {
  Scalar scale = Scalar(1);
  for (const auto& l : loops)
    if (l.size() > 0) scale = std::max(scale, l.pts.template lpNorm<Eigen::Infinity>());
  const Scalar eps_len = Scalar(1e-14) * scale;

  for (std::size_t k = 0; k < loops.size(); ++k) {
    const auto& l = loops[k];
    if (l.size() < 3)
      throw DegenerateLoop("loop " + std::to_string(k) + " has fewer than 3 vertices");
    for (Index i = 0; i < l.size(); ++i) {
      if (!l.pts.row(i).allFinite())
        throw DegenerateLoop("loop " + std::to_string(k) + " has a non-finite vertex");
      if ((l.vertex((i + 1) % l.size()) - l.vertex(i)).norm() <= eps_len)
        throw DegenerateLoop("loop " + std::to_string(k) + " has a zero-length edge");
    }
    if (std::abs(signed_area(l.pts)) <= eps_len * eps_len)
      throw DegenerateLoop("loop " + std::to_string(k) + " has zero area");
    if (loop_self_intersects(l))
      throw SelfIntersection("loop " + std::to_string(k) + " is not simple");
  }
  for (std::size_t a = 0; a < loops.size(); ++a)
    for (std::size_t b = a + 1; b < loops.size(); ++b)
      if (loops_intersect(loops[a], loops[b]))
        throw OverlappingComponents("loops " + std::to_string(a) + " and " + std::to_string(b) +
                                    " intersect");

  // Nesting depth by even-odd containment of one vertex (loops are disjoint,
  // so any vertex represents the loop).
  for (std::size_t a = 0; a < loops.size(); ++a) {
    int depth = 0;
    for (std::size_t b = 0; b < loops.size(); ++b)
      if (b != a && point_in_loop(loops[a].vertex(0), loops[b])) ++depth;
    const bool want_ccw = (depth % 2 == 0);
    if ((signed_area(loops[a].pts) > 0) != want_ccw)
      loops[a].pts = loops[a].pts.colwise().reverse().eval();
  }
  return MultiCurve<Scalar>{std::move(loops)};
}

template <typename Scalar>
MultiCurve<Scalar> build(const Loop<Scalar>& loop) {
  return build(std::vector<Loop<Scalar>>{loop});
}

template <typename Scalar>
MultiCurve<Scalar> build(std::initializer_list<Loop<Scalar>> loops) {
  return build(std::vector<Loop<Scalar>>(loops));
}

// ------------------------------------------------------------------- frames

// Per-edge and per-vertex discrete differential data of one loop.  Edge i
// joins vertex i to vertex i+1.  The vertex normal is the normalized sum of
// the two adjacent edge normals; kappa is turning angle over dual length, so
// convex regions have kappa > 0 on outer loops.
template <typename Scalar>
struct LoopFrame {
  Points<Scalar> edge_tangent, edge_normal;
  VecX<Scalar> edge_len;
  Points<Scalar> vertex_normal, vertex_tangent;
  VecX<Scalar> dual_len, turning, kappa;
};

template <typename Scalar>
LoopFrame<Scalar> make_frame(const Loop<Scalar>& l) {
  const Index n = l.size();
  LoopFrame<Scalar> f;
  f.edge_tangent.resize(n, 2);
  f.edge_normal.resize(n, 2);
  f.edge_len.resize(n);
  f.vertex_normal.resize(n, 2);
  f.vertex_tangent.resize(n, 2);
  f.dual_len.resize(n);
  f.turning.resize(n);
  f.kappa.resize(n);

  for (Index i = 0; i < n; ++i) {
    const Vec2<Scalar> e = l.vertex((i + 1) % n) - l.vertex(i);
    const Scalar len = e.norm();
    f.edge_len[i] = len;
    const Vec2<Scalar> t = e / len;
    f.edge_tangent.row(i) = t.transpose();
    f.edge_normal.row(i) = rot_cw(t).transpose();
  }
  for (Index i = 0; i < n; ++i) {
    const Index p = (i + n - 1) % n;
    const Vec2<Scalar> tp = f.edge_tangent.row(p).transpose();
    const Vec2<Scalar> ti = f.edge_tangent.row(i).transpose();
    f.turning[i] = std::atan2(cross2(tp, ti), tp.dot(ti));
    f.dual_len[i] = (f.edge_len[p] + f.edge_len[i]) / 2;
    const Vec2<Scalar> nsum = (f.edge_normal.row(p) + f.edge_normal.row(i)).transpose();
    const Vec2<Scalar> tsum = (f.edge_tangent.row(p) + f.edge_tangent.row(i)).transpose();
    const Scalar nn = nsum.norm();
    if (nn <= Scalar(1e-300))
      throw DegenerateLoop("vertex " + std::to_string(i) + ": adjacent edges fold back");
    f.vertex_normal.row(i) = (nsum / nn).transpose();
    f.vertex_tangent.row(i) = (tsum / tsum.norm()).transpose();
    f.kappa[i] = f.turning[i] / f.dual_len[i];
  }
  return f;
}

template <typename Scalar>
std::vector<LoopFrame<Scalar>> make_frames(const MultiCurve<Scalar>& c) {
  std::vector<LoopFrame<Scalar>> fs;
  fs.reserve(c.loops.size());
  for (const auto& l : c.loops) fs.push_back(make_frame(l));
  return fs;
}

template <typename Scalar>
Scalar total_length(const MultiCurve<Scalar>& c) {
  Scalar s = 0;
  for (const auto& l : c.loops) s += loop_length(l);
  return s;
}

// Mean edge length over all loops; the mesh scale h used in tolerances.
template <typename Scalar>
Scalar mean_edge_length(const MultiCurve<Scalar>& c) {
  return total_length(c) / Scalar(c.vertex_count());
}

template <typename Scalar>
Scalar enclosed_area(const MultiCurve<Scalar>& c) {
  Scalar a = 0;
  for (const auto& l : c.loops) a += signed_area(l.pts);
  return a;
}

template <typename Scalar>
Vec2<Scalar> area_centroid(const Loop<Scalar>& l) {
  const Index n = l.size();
  Scalar a = 0;
  Vec2<Scalar> c = Vec2<Scalar>::Zero();
  for (Index i = 0; i < n; ++i) {
    const Vec2<Scalar> p = l.vertex(i), q = l.vertex((i + 1) % n);
    const Scalar w = cross2(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3 * a);
}

template <typename Scalar>
Scalar diameter(const MultiCurve<Scalar>& c) {
  std::vector<Vec2<Scalar>> v;
  for (const auto& l : c.loops)
    for (Index i = 0; i < l.size(); ++i) v.push_back(l.vertex(i));
  Scalar d = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
  return d;
}

// -------------------------------------------------------------- convex hull

template <typename Scalar>
struct HullResult {
  Loop<Scalar> hull;       // ccw, extreme points only
  VecX<Scalar> distance;   // per input vertex (flat indexing), 0 on the hull
};

// Andrew's monotone chain; collinear points are dropped so only extreme
// points remain.
template <typename Scalar>
Loop<Scalar> convex_hull_points(std::vector<Vec2<Scalar>> v) {
  std::sort(v.begin(), v.end(), [](const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  v.erase(std::unique(v.begin(), v.end(),
                      [](const Vec2<Scalar>& a, const Vec2<Scalar>& b) { return a == b; }),
          v.end());
  const std::size_t n = v.size();
  if (n < 3) throw DegenerateLoop("hull of fewer than 3 distinct points");
  std::vector<Vec2<Scalar>> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross2<Scalar>(h[k - 1] - h[k - 2], v[i] - h[k - 2]) <= 0) --k;
    h[k++] = v[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross2<Scalar>(h[k - 1] - h[k - 2], v[i] - h[k - 2]) <= 0) --k;
    h[k++] = v[i];
  }
  h.resize(k - 1);
  Loop<Scalar> out;
  out.pts.resize(static_cast<Index>(h.size()), 2);
  for (std::size_t i = 0; i < h.size(); ++i) out.pts.row(static_cast<Index>(i)) = h[i].transpose();
  return out;
}

template <typename Scalar>
HullResult<Scalar> convex_hull(const MultiCurve<Scalar>& c) {
  std::vector<Vec2<Scalar>> v;
  for (const auto& l : c.loops)
    for (Index i = 0; i < l.size(); ++i) v.push_back(l.vertex(i));
  HullResult<Scalar> r;
  r.hull = convex_hull_points(v);
  r.distance.resize(static_cast<Index>(v.size()));
  const Index m = r.hull.size();
  for (std::size_t i = 0; i < v.size(); ++i) {
    Scalar d = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < m; ++j)
      d = std::min(d, point_segment_distance(v[i], r.hull.vertex(j), r.hull.vertex((j + 1) % m)));
    r.distance[static_cast<Index>(i)] = d;
  }
  return r;
}

// ------------------------------------------------------------------- remesh

// Resample one loop uniformly by arclength at spacing ~ target_h.  New
// vertices lie on the old polygon, so the area drift per call is only the
// corner-cutting term, O(h^2) relative on resolved curves.
template <typename Scalar>
Loop<Scalar> remesh_loop(const Loop<Scalar>& l, Scalar target_h) {
  const Scalar L = loop_length(l);
  if (L < 3 * target_h) throw DegenerateLoop("loop shorter than 3 target edge lengths");
  const Index m = std::max<Index>(3, static_cast<Index>(std::llround(L / target_h)));
  const Index n = l.size();
  Loop<Scalar> out;
  out.pts.resize(m, 2);
  Scalar acc = 0;       // arclength consumed up to the current old edge
  Index e = 0;          // current old edge
  Scalar elen = (l.vertex(1 % n) - l.vertex(0)).norm();
  for (Index k = 0; k < m; ++k) {
    const Scalar s = L * Scalar(k) / Scalar(m);
    while (acc + elen < s && e + 1 < n) {
      acc += elen;
      ++e;
      elen = (l.vertex((e + 1) % n) - l.vertex(e)).norm();
    }
    const Scalar t = std::clamp((s - acc) / elen, Scalar(0), Scalar(1));
    out.pts.row(k) = ((1 - t) * l.vertex(e) + t * l.vertex((e + 1) % n)).transpose();
  }
  return out;
}

template <typename Scalar>
MultiCurve<Scalar> remesh(const MultiCurve<Scalar>& c, Scalar target_h) {
  std::vector<Loop<Scalar>> out;
  out.reserve(c.loops.size());
  for (const auto& l : c.loops) out.push_back(remesh_loop(l, target_h));
  return MultiCurve<Scalar>{std::move(out)};
}

// --------------------------------------------------------------- components

// Groups of loop indices forming connected regions: every loop of even
// nesting depth starts a component (listed first in its group) and the
// odd-depth loops directly inside it are its holes.  Islands inside holes
// (depth 2) start components of their own.
template <typename Scalar>
std::vector<std::vector<std::size_t>> component_loop_indices(const MultiCurve<Scalar>& c) {
  const std::size_t m = c.loops.size();
  std::vector<int> depth(m, 0);
  std::vector<std::vector<bool>> inside(m, std::vector<bool>(m, false));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b && point_in_loop(c.loops[a].vertex(0), c.loops[b])) {
        inside[a][b] = true;
        ++depth[a];
      }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> root_of(m, m);
  for (std::size_t a = 0; a < m; ++a)
    if (depth[a] % 2 == 0) {
      root_of[a] = out.size();
      out.push_back({a});
    }
  for (std::size_t a = 0; a < m; ++a) {
    if (depth[a] % 2 == 0) continue;
    // immediate parent: containing loop of depth one less (unique)
    for (std::size_t b = 0; b < m; ++b)
      if (inside[a][b] && depth[b] == depth[a] - 1) {
        out[root_of[b]].push_back(a);
        break;
      }
  }
  return out;
}

template <typename Scalar>
std::vector<MultiCurve<Scalar>> components(const MultiCurve<Scalar>& c) {
  std::vector<MultiCurve<Scalar>> out;
  for (const auto& group : component_loop_indices(c)) {
    MultiCurve<Scalar> part;
    for (std::size_t k : group) part.loops.push_back(c.loops[k]);
    out.push_back(std::move(part));
  }
  return out;
}

// -------------------------------------------------------------------- union

namespace detail {

template <typename Scalar>
std::optional<std::pair<Scalar, Scalar>> segment_intersection_params(
    const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c, const Vec2<Scalar>& d) {
  const Vec2<Scalar> r = b - a, s = d - c;
  const Scalar den = cross2(r, s);
  if (den == Scalar(0)) return std::nullopt;  // parallel; overlap handled by perturbation upstream
  const Scalar t = cross2<Scalar>(c - a, s) / den;
  const Scalar u = cross2<Scalar>(c - a, r) / den;
  if (t < 0 || t > 1 || u < 0 || u > 1) return std::nullopt;
  return std::make_pair(t, u);
}

}  // namespace detail

// Boolean union of the regions bounded by two simple ccw loops.  Edges are
// split at pairwise intersections; the sub-edges whose midpoints lie outside
// the other loop form the union boundary and are stitched back into closed
// loops.  Assumes transversal crossings; returns empty on a stitching failure
// so callers can retry later.
template <typename Scalar>
std::vector<Loop<Scalar>> polygon_union(const Loop<Scalar>& A, const Loop<Scalar>& B) {
  // Containment shortcuts (no crossings needed).
  if (!loops_intersect(A, B)) {
    if (point_in_loop(A.vertex(0), B)) return {B};
    if (point_in_loop(B.vertex(0), A)) return {A};
    return {A, B};
  }

  auto split = [](const Loop<Scalar>& P, const Loop<Scalar>& Q) {
    std::vector<Vec2<Scalar>> out;
    const Index n = P.size();
    for (Index i = 0; i < n; ++i) {
      const Vec2<Scalar> a = P.vertex(i), b = P.vertex((i + 1) % n);
      std::vector<Scalar> ts{Scalar(0)};
      for (Index j = 0; j < Q.size(); ++j) {
        auto hit = detail::segment_intersection_params(a, b, Q.vertex(j), Q.vertex((j + 1) % Q.size()));
        if (hit) ts.push_back(hit->first);
      }
      std::sort(ts.begin(), ts.end());
      for (Scalar t : ts)
        if (out.empty() || (out.back() - (a + t * (b - a))).norm() > Scalar(1e-12))
          out.push_back(a + t * (b - a));
    }
    return out;  // closed chain of split points
  };

  struct Seg {
    Vec2<Scalar> a, b;
  };
  std::vector<Seg> keep;
  auto collect = [&keep](const std::vector<Vec2<Scalar>>& chain, const Loop<Scalar>& other) {
    const std::size_t n = chain.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2<Scalar> a = chain[i], b = chain[(i + 1) % n];
      if ((b - a).norm() <= Scalar(1e-13)) continue;
      if (!point_in_loop<Scalar>((a + b) / 2, other)) keep.push_back({a, b});
    }
  };
  collect(split(A, B), B);
  collect(split(B, A), A);

  // Stitch directed segments end-to-start.
  const Scalar tol = Scalar(1e-9);
  std::vector<bool> used(keep.size(), false);
  std::vector<Loop<Scalar>> loops;
  for (std::size_t s = 0; s < keep.size(); ++s) {
    if (used[s]) continue;
    std::vector<Vec2<Scalar>> chain{keep[s].a, keep[s].b};
    used[s] = true;
    for (;;) {
      const Vec2<Scalar> tail = chain.back();
      std::size_t next = keep.size();
      Scalar best = tol;
      for (std::size_t j = 0; j < keep.size(); ++j)
        if (!used[j]) {
          const Scalar d = (keep[j].a - tail).norm();
          if (d < best) {
            best = d;
            next = j;
          }
        }
      if (next == keep.size()) break;
      used[next] = true;
      chain.push_back(keep[next].b);
    }
    if ((chain.front() - chain.back()).norm() > tol) return {};  // open chain: give up
    chain.pop_back();
    // Drop near-duplicate points left by the splitting.
    std::vector<Vec2<Scalar>> clean;
    for (const auto& p : chain)
      if (clean.empty() || (p - clean.back()).norm() > Scalar(1e-12)) clean.push_back(p);
    while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= Scalar(1e-12))
      clean.pop_back();
    if (clean.size() < 3) continue;
    Loop<Scalar> l;
    l.pts.resize(static_cast<Index>(clean.size()), 2);
    for (std::size_t i = 0; i < clean.size(); ++i)
      l.pts.row(static_cast<Index>(i)) = clean[i].transpose();
    loops.push_back(std::move(l));
  }
  return loops;
}

// -------------------------------------------------------------- measurement

// Symmetric Hausdorff distance between boundary polylines (vertices of one
// against edges of the other; exact up to O(h^2) for resolved curves).
template <typename Scalar>
Scalar hausdorff_distance(const MultiCurve<Scalar>& P, const MultiCurve<Scalar>& Q) {
  auto directed = [](const MultiCurve<Scalar>& U, const MultiCurve<Scalar>& V) {
    Scalar worst = 0;
    for (const auto& lu : U.loops)
      for (Index i = 0; i < lu.size(); ++i) {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (const auto& lv : V.loops)
          for (Index j = 0; j < lv.size(); ++j)
            d = std::min(d, point_segment_distance(lu.vertex(i), lv.vertex(j),
                                                   lv.vertex((j + 1) % lv.size())));
        worst = std::max(worst, d);
      }
    return worst;
  };
  return std::max(directed(P, Q), directed(Q, P));
}

// ------------------------------------------------------------------- shapes

template <typename Scalar>
Loop<Scalar> circle_loop(Scalar radius, Index n, const Vec2<Scalar>& center = Vec2<Scalar>::Zero()) {
  Loop<Scalar> l;
  l.pts.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const Scalar th = Scalar(2) * Scalar(M_PI) * Scalar(i) / Scalar(n);
    l.pts(i, 0) = center.x() + radius * std::cos(th);
    l.pts(i, 1) = center.y() + radius * std::sin(th);
  }
  return l;
}

// Star-shaped loop r(theta) = base * (1 + sum_k amp_k cos(k theta + phase_k)),
// k = 2..2+amps-1, with amplitudes drawn uniformly in [-amp, amp].  Used for
// randomized initializations and property tests.
template <typename Scalar, typename Rng>
Loop<Scalar> random_star_loop(Rng& rng, Index n, Scalar base = Scalar(1), Scalar amp = Scalar(0.25),
                              int modes = 5, const Vec2<Scalar>& center = Vec2<Scalar>::Zero()) {
  std::vector<Scalar> a(modes), ph(modes);
  for (int k = 0; k < modes; ++k) {
    a[k] = amp * Scalar(2 * runif(rng) - 1) / Scalar(k + 1);
    ph[k] = Scalar(2) * Scalar(M_PI) * Scalar(runif(rng));
  }
  Loop<Scalar> l;
  l.pts.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const Scalar th = Scalar(2) * Scalar(M_PI) * Scalar(i) / Scalar(n);
    Scalar r = Scalar(1);
    for (int k = 0; k < modes; ++k) r += a[k] * std::cos(Scalar(k + 2) * th + ph[k]);
    r = std::max(r, Scalar(0.1)) * base;
    l.pts(i, 0) = center.x() + r * std::cos(th);
    l.pts(i, 1) = center.y() + r * std::sin(th);
  }
  return l;
}

// Uniformly scale a loop about the origin so the enclosed area becomes
// `target` (orientation preserved).
template <typename Scalar>
Loop<Scalar> scale_to_area(const Loop<Scalar>& l, Scalar target) {
  const Scalar a = std::abs(signed_area(l.pts));
  Loop<Scalar> out = l;
  out.pts *= std::sqrt(target / a);
  return out;
}

}  // namespace wulff2d
