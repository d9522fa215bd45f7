#pragma once

// The two-point convexity gauge
//
//   S(x) = max_y <nu(x), y - x>,   y over all boundary vertices,
//
// which is nonnegative, vanishes exactly where the boundary touches its
// convex hull, and on nonconvex or disconnected configurations supplies an
// explicit destabilizing field: at a stationary curve S obeys the elliptic
// inequality L_Phi S - Dg.nu S >= omega(S) away from argmax degeneracies, so
// pairing with S itself turns convexity failure into a sign certificate
// against the second variation.
//
// Everything here works on the discrete polygon: the max of a linear
// functional over a polygon is attained at vertices, so the vertex scan is
// exact, and an optional convex-hull restriction of the scan must reproduce
// the brute-force result bit for bit on generic data.

#include <cmath>
#include <string>
#include <vector>

#include "anisotropy.hpp"
#include "curve.hpp"
#include "potential.hpp"
#include "types.hpp"
#include "variation.hpp"

namespace wulff2d {

template <typename Scalar>
struct TwoPointField {
  VecX<Scalar> value;             // S per vertex, >= 0 up to roundoff
  std::vector<Index> argmax;      // partner vertex (global index; may be the vertex itself)
  VecX<Scalar> second_best;       // best competitor outside the argmax's contact window
  std::vector<char> nondegenerate;  // second_best < value - h^2
  VecX<Scalar> lphi;              // discrete L_Phi S (filled by lemma_key_check path)
  bool lphi_set = false;
  Scalar hmean = 0;
};

namespace detail {

// Hull-extreme vertices as *global indices* (ties kept at the lowest index).
template <typename Scalar>
std::vector<Index> hull_vertex_indices(const MultiCurve<Scalar>& c) {
  std::vector<Index> idx(static_cast<std::size_t>(c.vertex_count()));
  std::vector<Vec2<Scalar>> pos(idx.size());
  Index off = 0;
  std::size_t k = 0;
  for (const auto& l : c.loops) {
    for (Index i = 0; i < l.size(); ++i, ++k) {
      idx[k] = off + i;
      pos[k] = l.vertex(i);
    }
    off += l.size();
  }
  std::vector<std::size_t> order(idx.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pos[a].x() != pos[b].x()) return pos[a].x() < pos[b].x();
    if (pos[a].y() != pos[b].y()) return pos[a].y() < pos[b].y();
    return idx[a] < idx[b];
  });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return pos[a] == pos[b]; }),
              order.end());
  const std::size_t n = order.size();
  std::vector<std::size_t> h(2 * n);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (m >= 2 &&
           cross2<Scalar>(pos[h[m - 1]] - pos[h[m - 2]], pos[order[i]] - pos[h[m - 2]]) <= 0)
      --m;
    h[m++] = order[i];
  }
  for (std::size_t i = n - 1, t = m + 1; i-- > 0;) {
    while (m >= t &&
           cross2<Scalar>(pos[h[m - 1]] - pos[h[m - 2]], pos[order[i]] - pos[h[m - 2]]) <= 0)
      --m;
    h[m++] = order[i];
  }
  h.resize(m > 0 ? m - 1 : 0);
  std::vector<Index> out;
  out.reserve(h.size());
  for (std::size_t i : h) out.push_back(idx[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Vertex-to-vertex evaluation of S.  Ties go to the lowest global index.  The
// "second best" used for the nondegeneracy flag ignores the smooth rolloff
// right next to the argmax (a window of max(3, n/64) vertices along the
// partner's loop); it measures genuinely competing contact points.
//
// When the argmax is a different vertex, the reported value is refined by the
// parabola through the argmax and its two loop neighbours (in partner
// arclength).  The raw vertex maximum scallops at O(h^2) as the true maximizer
// drifts between samples, and second differences of S would amplify that to
// O(1); the local fit removes the scallop while leaving every symmetric or
// self-supported configuration (regular polygons, contact arcs) bit-exact.
template <typename Scalar>
TwoPointField<Scalar> two_point(const MultiCurve<Scalar>& c, bool hull_accelerated = false) {
  const Index N = c.vertex_count();
  TwoPointField<Scalar> f;
  f.value.resize(N);
  f.argmax.resize(static_cast<std::size_t>(N));
  f.second_best.resize(N);
  f.nondegenerate.resize(static_cast<std::size_t>(N));
  f.hmean = mean_edge_length(c);
  const Scalar h2 = f.hmean * f.hmean;

  std::vector<Vec2<Scalar>> pos(static_cast<std::size_t>(N));
  std::vector<std::size_t> loop_of(static_cast<std::size_t>(N));
  std::vector<Index> local_of(static_cast<std::size_t>(N)), loop_size(c.loops.size());
  std::vector<Index> offset(c.loops.size());
  {
    Index off = 0;
    for (std::size_t k = 0; k < c.loops.size(); ++k) {
      offset[k] = off;
      loop_size[k] = c.loops[k].size();
      for (Index i = 0; i < c.loops[k].size(); ++i) {
        pos[static_cast<std::size_t>(off + i)] = c.loops[k].vertex(i);
        loop_of[static_cast<std::size_t>(off + i)] = k;
        local_of[static_cast<std::size_t>(off + i)] = i;
      }
      off += c.loops[k].size();
    }
  }
  const auto ff = flat_frame(c);
  std::vector<Index> candidates;
  if (hull_accelerated) candidates = detail::hull_vertex_indices(c);

  for (Index i = 0; i < N; ++i) {
    const Vec2<Scalar> x = pos[static_cast<std::size_t>(i)];
    const Vec2<Scalar> nu = ff.vertex_normal.row(i).transpose();
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    Index arg = -1;
    if (hull_accelerated) {
      for (Index y : candidates) {
        const Scalar v = nu.dot(pos[static_cast<std::size_t>(y)] - x);
        if (v > best) {
          best = v;
          arg = y;
        }
      }
      // The vertex itself always competes (value 0); keeps S >= 0 even when
      // x is interior to the hull.
      if (Scalar(0) > best || (Scalar(0) == best && i < arg)) {
        best = 0;
        arg = i;
      }
    } else {
      for (Index y = 0; y < N; ++y) {
        const Scalar v = nu.dot(pos[static_cast<std::size_t>(y)] - x);
        if (v > best) {
          best = v;
          arg = y;
        }
      }
    }
    if (arg != i) {
      // subgrid refinement along the partner loop
      const std::size_t lp = loop_of[static_cast<std::size_t>(arg)];
      const Index np = loop_size[lp];
      const Index ja = local_of[static_cast<std::size_t>(arg)];
      const Vec2<Scalar> ym = pos[static_cast<std::size_t>(offset[lp] + (ja + np - 1) % np)];
      const Vec2<Scalar> yp = pos[static_cast<std::size_t>(offset[lp] + (ja + 1) % np)];
      const Vec2<Scalar> y0 = pos[static_cast<std::size_t>(arg)];
      const Scalar hm = (y0 - ym).norm(), hp = (yp - y0).norm();
      if (hm > 0 && hp > 0) {
        const Scalar dm = (best - nu.dot(ym - x)) / hm;  // >= 0: center is the max
        const Scalar dp = (nu.dot(yp - x) - best) / hp;  // <= 0
        const Scalar a2 = (dp - dm) / (hp + hm);         // quadratic coefficient, <= 0
        const Scalar b1 = (dp * hm + dm * hp) / (hp + hm);
        if (a2 < 0) best -= b1 * b1 / (4 * a2);
      }
    }
    f.value[i] = best;
    f.argmax[static_cast<std::size_t>(i)] = arg;

    const std::size_t la = loop_of[static_cast<std::size_t>(arg)];
    const Index na = loop_size[la];
    const Index win = std::max<Index>(3, na / 64);
    Scalar second = -std::numeric_limits<Scalar>::infinity();
    for (Index y = 0; y < N; ++y) {
      if (loop_of[static_cast<std::size_t>(y)] == la) {
        Index d = std::abs(local_of[static_cast<std::size_t>(y)] -
                           local_of[static_cast<std::size_t>(arg)]);
        d = std::min(d, na - d);
        if (d <= win) continue;
      }
      second = std::max(second, nu.dot(pos[static_cast<std::size_t>(y)] - x));
    }
    f.second_best[i] = second;
    f.nondegenerate[static_cast<std::size_t>(i)] = second < best - h2;
  }
  return f;
}

template <typename Scalar>
Scalar dirichlet_energy(const MultiCurve<Scalar>& c, const VecX<Scalar>& field) {
  if (field.size() != c.vertex_count()) throw DimensionMismatch("field length != vertex count");
  Scalar q = 0;
  Index off = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      const Scalar len = (l.vertex((i + 1) % n) - l.vertex(i)).norm();
      const Scalar d = (field[off + (i + 1) % n] - field[off + i]) / len;
      q += d * d * len;
    }
    off += n;
  }
  return q;
}

// ------------------------------------------------------ key-lemma inequality

template <typename Scalar>
struct LemmaKeyReport {
  VecX<Scalar> lhs;             // discrete L_Phi S
  VecX<Scalar> rhs;             // H(x) - H(y*) + <grad H(x), y* - x>
  std::vector<char> eligible;   // nondegenerate argmax, smooth at x and partner
  std::vector<char> passed;     // lhs >= rhs - tol_factor * h (eligible only)
  Index eligible_count = 0;
  Index pass_count = 0;
  Scalar pass_fraction = 1;     // over eligible vertices; 1 when none eligible
  Scalar tol = 0;
};

// Checks the discrete version of the viscosity inequality satisfied by S:
// at eligible vertices, applying the Jacobi stencil to S must dominate the
// curvature comparison H(x) - H(y*) + <grad H(x), y* - x> up to an O(h)
// margin.  grad H is the tangential centered difference of the curvature
// field, widened to a two-edge stencil near high-turning vertices.
template <typename Scalar>
LemmaKeyReport<Scalar> lemma_key_check(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                                       TwoPointField<Scalar>& f, Scalar tol_factor = Scalar(10),
                                       Scalar smooth_cap = Scalar(0.5),
                                       Scalar widen_cap = Scalar(0.2)) {
  const Index N = c.vertex_count();
  if (f.value.size() != N) throw DimensionMismatch("two-point field does not match curve");
  const auto zero = Potential<Scalar>::zero();
  const auto J = assemble_stability(c, phi, zero);  // form = K - diag(c kappa^2 m)
  const VecX<Scalar> minusL = J.form * f.value;     // (-L_Phi S) * mass
  f.lphi = -(minusL.array() / J.mass.array());
  f.lphi_set = true;

  const VecX<Scalar> hphi = anisotropic_curvature(c, phi);
  // positions, tangents, turning in flat indexing
  std::vector<Vec2<Scalar>> pos(static_cast<std::size_t>(N));
  VecX<Scalar> turning(N);
  Points<Scalar> vtan(N, 2);
  VecX<Scalar> dhds(N);
  Index off = 0;
  for (const auto& l : c.loops) {
    const auto fr = make_frame(l);
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      pos[static_cast<std::size_t>(off + i)] = l.vertex(i);
      turning[off + i] = fr.turning[i];
      vtan.row(off + i) = fr.vertex_tangent.row(i);
    }
    for (Index i = 0; i < n; ++i) {
      const auto at = [&](Index k) { return off + ((i + k) % n + n) % n; };
      const bool widen = std::abs(fr.turning[i]) > widen_cap ||
                         std::abs(fr.turning[(i + 1) % n]) > widen_cap ||
                         std::abs(fr.turning[(i + n - 1) % n]) > widen_cap;
      if (!widen) {
        const Scalar ds = fr.edge_len[(i + n - 1) % n] + fr.edge_len[i];
        dhds[off + i] = (hphi[at(1)] - hphi[at(-1)]) / ds;
      } else {
        const Scalar ds = fr.edge_len[(i + n - 2) % n] + fr.edge_len[(i + n - 1) % n] +
                          fr.edge_len[i] + fr.edge_len[(i + 1) % n];
        dhds[off + i] = (hphi[at(2)] - hphi[at(-2)]) / ds;
      }
    }
    off += n;
  }

  LemmaKeyReport<Scalar> r;
  r.lhs = f.lphi;
  r.rhs.resize(N);
  r.eligible.resize(static_cast<std::size_t>(N));
  r.passed.resize(static_cast<std::size_t>(N));
  r.tol = tol_factor * f.hmean;
  for (Index i = 0; i < N; ++i) {
    const Index j = f.argmax[static_cast<std::size_t>(i)];
    const Vec2<Scalar> gradh = dhds[i] * vtan.row(i).transpose();
    r.rhs[i] = hphi[i] - hphi[j] + gradh.dot(pos[static_cast<std::size_t>(j)] -
                                             pos[static_cast<std::size_t>(i)]);
    const bool smooth = std::abs(turning[i]) <= smooth_cap && std::abs(turning[j]) <= smooth_cap;
    const bool el = f.nondegenerate[static_cast<std::size_t>(i)] && smooth;
    r.eligible[static_cast<std::size_t>(i)] = el;
    const bool ok = r.lhs[i] >= r.rhs[i] - r.tol;
    r.passed[static_cast<std::size_t>(i)] = el && ok;
    if (el) {
      ++r.eligible_count;
      if (ok) ++r.pass_count;
    }
  }
  if (r.eligible_count > 0)
    r.pass_fraction = Scalar(r.pass_count) / Scalar(r.eligible_count);
  return r;
}

// --------------------------------------------------- instability certificates

template <typename Scalar>
struct SubsolutionCertificate {
  Scalar q_s;       // stability form evaluated on S
  Scalar i_omega;   // sum omega(S) S m  (modulus of convexity of g)
  Scalar margin;    // -i_omega - q_s; >= -tol at stationary configurations
  Scalar tol;       // tol_factor * h * sup S
  bool pass;        // q_s <= -i_omega + tol
  ModulusKind modulus_kind;
  std::string label;  // "at critical point" or "approximate"
  Scalar residual_sup;
};

// Integrated form of the elliptic inequality for S: at a stationary curve,
// Q(S) <= -sum omega(S) S m up to O(h).  Away from stationarity the bound
// carries no guarantee, hence the label.
template <typename Scalar>
SubsolutionCertificate<Scalar> subsolution_certificate(
    const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi, const Potential<Scalar>& g,
    const TwoPointField<Scalar>& f, bool constrained, Scalar tol_factor = Scalar(10),
    Scalar critical_residual = Scalar(1e-3)) {
  SubsolutionCertificate<Scalar> cert;
  cert.q_s = stability_form(c, phi, g, f.value);
  const auto omega = g.modulus();
  cert.modulus_kind = omega.kind();
  const auto ff = flat_frame(c);
  Scalar io = 0;
  for (Index i = 0; i < f.value.size(); ++i)
    io += omega(std::max(f.value[i], Scalar(0))) * std::max(f.value[i], Scalar(0)) * ff.mass[i];
  cert.i_omega = io;
  // S-scale tolerance with an h^2 floor so near-zero fields (converged
  // minimizers) compare against mesh accuracy instead of an empty tolerance.
  cert.tol = tol_factor * f.hmean *
             std::max(f.value.template lpNorm<Eigen::Infinity>(), f.hmean * f.hmean);
  cert.margin = -cert.i_omega - cert.q_s;
  cert.pass = cert.q_s <= -cert.i_omega + cert.tol;
  cert.residual_sup = first_variation_residual(c, phi, g, constrained).residual_sup;
  cert.label = cert.residual_sup < critical_residual ? "at critical point" : "approximate";
  return cert;
}

template <typename Scalar>
struct ComponentVerdict {
  std::vector<std::size_t> loop_indices;
  Scalar q_s;
  Scalar i_omega;
  Scalar s_sup;
  bool unstable;  // Q restricted to this component is negative beyond the guard
};

template <typename Scalar>
struct ComponentInstabilityReport {
  std::vector<ComponentVerdict<Scalar>> verdicts;
  bool any_unstable = false;
};

// Restricts S to each connected region and evaluates the stability form
// there.  A strictly negative value is a witness that the component is not
// unconditionally stable (S restricted to it is an admissible variation of
// that component alone).
template <typename Scalar>
ComponentInstabilityReport<Scalar> component_instability(const MultiCurve<Scalar>& c,
                                                         const Anisotropy<Scalar>& phi,
                                                         const Potential<Scalar>& g,
                                                         const TwoPointField<Scalar>& f,
                                                         Scalar tol_factor = Scalar(10)) {
  ComponentInstabilityReport<Scalar> rep;
  const auto groups = component_loop_indices(c);
  const auto omega = g.modulus();
  std::vector<Index> offsets(c.loops.size());
  {
    Index off = 0;
    for (std::size_t k = 0; k < c.loops.size(); ++k) {
      offsets[k] = off;
      off += c.loops[k].size();
    }
  }
  for (const auto& group : groups) {
    MultiCurve<Scalar> part;
    std::vector<Index> flat;
    for (std::size_t k : group) {
      part.loops.push_back(c.loops[k]);
      for (Index i = 0; i < c.loops[k].size(); ++i) flat.push_back(offsets[k] + i);
    }
    VecX<Scalar> s(static_cast<Index>(flat.size()));
    for (std::size_t i = 0; i < flat.size(); ++i) s[static_cast<Index>(i)] = f.value[flat[i]];
    ComponentVerdict<Scalar> v;
    v.loop_indices = group;
    v.q_s = stability_form(part, phi, g, s);
    const auto pf = flat_frame(part);
    Scalar io = 0;
    for (Index i = 0; i < s.size(); ++i)
      io += omega(std::max(s[i], Scalar(0))) * std::max(s[i], Scalar(0)) * pf.mass[i];
    v.i_omega = io;
    v.s_sup = s.size() > 0 ? s.template lpNorm<Eigen::Infinity>() : Scalar(0);
    const Scalar guard = tol_factor * f.hmean * std::max(v.s_sup, Scalar(0));
    v.unstable = v.q_s < -guard && v.s_sup > 0;
    rep.any_unstable = rep.any_unstable || v.unstable;
    rep.verdicts.push_back(std::move(v));
  }
  return rep;
}

}  // namespace wulff2d
