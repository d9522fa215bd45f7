#pragma once

// Confining bulk potentials g and their convexity moduli.
//
//   zero       g = 0
//   quadratic  g(x) = a |x - c|^2 + b,                    a >= 0
//   tilted     g(x) = a |x - c|^2 + <v, x> + b            (still convex)
//   sdist      g(x) = signed_distance(x, base) / tau      (negative inside)
//
// The convexity modulus omega is an increasing lower bound with omega(0) = 0
// for the Bregman gap g(y) - g(x) - <Dg(x), y - x> >= omega(|y - x|).  For the
// quadratic families it is exactly a t^2; otherwise an empirical binned lower
// envelope is available, and a sampled negative gap beyond roundoff means the
// input was not convex.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "curve.hpp"
#include "types.hpp"

namespace wulff2d {

enum class PotentialFamily { zero, quadratic, tilted, sdist };
enum class ModulusKind { exact, sampled, zero };

// Increasing lower bound for the Bregman gap; either a closed form a t^2 or a
// piecewise-linear envelope through sampled nodes.
template <typename Scalar>
class ConvexityModulus {
 public:
  static ConvexityModulus quadratic(Scalar a) {
    ConvexityModulus m;
    m.kind_ = a > 0 ? ModulusKind::exact : ModulusKind::zero;
    m.a_ = a;
    return m;
  }
  static ConvexityModulus envelope(std::vector<Scalar> t, std::vector<Scalar> w) {
    ConvexityModulus m;
    m.kind_ = ModulusKind::sampled;
    m.t_ = std::move(t);
    m.w_ = std::move(w);
    return m;
  }

  ModulusKind kind() const { return kind_; }
  Scalar quadratic_coefficient() const { return a_; }
  const std::vector<Scalar>& nodes() const { return t_; }
  const std::vector<Scalar>& values() const { return w_; }

  Scalar operator()(Scalar t) const {
    if (t <= 0) return 0;
    if (kind_ != ModulusKind::sampled) return a_ * t * t;
    if (t_.empty()) return 0;
    if (t <= t_.front()) return w_.front() * (t / t_.front());  // through the origin
    if (t >= t_.back()) return w_.back();                       // increasing, so a valid bound
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin());
    const Scalar s = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return (1 - s) * w_[i - 1] + s * w_[i];
  }

  bool strictly_positive() const {
    if (kind_ == ModulusKind::exact) return a_ > 0;
    if (kind_ == ModulusKind::zero) return false;
    for (Scalar w : w_)
      if (!(w > 0)) return false;
    return !w_.empty();
  }

 private:
  ModulusKind kind_ = ModulusKind::zero;
  Scalar a_ = 0;
  std::vector<Scalar> t_, w_;
};

template <typename Scalar>
class Potential {
 public:
  static Potential zero() { return Potential(PotentialFamily::zero); }

  static Potential quadratic(Scalar a, const Vec2<Scalar>& c = Vec2<Scalar>::Zero(),
                             Scalar b = Scalar(0)) {
    if (a < 0) throw Error("quadratic potential needs a >= 0");
    Potential g(PotentialFamily::quadratic);
    g.a_ = a;
    g.c_ = c;
    g.b_ = b;
    return g;
  }

  static Potential tilted(Scalar a, const Vec2<Scalar>& c, const Vec2<Scalar>& v,
                          Scalar b = Scalar(0)) {
    if (a < 0) throw Error("tilted potential needs a >= 0");
    Potential g(PotentialFamily::tilted);
    g.a_ = a;
    g.c_ = c;
    g.v_ = v;
    g.b_ = b;
    return g;
  }

  // Defined below; needs the curve kernel.
  static Potential signed_distance(const MultiCurve<Scalar>& base, Scalar tau);

  PotentialFamily family() const { return family_; }
  Scalar tau() const { return tau_; }
  bool nonconvex_base_warning() const { return nonconvex_base_; }
  const MultiCurve<Scalar>& base() const { return *base_; }

  Scalar value(const Vec2<Scalar>& x) const {
    switch (family_) {
      case PotentialFamily::zero: return 0;
      case PotentialFamily::quadratic: return a_ * (x - c_).squaredNorm() + b_;
      case PotentialFamily::tilted: return a_ * (x - c_).squaredNorm() + v_.dot(x) + b_;
      case PotentialFamily::sdist: return sdist(x).first / tau_;
    }
    return 0;
  }

  Vec2<Scalar> grad(const Vec2<Scalar>& x) const {
    switch (family_) {
      case PotentialFamily::zero: return Vec2<Scalar>::Zero();
      case PotentialFamily::quadratic: return 2 * a_ * (x - c_);
      case PotentialFamily::tilted: return 2 * a_ * (x - c_) + v_;
      case PotentialFamily::sdist: return sdist(x).second / tau_;
    }
    return Vec2<Scalar>::Zero();
  }

  std::pair<Scalar, Vec2<Scalar>> value_with_grad(const Vec2<Scalar>& x) const {
    if (family_ == PotentialFamily::sdist) {
      auto [d, gr] = sdist(x);
      return {d / tau_, gr / tau_};
    }
    return {value(x), grad(x)};
  }

  // Closed-form modulus where available; sdist is 1-Lipschitz-affine along
  // rays and carries no positive closed-form modulus, so it reports zero
  // (a valid, if weak, lower bound).
  ConvexityModulus<Scalar> modulus() const {
    switch (family_) {
      case PotentialFamily::quadratic:
      case PotentialFamily::tilted: return ConvexityModulus<Scalar>::quadratic(a_);
      default: return ConvexityModulus<Scalar>::quadratic(0);
    }
  }

  // Signed distance (negative inside) and its gradient.  On the medial axis
  // the nearest point is not unique; there the reported gradient is the
  // normalized average of the directions to the tied feet, so that symmetric
  // configurations get symmetric (Clarke-midpoint) gradients instead of a
  // roundoff-selected branch.  `gap` (optional) receives second_nearest -
  // nearest over candidates with well-separated feet; ~0 flags the axis.
  std::pair<Scalar, Vec2<Scalar>> sdist(const Vec2<Scalar>& x, Scalar* gap = nullptr) const {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Scalar second = std::numeric_limits<Scalar>::infinity();
    Vec2<Scalar> foot = Vec2<Scalar>::Zero();
    Vec2<Scalar> foot2 = Vec2<Scalar>::Zero();
    Vec2<Scalar> best_edge = Vec2<Scalar>::Zero();
    const auto distinct = [](const Vec2<Scalar>& p, const Vec2<Scalar>& q, Scalar d) {
      return (p - q).norm() > Scalar(1e-9) + d * Scalar(1e-6);
    };
    for (const auto& l : base_->loops) {
      const Index n = l.size();
      for (Index i = 0; i < n; ++i) {
        const Vec2<Scalar> a = l.vertex(i), b = l.vertex((i + 1) % n);
        const Vec2<Scalar> ab = b - a;
        Scalar t = ab.squaredNorm() > 0 ? (x - a).dot(ab) / ab.squaredNorm() : Scalar(0);
        t = std::clamp(t, Scalar(0), Scalar(1));
        const Vec2<Scalar> p = a + t * ab;
        const Scalar d = (x - p).norm();
        if (d < best) {
          if (distinct(p, foot, d)) {  // demote the old nearest, else absorb it
            second = best;
            foot2 = foot;
          }
          best = d;
          foot = p;
          best_edge = ab;
        } else if (d < second && distinct(p, foot, d)) {
          second = d;
          foot2 = p;
        }
      }
    }
    if (gap) *gap = second - best;
    int inside = 0;
    for (const auto& l : base_->loops)
      if (point_in_loop(x, l)) inside ^= 1;
    const Scalar sign = inside ? Scalar(-1) : Scalar(1);
    const Vec2<Scalar> dir = x - foot;
    const Scalar dn = dir.norm();
    const Scalar elen = best_edge.norm();
    // On (or within rounding of) the boundary the foot offset is noise; the
    // gradient there is the outward normal of the nearest edge, with the loop
    // orientation encoding which side is the interior.
    if (dn <= Scalar(1e-9) * elen) return {sign * best, rot_cw<Scalar>(best_edge) / elen};
    Vec2<Scalar> u = dir / dn;
    if (second - best <= Scalar(1e-10) * (best + elen)) {
      const Vec2<Scalar> dir2 = x - foot2;
      const Scalar dn2 = dir2.norm();
      if (dn2 > 0) {
        const Vec2<Scalar> m = u + dir2 / dn2;
        const Scalar mn = m.norm();
        if (mn > Scalar(1e-6)) u = m / mn;
      }
    }
    return {sign * best, sign * u};
  }

 private:
  explicit Potential(PotentialFamily f) : family_(f) {}

  PotentialFamily family_;
  Scalar a_ = 0, b_ = 0, tau_ = 1;
  Vec2<Scalar> c_ = Vec2<Scalar>::Zero(), v_ = Vec2<Scalar>::Zero();
  std::shared_ptr<const MultiCurve<Scalar>> base_;
  bool nonconvex_base_ = false;
};

template <typename Scalar>
Potential<Scalar> Potential<Scalar>::signed_distance(const MultiCurve<Scalar>& base, Scalar tau) {
  if (!(tau > 0)) throw Error("signed-distance potential needs tau > 0");
  Potential g(PotentialFamily::sdist);
  g.tau_ = tau;
  g.base_ = std::make_shared<const MultiCurve<Scalar>>(base);
  // A nonconvex base makes g nonconvex; warn, do not reject (the scheme that
  // uses this potential only needs g near the front).
  const auto hull = convex_hull(base);
  const Scalar h = mean_edge_length(base);
  g.nonconvex_base_ = hull.distance.maxCoeff() > 5 * h * h + Scalar(1e-12) ||
                      base.loops.size() > 1;
  return g;
}

template <typename Scalar>
Potential<Scalar> signed_distance_potential(const MultiCurve<Scalar>& base, Scalar tau) {
  return Potential<Scalar>::signed_distance(base, tau);
}

// Empirical convexity modulus: lower envelope of Bregman gaps over sampled
// point pairs in the disk of radius R, binned by pair distance and made
// increasing from the right (the largest increasing minorant of the bins).
// Gaps below -1e-9 mean g was not convex on the disk.
template <typename Scalar>
ConvexityModulus<Scalar> convexity_modulus(const Potential<Scalar>& g, Scalar R, int m = 120,
                                           std::uint64_t seed = 1, int bins = 32) {
  if (m < 100) throw Error("convexity modulus needs at least 100 samples");
  if (g.family() == PotentialFamily::quadratic || g.family() == PotentialFamily::tilted)
    return g.modulus();

  std::mt19937_64 rng(seed);
  std::vector<Vec2<Scalar>> pts(static_cast<std::size_t>(m));
  for (auto& p : pts) {
    // rejection-sample the disk
    for (;;) {
      const Scalar x = Scalar(2 * runif(rng) - 1) * R, y = Scalar(2 * runif(rng) - 1) * R;
      if (x * x + y * y <= R * R) {
        p = Vec2<Scalar>(x, y);
        break;
      }
    }
  }
  const Scalar tmax = 2 * R;
  std::vector<Scalar> env(static_cast<std::size_t>(bins), std::numeric_limits<Scalar>::infinity());
  for (int i = 0; i < m; ++i) {
    const auto [gi, dgi] = g.value_with_grad(pts[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const Vec2<Scalar> d = pts[static_cast<std::size_t>(j)] - pts[static_cast<std::size_t>(i)];
      const Scalar gap = g.value(pts[static_cast<std::size_t>(j)]) - gi - dgi.dot(d);
      if (gap < Scalar(-1e-9))
        throw NonConvexSample("negative Bregman gap " + std::to_string(static_cast<double>(gap)));
      const int bin = std::min(bins - 1, static_cast<int>(d.norm() / tmax * Scalar(bins)));
      env[static_cast<std::size_t>(bin)] =
          std::min(env[static_cast<std::size_t>(bin)], std::max(gap, Scalar(0)));
    }
  }
  std::vector<Scalar> t, w;
  Scalar tail = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> mono(static_cast<std::size_t>(bins));
  for (int b = bins - 1; b >= 0; --b) {
    if (std::isfinite(env[static_cast<std::size_t>(b)]))
      tail = std::min(tail, env[static_cast<std::size_t>(b)]);
    mono[static_cast<std::size_t>(b)] = tail;
  }
  for (int b = 0; b < bins; ++b) {
    if (!std::isfinite(mono[static_cast<std::size_t>(b)])) continue;
    t.push_back(tmax * Scalar(b + 1) / Scalar(bins));
    w.push_back(mono[static_cast<std::size_t>(b)]);
  }
  return ConvexityModulus<Scalar>::envelope(std::move(t), std::move(w));
}

// Coercivity probe: g on the radius-R circle should exceed its sampled
// interior minimum by at least 1 if R bounds the working domain.
template <typename Scalar>
bool coercive_on_radius(const Potential<Scalar>& g, Scalar R, int m = 256) {
  Scalar ring_min = std::numeric_limits<Scalar>::infinity();
  Scalar inner_min = std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k < m; ++k) {
    const Scalar th = Scalar(2) * Scalar(M_PI) * Scalar(k) / Scalar(m);
    const Vec2<Scalar> u(std::cos(th), std::sin(th));
    ring_min = std::min(ring_min, g.value(R * u));
    for (Scalar r : {Scalar(0), Scalar(0.25) * R, Scalar(0.5) * R, Scalar(0.75) * R})
      inner_min = std::min(inner_min, g.value(r * u));
  }
  return ring_min >= inner_min + 1;
}

}  // namespace wulff2d
