#pragma once

// First and second variation machinery for F(E) = sum_e Phi(nu_e) len_e +
// bulk quadrature of g over the enclosed region.
//
// The bulk integral fans each loop from its vertex centroid into signed
// triangles and applies the edge-midpoint 3-point rule (degree-2 exact), so
// the integral over the polygon is exact for quadratic g and holes subtract
// automatically.
//
// All per-vertex gradients here are the *exact* derivatives of the discrete
// functionals (surface term, bulk quadrature including the centroid chain
// rule, enclosed area).   The stationarity residual is the density of that
// exact gradient in the lumped metric, so the finite-difference identity
// dF/dt = sum_i residual_i phi_i duallen_i holds to roundoff at every curve,
// not just asymptotically.  The curvature H_Phi(x_i) = <dE_surf/dx_i, nu_i> /
// duallen_i reproduces 1/r exactly on regular polygons inscribed in circles.
//
// The stability form is
//   Q(phi) = sum_e c(nu_e) ((phi_j - phi_i)/l_e)^2 l_e
//          - sum_i c(nu_i) kappa_i^2 phi_i^2 m_i + sum_i Dg.nu phi_i^2 m_i
// with lumped mass m_i (dual length); the matrix is symmetric and the
// quadratic form equals <phi, (-L + Dg.nu) phi> in the lumped inner product
// by construction (discrete integration by parts is exact).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "anisotropy.hpp"
#include "curve.hpp"
#include "potential.hpp"
#include "types.hpp"

namespace wulff2d {

template <typename Scalar>
struct EnergyBreakdown {
  Scalar total, surface, bulk;
};

template <typename Scalar>
Scalar surface_energy(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi) {
  Scalar e = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      const Vec2<Scalar> edge = l.vertex((i + 1) % n) - l.vertex(i);
      e += phi.value(rot_cw(edge));  // Phi(nu) * len by one-homogeneity
    }
  }
  return e;
}

// Bulk term.
//
// For the distance-type potential the volume integral against the stored
// base region is replaced by its thin-shell equivalent: up to a constant
// that does not depend on the current curve,
//   int_E sdist(., base)/tau = sum_i m_i sdist(v_i)^2 / (2 tau) + O(d^3),
// the integral of the linear normal profile of the signed distance over the
// region swept between the two fronts (m_i is the dual edge length, d the
// front separation).  The shell form only samples the potential on the
// moving front, where it is smooth; interior quadrature would sample the
// gradient jump across the ridge of the distance function, which the 1/tau
// scaling amplifies into an unusable derivative for elongated regions.
//
// Every other family integrates over the centroid fan, each triangle
// (centroid, p, q) using the interior degree-2 rule at barycentric
// (2/3, 1/6, 1/6) with weights area/3.  Interior points (rather than the
// edge-midpoint rule of the same degree) keep the samples strictly inside,
// so the chain-rule gradient below is the honest derivative of this value.
template <typename Scalar>
Scalar bulk_energy(const MultiCurve<Scalar>& c, const Potential<Scalar>& g) {
  if (g.family() == PotentialFamily::zero) return 0;
  if (g.family() == PotentialFamily::sdist) {
    Scalar e = 0;
    const Scalar tau = g.tau();
    for (const auto& l : c.loops) {
      const Index n = l.size();
      for (Index i = 0; i < n; ++i) {
        const Scalar m = ((l.vertex(i) - l.vertex((i + n - 1) % n)).norm() +
                          (l.vertex((i + 1) % n) - l.vertex(i)).norm()) /
                         2;
        const Scalar s = tau * g.value(l.vertex(i));
        e += m * s * s / (2 * tau);
      }
    }
    return e;
  }
  Scalar e = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    const Vec2<Scalar> ctr = l.pts.colwise().mean().transpose();
    for (Index i = 0; i < n; ++i) {
      const Vec2<Scalar> p = l.vertex(i), q = l.vertex((i + 1) % n);
      const Scalar area = cross2<Scalar>(p - ctr, q - ctr) / 2;
      const Scalar s = g.value((4 * ctr + p + q) / 6) + g.value((ctr + 4 * p + q) / 6) +
                       g.value((ctr + p + 4 * q) / 6);
      e += area * s / 3;
    }
  }
  return e;
}

template <typename Scalar>
EnergyBreakdown<Scalar> energy(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                               const Potential<Scalar>& g) {
  const Scalar s = surface_energy(c, phi);
  const Scalar b = bulk_energy(c, g);
  return {s + b, s, b};
}

// ---------------------------------------------------------- exact gradients

// d(surface)/d(vertex), flat indexing.
template <typename Scalar>
Points<Scalar> surface_gradient(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi) {
  Points<Scalar> grad(c.vertex_count(), 2);
  Index off = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      const Vec2<Scalar> np = rot_cw<Scalar>(l.vertex(i) - l.vertex((i + n - 1) % n));
      const Vec2<Scalar> ni = rot_cw<Scalar>(l.vertex((i + 1) % n) - l.vertex(i));
      grad.row(off + i) = rot_ccw<Scalar>(phi.grad(np) - phi.grad(ni)).transpose();
    }
    off += n;
  }
  return grad;
}

// d(bulk quadrature)/d(vertex); includes the dependence through the fan
// centroid (dc/dv_i = I/n), or, for the distance-type potential, through the
// dual lengths of the shell form.
template <typename Scalar>
Points<Scalar> bulk_gradient(const MultiCurve<Scalar>& c, const Potential<Scalar>& g) {
  Points<Scalar> grad = Points<Scalar>::Zero(c.vertex_count(), 2);
  if (g.family() == PotentialFamily::zero) return grad;
  if (g.family() == PotentialFamily::sdist) {
    const Scalar tau = g.tau();
    Index off0 = 0;
    for (const auto& l : c.loops) {
      const Index n = l.size();
      VecX<Scalar> s(n), elen(n);
      Points<Scalar> ehat(n, 2);
      for (Index i = 0; i < n; ++i) {
        s[i] = tau * g.value(l.vertex(i));
        const Vec2<Scalar> e = l.vertex((i + 1) % n) - l.vertex(i);
        elen[i] = e.norm();
        ehat.row(i) = (e / elen[i]).transpose();
      }
      for (Index i = 0; i < n; ++i) {
        const Index im = (i + n - 1) % n, ip = (i + 1) % n;
        const Scalar m = (elen[im] + elen[i]) / 2;
        const Vec2<Scalar> ds = tau * g.grad(l.vertex(i));
        grad.row(off0 + i) = (m * s[i] / tau) * ds.transpose() +
                             ((s[im] * s[im] + s[i] * s[i]) * ehat.row(im) -
                              (s[i] * s[i] + s[ip] * s[ip]) * ehat.row(i)) /
                                 (4 * tau);
      }
      off0 += n;
    }
    return grad;
  }
  Index off = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    const Vec2<Scalar> ctr = l.pts.colwise().mean().transpose();
    Vec2<Scalar> gctr = Vec2<Scalar>::Zero();
    for (Index i = 0; i < n; ++i) {
      const Vec2<Scalar> p = l.vertex(i), q = l.vertex((i + 1) % n);
      const Vec2<Scalar> xa = (4 * ctr + p + q) / 6, xb = (ctr + 4 * p + q) / 6,
                         xc = (ctr + p + 4 * q) / 6;
      const Scalar area = cross2<Scalar>(p - ctr, q - ctr) / 2;
      const Scalar s = g.value(xa) + g.value(xb) + g.value(xc);
      const Vec2<Scalar> da_dp = -rot_ccw<Scalar>(q - ctr) / 2;
      const Vec2<Scalar> da_dq = rot_ccw<Scalar>(p - ctr) / 2;
      const Vec2<Scalar> dga = g.grad(xa), dgb = g.grad(xb), dgc = g.grad(xc);
      grad.row(off + i) += ((s / 3) * da_dp + (area / 18) * (dga + 4 * dgb + dgc)).transpose();
      grad.row(off + (i + 1) % n) +=
          ((s / 3) * da_dq + (area / 18) * (dga + dgb + 4 * dgc)).transpose();
      gctr += (s / 3) * (-da_dp - da_dq) + (area / 18) * (4 * dga + dgb + dgc);
    }
    for (Index i = 0; i < n; ++i) grad.row(off + i) += (gctr / Scalar(n)).transpose();
    off += n;
  }
  return grad;
}

// d(enclosed area)/d(vertex) = (l_prev nu_prev + l_next nu_next)/2.
template <typename Scalar>
Points<Scalar> area_gradient(const MultiCurve<Scalar>& c) {
  Points<Scalar> grad(c.vertex_count(), 2);
  Index off = 0;
  for (const auto& l : c.loops) {
    const Index n = l.size();
    for (Index i = 0; i < n; ++i)
      grad.row(off + i) =
          rot_ccw<Scalar>(l.vertex((i + n - 1) % n) - l.vertex((i + 1) % n)).transpose() / 2;
    off += n;
  }
  return grad;
}

// ----------------------------------------------------------- flat vertex data

template <typename Scalar>
struct FlatFrame {
  Points<Scalar> vertex_normal;
  VecX<Scalar> mass;    // dual lengths
  VecX<Scalar> kappa;   // turning / dual length
  Scalar hmean;
};

template <typename Scalar>
FlatFrame<Scalar> flat_frame(const MultiCurve<Scalar>& c) {
  FlatFrame<Scalar> f;
  const Index N = c.vertex_count();
  f.vertex_normal.resize(N, 2);
  f.mass.resize(N);
  f.kappa.resize(N);
  Index off = 0;
  for (const auto& l : c.loops) {
    const auto fr = make_frame(l);
    const Index n = l.size();
    f.vertex_normal.middleRows(off, n) = fr.vertex_normal;
    f.mass.segment(off, n) = fr.dual_len;
    f.kappa.segment(off, n) = fr.kappa;
    off += n;
  }
  f.hmean = mean_edge_length(c);
  return f;
}

// Anisotropic curvature H_Phi per vertex: normal component of the exact
// surface gradient in the lumped metric.  Positive on convex regions.
template <typename Scalar>
VecX<Scalar> anisotropic_curvature(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi) {
  const auto gs = surface_gradient(c, phi);
  const auto f = flat_frame(c);
  VecX<Scalar> h(c.vertex_count());
  for (Index i = 0; i < h.size(); ++i)
    h[i] = gs.row(i).dot(f.vertex_normal.row(i)) / f.mass[i];
  return h;
}

// ------------------------------------------------------- stationarity report

template <typename Scalar>
struct VariationReport {
  Scalar total, surface, bulk;
  Scalar mu;             // multiplier (weighted mean of H_Phi + bulk density); 0 unconstrained
  VecX<Scalar> hphi;         // anisotropic curvature
  VecX<Scalar> bulk_density; // normal density of the exact bulk gradient (~ g at vertices)
  VecX<Scalar> gvals;        // g sampled at vertices, for reference
  VecX<Scalar> residual;     // hphi + bulk_density - mu
  Scalar residual_sup;
};

template <typename Scalar>
VariationReport<Scalar> first_variation_residual(const MultiCurve<Scalar>& c,
                                                 const Anisotropy<Scalar>& phi,
                                                 const Potential<Scalar>& g, bool constrained) {
  VariationReport<Scalar> r;
  const auto e = energy(c, phi, g);
  r.total = e.total;
  r.surface = e.surface;
  r.bulk = e.bulk;
  const auto gs = surface_gradient(c, phi);
  const auto gb = bulk_gradient(c, g);
  const auto f = flat_frame(c);
  const Index N = c.vertex_count();
  r.hphi.resize(N);
  r.bulk_density.resize(N);
  r.gvals.resize(N);
  Index off = 0;
  for (const auto& l : c.loops) {
    for (Index i = 0; i < l.size(); ++i) r.gvals[off + i] = g.value(l.vertex(i));
    off += l.size();
  }
  for (Index i = 0; i < N; ++i) {
    r.hphi[i] = gs.row(i).dot(f.vertex_normal.row(i)) / f.mass[i];
    r.bulk_density[i] = gb.row(i).dot(f.vertex_normal.row(i)) / f.mass[i];
  }
  const VecX<Scalar> density = r.hphi + r.bulk_density;
  r.mu = constrained ? density.dot(f.mass) / f.mass.sum() : Scalar(0);
  r.residual = density.array() - r.mu;
  r.residual_sup = r.residual.template lpNorm<Eigen::Infinity>();
  return r;
}

// ------------------------------------------------------------ Jacobi operator

template <typename Scalar>
struct JacobiOperator {
  Eigen::SparseMatrix<Scalar> form;  // Q(phi) = phi' form phi
  VecX<Scalar> mass;
  // Density action (-L + Dg.nu) phi = (form * phi) ./ mass.
};

template <typename Scalar>
JacobiOperator<Scalar> assemble_stability(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                                          const Potential<Scalar>& g) {
  const Index N = c.vertex_count();
  JacobiOperator<Scalar> J;
  J.mass.resize(N);
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(4 * N));
  Index off = 0;
  for (const auto& l : c.loops) {
    const auto fr = make_frame(l);
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      const Index j = (i + 1) % n;
      const Scalar w = tangential_coefficient<Scalar>(phi, fr.edge_normal.row(i).transpose()) /
                       fr.edge_len[i];
      trip.emplace_back(off + i, off + i, w);
      trip.emplace_back(off + j, off + j, w);
      trip.emplace_back(off + i, off + j, -w);
      trip.emplace_back(off + j, off + i, -w);
    }
    for (Index i = 0; i < n; ++i) {
      const Scalar cv = tangential_coefficient<Scalar>(phi, fr.vertex_normal.row(i).transpose());
      const Vec2<Scalar> x = l.vertex(i);
      const Scalar dng = g.grad(x).dot(fr.vertex_normal.row(i).transpose());
      trip.emplace_back(off + i, off + i,
                        (-cv * fr.kappa[i] * fr.kappa[i] + dng) * fr.dual_len[i]);
      J.mass[off + i] = fr.dual_len[i];
    }
    off += n;
  }
  J.form.resize(N, N);
  J.form.setFromTriplets(trip.begin(), trip.end());
  return J;
}

// Direct evaluation of the stability form (same value as phi' form phi up to
// roundoff; kept separate so the integration-by-parts identity is testable).
template <typename Scalar>
Scalar stability_form(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                      const Potential<Scalar>& g, const VecX<Scalar>& field) {
  if (field.size() != c.vertex_count()) throw DimensionMismatch("field length != vertex count");
  Scalar q = 0;
  Index off = 0;
  for (const auto& l : c.loops) {
    const auto fr = make_frame(l);
    const Index n = l.size();
    for (Index i = 0; i < n; ++i) {
      const Index j = (i + 1) % n;
      const Scalar ce = tangential_coefficient<Scalar>(phi, fr.edge_normal.row(i).transpose());
      const Scalar d = (field[off + j] - field[off + i]) / fr.edge_len[i];
      q += ce * d * d * fr.edge_len[i];
    }
    for (Index i = 0; i < n; ++i) {
      const Scalar cv = tangential_coefficient<Scalar>(phi, fr.vertex_normal.row(i).transpose());
      const Scalar dng = g.grad(l.vertex(i)).dot(fr.vertex_normal.row(i).transpose());
      q += (-cv * fr.kappa[i] * fr.kappa[i] + dng) * field[off + i] * field[off + i] *
           fr.dual_len[i];
    }
    off += n;
  }
  return q;
}

// ----------------------------------------------------------------- spectrum

enum class SpectrumMode { free_mode, mean_zero };

template <typename Scalar>
struct Spectrum {
  VecX<Scalar> values;   // ascending
  MatX<Scalar> vectors;  // columns, mass-orthonormal
};

// Smallest k eigenpairs of  form v = lambda diag(mass) v,  optionally
// restricted to the mass-weighted mean-zero subspace (constants deflated by a
// Householder reflection in the symmetrized problem).  Dense and
// deterministic; every reported pair is verified to residual 1e-9.
template <typename Scalar>
Spectrum<Scalar> spectrum(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                          const Potential<Scalar>& g, SpectrumMode mode, int k) {
  const Index N = c.vertex_count();
  if (k < 1 || k > 10 || Index(k) > N) throw Error("spectrum needs 1 <= k <= min(10, vertex count)");
  const auto J = assemble_stability(c, phi, g);
  const MatX<Scalar> A = MatX<Scalar>(J.form);
  const VecX<Scalar> sq = J.mass.array().sqrt();
  // Symmetrize: At = D^-1 A D^-1 with D = diag(sqrt mass).
  MatX<Scalar> At = A;
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) At(i, j) /= sq[i] * sq[j];
  At = ((At + At.transpose()) / 2).eval();

  Spectrum<Scalar> out;
  MatX<Scalar> vecs_sym;
  if (mode == SpectrumMode::free_mode) {
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(At);
    if (es.info() != Eigen::Success) throw SolverFailure("eigensolver did not converge");
    out.values = es.eigenvalues().head(k);
    vecs_sym = es.eigenvectors().leftCols(k);
  } else {
    if (Index(k) > N - 1) throw Error("mean-zero spectrum has only N - 1 eigenvalues");
    // Constants phi = 1 become u = D 1 = sq in the symmetrized variables;
    // restrict to the orthogonal complement via a Householder basis.
    VecX<Scalar> u = sq / sq.norm();
    VecX<Scalar> w = u;
    w[0] += (u[0] >= 0 ? 1 : -1);
    w /= w.norm();
    MatX<Scalar> H = MatX<Scalar>::Identity(N, N) - 2 * w * w.transpose();  // H e0 = -/+ u
    const MatX<Scalar> B = H.rightCols(N - 1);                              // basis of u-perp
    MatX<Scalar> Ar = B.transpose() * At * B;
    Ar = ((Ar + Ar.transpose()) / 2).eval();
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(Ar);
    if (es.info() != Eigen::Success) throw SolverFailure("eigensolver did not converge");
    out.values = es.eigenvalues().head(k);
    vecs_sym = B * es.eigenvectors().leftCols(k);
  }
  out.vectors.resize(N, k);
  for (int j = 0; j < k; ++j) out.vectors.col(j) = vecs_sym.col(j).array() / sq.array();

  // Verify in the symmetrized variables; mean-zero pairs carry a multiplier
  // along the constraint direction, which is not part of the residual.
  const Scalar scale = std::max(Scalar(1), At.cwiseAbs().maxCoeff());
  const VecX<Scalar> u_dir = sq / sq.norm();
  for (int j = 0; j < k; ++j) {
    const VecX<Scalar> res =
        A * out.vectors.col(j) - out.values[j] * J.mass.asDiagonal() * out.vectors.col(j);
    VecX<Scalar> rs = res.array() / sq.array();
    if (mode == SpectrumMode::mean_zero) rs -= u_dir * u_dir.dot(rs);
    if (rs.template lpNorm<Eigen::Infinity>() > Scalar(1e-9) * scale)
      throw SolverFailure("eigenpair residual above 1e-9");
  }
  return out;
}

// ------------------------------------------------------- finite-difference QA

template <typename Scalar>
struct VariationCheck {
  Scalar first_gap;        // |dF/dt (centered) - lumped gradient pairing|
  Scalar second_gap;       // |d2F/dt2 (centered) - Q(field)|
  Scalar residual_sup;     // stationarity residual at the base curve
  bool second_meaningful;  // residual_sup below the supplied bound
};

// Displace x_i -> x_i + t field_i nu_i (normals frozen at t = 0) and compare
// centered differences of F (minus mu * area in the constrained case, mu
// frozen at t = 0) against the assembled first and second variations.  The
// first identity is exact in exact arithmetic at any curve; the second only
// represents the Hessian near stationarity, so it is flagged meaningful via
// residual_bound.
template <typename Scalar>
VariationCheck<Scalar> check_variations(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                                        const Potential<Scalar>& g, const VecX<Scalar>& field,
                                        Scalar step, bool constrained,
                                        Scalar residual_bound = Scalar(1e-4)) {
  const Index N = c.vertex_count();
  if (field.size() != N) throw DimensionMismatch("field length != vertex count");
  const auto f = flat_frame(c);
  if (!(step > 0) || step >= f.hmean / 10)
    throw StepTooLarge("finite-difference step must lie in (0, h/10)");

  const auto rep = first_variation_residual(c, phi, g, constrained);
  auto displaced = [&](Scalar t) {
    MultiCurve<Scalar> d = c;
    Index off = 0;
    for (auto& l : d.loops) {
      for (Index i = 0; i < l.size(); ++i)
        l.pts.row(i) += t * field[off + i] * f.vertex_normal.row(off + i);
      off += l.size();
    }
    return d;
  };
  auto eval = [&](Scalar t) {
    const MultiCurve<Scalar> d = displaced(t);
    Scalar v = energy(d, phi, g).total;
    if (constrained) v -= rep.mu * enclosed_area(d);
    return v;
  };

  const Scalar fp = eval(step), fm = eval(-step), f0 = eval(0);
  const Scalar dfd = (fp - fm) / (2 * step);
  const Scalar d2fd = (fp - 2 * f0 + fm) / (step * step);

  Scalar pair = 0;  // exact-gradient pairing with the variation field
  if (constrained) {
    const auto ga = area_gradient(c);
    for (Index i = 0; i < N; ++i) {
      const Scalar aden = ga.row(i).dot(f.vertex_normal.row(i)) / f.mass[i];
      pair += (rep.hphi[i] + rep.bulk_density[i] - rep.mu * aden) * field[i] * f.mass[i];
    }
  } else {
    for (Index i = 0; i < N; ++i)
      pair += (rep.hphi[i] + rep.bulk_density[i]) * field[i] * f.mass[i];
  }

  VariationCheck<Scalar> out;
  out.first_gap = std::abs(dfd - pair);
  out.second_gap = std::abs(d2fd - stability_form(c, phi, g, field));
  out.residual_sup = rep.residual_sup;
  out.second_meaningful = rep.residual_sup < residual_bound;
  return out;
}

}  // namespace wulff2d
