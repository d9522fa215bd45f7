#pragma once

// Descent solvers for
//   (P_V)  minimize F over curves enclosing a fixed area, and
//   (P)    minimize F unconstrained,
// plus one implicit time step of the minimizing-movements scheme.
//
// Each iteration moves vertices along their normals by a field u obtained
// from the regularized normal-Hessian system
//
//   (Q_form + (1/dt) diag(m)) u = -m .* residual,
//
// a Levenberg-style proposal: as dt -> 0 it reduces to the plain explicit
// gradient flow u = -dt * residual in the lumped L2 metric, while large dt
// approaches a Newton step on the normal graph, which removes the h^2
// stiffness limit of the surface term and the slow relaxation of soft modes
// (translations under weak potentials).  Whatever the proposal, a step is
// accepted only if it passes an Armijo descent test on the actual discrete
// energy (with the area constraint re-projected first), so accepted steps
// always decrease F; dt doubles on acceptance and halves on rejection.
//
// The area constraint is restored after every accepted step by a uniform
// normal offset with Newton iteration (the offset area is quadratic in the
// offset, so this converges in a couple of steps to |area - V| <= 1e-8 V).
//
// Topology management between steps, all logged as events:
//  - vertices are clamped to the working disk |x| <= r_max,
//  - connected regions with |area| < eps_kill are deleted,
//  - region boundaries that cross, or approach within half an edge length,
//    are merged by boolean union (near-contact pairs are closed by an
//    offset-union-inset heuristic),
//  - the curve is remeshed to the target edge length on a fixed cadence.

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anisotropy.hpp"
#include "curve.hpp"
#include "potential.hpp"
#include "types.hpp"
#include "variation.hpp"

namespace wulff2d {

template <typename Scalar>
struct SolveConfig {
  Scalar dt0 = Scalar(0.1);        // initial trust step
  Scalar backtrack = Scalar(0.5);  // dt multiplier on rejection
  Scalar armijo = Scalar(1e-4);
  Scalar tolerance = Scalar(1e-4);  // sup norm of the stationarity residual
  int max_iters = 5000;
  int remesh_every = 25;
  Scalar r_max = Scalar(10);        // working disk radius
  Scalar eps_kill = Scalar(1e-3);   // component deletion area
  int multi_start = 5;
  std::uint64_t seed = 1;
  Scalar target_h = Scalar(0);      // 0: taken from the initial curve
  int log_every = 0;                // trajectory capture cadence (0: off)
};

struct SolveEvent {
  int iter;
  std::string kind;
  std::string detail;
};

template <typename Scalar>
struct SolveResult {
  MultiCurve<Scalar> curve;
  int iterations = 0;
  bool converged = false;
  std::string reason;
  Scalar final_energy = 0;
  Scalar final_residual = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> energy_history, residual_history;
  std::vector<SolveEvent> events;
  std::vector<MultiCurve<Scalar>> trajectory;
};

namespace detail {

// Uniform normal offset x -> x + s nu making the enclosed area equal V.
// Returns false when Newton stalls (10 iterations, |area - V| <= 1e-8 V).
template <typename Scalar>
bool project_volume(MultiCurve<Scalar>& c, Scalar V) {
  Points<Scalar> nu(c.vertex_count(), 2);
  {
    Index off = 0;
    for (const auto& l : c.loops) {
      const auto fr = make_frame(l);
      nu.middleRows(off, l.size()) = fr.vertex_normal;
      off += l.size();
    }
  }
  const Points<Scalar> base = [&] {
    Points<Scalar> p(c.vertex_count(), 2);
    Index off = 0;
    for (const auto& l : c.loops) {
      p.middleRows(off, l.size()) = l.pts;
      off += l.size();
    }
    return p;
  }();
  Scalar s = 0;
  for (int it = 0; it < 10; ++it) {
    Index off = 0;
    for (auto& l : c.loops) {
      l.pts = base.middleRows(off, l.size()) + s * nu.middleRows(off, l.size());
      off += l.size();
    }
    const Scalar a = enclosed_area(c);
    if (std::abs(a - V) <= Scalar(1e-8) * std::abs(V)) return true;
    const auto ga = area_gradient(c);
    Scalar da = 0;
    for (Index i = 0; i < ga.rows(); ++i) da += ga.row(i).dot(nu.row(i));
    if (!(std::abs(da) > Scalar(1e-300))) return false;
    s -= (a - V) / da;
    if (!std::isfinite(s)) return false;
  }
  return false;
}

template <typename Scalar>
bool trial_valid(const MultiCurve<Scalar>& c) {
  for (const auto& l : c.loops) {
    if (!l.pts.allFinite() || l.size() < 3) return false;
    const Index n = l.size();
    for (Index i = 0; i < n; ++i)
      if ((l.vertex((i + 1) % n) - l.vertex(i)).norm() <= Scalar(1e-13)) return false;
    if (loop_self_intersects(l)) return false;
  }
  return true;
}

template <typename Scalar>
Scalar loop_pair_distance(const Loop<Scalar>& A, const Loop<Scalar>& B) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < A.size(); ++i) {
    const Vec2<Scalar> a = A.vertex(i), b = A.vertex((i + 1) % A.size());
    for (Index j = 0; j < B.size(); ++j) {
      best = std::min(best, segment_segment_distance(a, b, B.vertex(j),
                                                     B.vertex((j + 1) % B.size())));
    }
  }
  return best;
}

template <typename Scalar>
Loop<Scalar> offset_loop(const Loop<Scalar>& l, Scalar s) {
  const auto fr = make_frame(l);
  Loop<Scalar> out = l;
  out.pts += s * fr.vertex_normal;
  return out;
}

// Engine state shared by the constrained and unconstrained drivers.
template <typename Scalar>
struct Flow {
  const Anisotropy<Scalar>& phi;
  const Potential<Scalar>& g;
  SolveConfig<Scalar> cfg;
  std::optional<Scalar> volume;  // set: constrained mode
  Scalar target_h;
  SolveResult<Scalar> out;

  bool constrained() const { return volume.has_value(); }

  void log(int iter, const std::string& kind, const std::string& detail) {
    out.events.push_back({iter, kind, detail});
  }

  // Deletes small components; true if the curve still has loops.
  bool cull(MultiCurve<Scalar>& c, int iter) {
    const auto groups = component_loop_indices(c);
    std::vector<bool> drop(c.loops.size(), false);
    for (const auto& grp : groups) {
      Scalar a = 0;
      for (std::size_t k : grp) a += signed_area(c.loops[k].pts);
      if (std::abs(a) < cfg.eps_kill) {
        for (std::size_t k : grp) drop[k] = true;
        std::ostringstream os;
        os << "component area " << static_cast<double>(a) << " below "
           << static_cast<double>(cfg.eps_kill);
        log(iter, "delete", os.str());
      }
    }
    std::vector<Loop<Scalar>> keep;
    for (std::size_t k = 0; k < c.loops.size(); ++k)
      if (!drop[k]) keep.push_back(std::move(c.loops[k]));
    c.loops = std::move(keep);
    return !c.loops.empty();
  }

  void clamp(MultiCurve<Scalar>& c, int iter) {
    bool any = false;
    for (auto& l : c.loops)
      for (Index i = 0; i < l.size(); ++i) {
        const Scalar r = l.vertex(i).norm();
        if (r > cfg.r_max) {
          l.pts.row(i) *= cfg.r_max / r;
          any = true;
        }
      }
    if (any) log(iter, "clamp", "vertices pulled back to the working disk");
  }

  // Replace loops ia and ib with the merged set; rebuild and remesh.
  // Returns true when the new configuration validates.
  bool splice_merged(MultiCurve<Scalar>& c, std::size_t ia, std::size_t ib,
                     std::vector<Loop<Scalar>> merged, int iter, const char* what) {
    if (merged.empty()) {
      log(iter, "merge_failed", "union not resolved; will retry");
      return false;
    }
    std::vector<Loop<Scalar>> next;
    for (std::size_t k = 0; k < c.loops.size(); ++k)
      if (k != ia && k != ib) next.push_back(c.loops[k]);
    for (auto& l : merged) next.push_back(std::move(l));
    try {
      MultiCurve<Scalar> rebuilt = build(next);
      rebuilt = remesh(rebuilt, target_h);
      c = build(rebuilt.loops);
      log(iter, "merge", what);
      return true;
    } catch (const Error&) {
      log(iter, "merge_failed", "union rejected by validation; will retry");
      return false;
    }
  }

  // Merge colliding interfaces.  Crossing loops are handled first, on raw
  // pairs: while two loops overlap, even-odd containment (and with it the
  // hole/root classification) is meaningless, so any crossing pair is
  // orientation-normalized and replaced by its union.  Once nothing crosses,
  // distinct region boundaries that run closer than half an edge length are
  // closed by outward offset, union, and inset; if the inset breaks
  // simplicity the fattened union is kept and the volume projection absorbs
  // the area change.
  void merge_collisions(MultiCurve<Scalar>& c, int iter) {
    bool changed = true;
    while (changed && c.loops.size() > 1) {
      changed = false;
      for (std::size_t a = 0; a < c.loops.size() && !changed; ++a) {
        for (std::size_t b = a + 1; b < c.loops.size() && !changed; ++b) {
          if (!loops_intersect(c.loops[a], c.loops[b])) continue;
          Loop<Scalar> A = c.loops[a], B = c.loops[b];
          if (signed_area(A.pts) < 0) A.pts = A.pts.colwise().reverse().eval();
          if (signed_area(B.pts) < 0) B.pts = B.pts.colwise().reverse().eval();
          changed =
              splice_merged(c, a, b, polygon_union(A, B), iter, "crossing boundaries united");
        }
      }
      if (changed) continue;
      const auto groups = component_loop_indices(c);
      std::vector<std::size_t> roots;
      for (const auto& grp : groups) roots.push_back(grp[0]);
      for (std::size_t a = 0; a < roots.size() && !changed; ++a) {
        for (std::size_t b = a + 1; b < roots.size() && !changed; ++b) {
          const Loop<Scalar>&A = c.loops[roots[a]], &B = c.loops[roots[b]];
          if (loop_pair_distance(A, B) >= target_h / 2) continue;
          const Scalar s = target_h;
          std::vector<Loop<Scalar>> merged = polygon_union(offset_loop(A, s), offset_loop(B, s));
          if (merged.size() == 1) {
            Loop<Scalar> inset = offset_loop(merged[0], -s);
            if (!loop_self_intersects(inset) && std::abs(signed_area(inset.pts)) > cfg.eps_kill)
              merged[0] = inset;
          }
          changed = splice_merged(c, roots[a], roots[b], std::move(merged), iter,
                                  "near-contact boundaries closed and united");
        }
      }
    }
  }

  void maybe_remesh(MultiCurve<Scalar>& c, int iter) {
    std::vector<Loop<Scalar>> next;
    bool ok = true;
    for (const auto& l : c.loops) {
      try {
        next.push_back(remesh_loop(l, target_h));
      } catch (const DegenerateLoop&) {
        next.push_back(l);  // too short to resample; eps_kill will claim it
        ok = false;
      }
    }
    for (auto& l : next)
      if (l.size() < 3) ok = false;
    if (ok) {
      try {
        c = build(next);
        log(iter, "remesh", "resampled to target edge length");
      } catch (const Error&) {
        // keep the current mesh; probably mid-collision
      }
    }
  }

  SolveResult<Scalar> run(MultiCurve<Scalar> c) {
    out = SolveResult<Scalar>{};
    if (constrained() && !project_volume(c, *volume)) {
      out.curve = c;
      out.reason = "projection_failure";
      return std::move(out);
    }
    Scalar dt = cfg.dt0;
    const Scalar dt_min = cfg.dt0 * Scalar(1e-12), dt_max = cfg.dt0 * Scalar(1e6);
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
      const auto rep = first_variation_residual(c, phi, g, constrained());
      out.energy_history.push_back(rep.total);
      out.residual_history.push_back(rep.residual_sup);
      if (cfg.log_every > 0 && iter % cfg.log_every == 0) out.trajectory.push_back(c);
      out.final_energy = rep.total;
      out.final_residual = rep.residual_sup;
      if (rep.residual_sup < cfg.tolerance) {
        out.converged = true;
        out.reason = "converged";
        break;
      }

      const auto J = assemble_stability(c, phi, g);
      const auto ff = flat_frame(c);
      const Index N = c.vertex_count();
      bool accepted = false;
      while (dt >= dt_min) {
        Eigen::SparseMatrix<Scalar> A = J.form;
        for (Index i = 0; i < N; ++i) A.coeffRef(i, i) += J.mass[i] / dt;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> ldlt(A);
        VecX<Scalar> u;
        if (ldlt.info() == Eigen::Success) {
          u = ldlt.solve((-rep.residual.array() * J.mass.array()).matrix());
          if (constrained()) u.array() -= u.dot(J.mass) / J.mass.sum();
        }
        Scalar dd = 0;
        const bool solved = ldlt.info() == Eigen::Success && u.size() == N && u.allFinite();
        if (solved) {
          dd = (rep.residual.array() * u.array() * J.mass.array()).sum();
        }
        if (!solved || !(dd < 0)) {
          dt *= cfg.backtrack;
          continue;
        }
        MultiCurve<Scalar> trial = c;
        Index off = 0;
        for (auto& l : trial.loops) {
          for (Index i = 0; i < l.size(); ++i)
            l.pts.row(i) += u[off + i] * ff.vertex_normal.row(off + i);
          off += l.size();
        }
        bool ok = trial_valid(trial);
        if (ok && constrained()) ok = project_volume(trial, *volume);
        if (ok) {
          const Scalar ft = energy(trial, phi, g).total;
          ok = std::isfinite(ft) && ft <= rep.total + cfg.armijo * dd;
          if (ok) {
            c = std::move(trial);
            accepted = true;
            dt = std::min(dt * 2, dt_max);
          }
        }
        if (!ok) dt *= cfg.backtrack;
        if (accepted) break;
      }
      if (!accepted) {
        out.reason = "stalled";
        break;
      }

      clamp(c, iter);
      if (!cull(c, iter)) {
        out.curve = MultiCurve<Scalar>{};
        out.reason = "all_components_vanished";
        out.iterations = iter + 1;
        return std::move(out);
      }
      merge_collisions(c, iter);
      if (cfg.remesh_every > 0 && (iter + 1) % cfg.remesh_every == 0) maybe_remesh(c, iter);
      if (constrained() && !project_volume(c, *volume)) {
        out.reason = "projection_failure";
        break;
      }
    }
    if (out.reason.empty()) out.reason = "max_iters";
    out.iterations = iter;
    out.curve = std::move(c);
    if (!out.energy_history.empty()) {
      out.final_energy = out.energy_history.back();
      out.final_residual = out.residual_history.back();
    }
    { // refresh the final figures on the returned state
      const auto rep = first_variation_residual(out.curve, phi, g, constrained());
      out.final_energy = rep.total;
      out.final_residual = rep.residual_sup;
    }
    return std::move(out);
  }
};

}  // namespace detail

template <typename Scalar>
MultiCurve<Scalar> star_init(std::uint64_t seed, Index n, Scalar area, bool offset_center) {
  std::mt19937_64 rng(seed);
  const Scalar base = std::sqrt(area / Scalar(M_PI));
  Vec2<Scalar> ctr = Vec2<Scalar>::Zero();
  if (offset_center) {
    const Scalar r = Scalar(0.5) * base * Scalar(std::sqrt(runif(rng)));
    const Scalar th = Scalar(2) * Scalar(M_PI) * Scalar(runif(rng));
    ctr = Vec2<Scalar>(r * std::cos(th), r * std::sin(th));
  }
  Loop<Scalar> l = random_star_loop<Scalar>(rng, n, base, Scalar(0.3), 4, ctr);
  l = scale_to_area(l, area);
  return build(l);
}

template <typename Scalar>
SolveResult<Scalar> run_multistart(const MultiCurve<Scalar>& init, const Anisotropy<Scalar>& phi,
                                   const Potential<Scalar>& g, const SolveConfig<Scalar>& cfg,
                                   std::optional<Scalar> volume) {
  MultiCurve<Scalar> base = build(init.loops);  // validate and normalize
  const Scalar target_h = cfg.target_h > 0 ? cfg.target_h : mean_edge_length(base);
  const int runs = std::max(1, cfg.multi_start);
  const Scalar ref_area =
      volume ? *volume : std::max(std::abs(enclosed_area(base)), Scalar(0.1));
  const Index n = std::max<Index>(16, base.vertex_count());

  std::vector<SolveResult<Scalar>> results;
  for (int r = 0; r < runs; ++r) {
    detail::Flow<Scalar> flow{phi, g, cfg, volume, target_h, {}};
    MultiCurve<Scalar> start =
        (r == 0) ? base : star_init<Scalar>(cfg.seed + std::uint64_t(r), n, ref_area, true);
    results.push_back(flow.run(std::move(start)));
  }
  std::size_t best = 0;
  auto better = [](const SolveResult<Scalar>& a, const SolveResult<Scalar>& b) {
    if (a.converged != b.converged) return a.converged;
    return a.final_energy < b.final_energy;
  };
  for (std::size_t r = 1; r < results.size(); ++r)
    if (better(results[r], results[best])) best = r;
  SolveResult<Scalar> out = std::move(results[best]);
  for (std::size_t r = 0; r < results.size(); ++r) {
    std::ostringstream os;
    os << "run " << r << ": F = " << static_cast<double>(results[r].final_energy) << ", "
       << (r == best ? "selected, " : "") << results[r].reason;
    out.events.push_back({-1, "run", os.str()});
  }
  return out;
}

// Minimize F at fixed enclosed area V.
template <typename Scalar>
SolveResult<Scalar> minimize_constrained(const MultiCurve<Scalar>& init,
                                         const Anisotropy<Scalar>& phi, const Potential<Scalar>& g,
                                         Scalar V, const SolveConfig<Scalar>& cfg = {}) {
  if (!(V > 0)) throw Error("constrained solve needs a positive target area");
  if (!(cfg.eps_kill < V / 10)) throw Error("eps_kill must stay below a tenth of the target area");
  return run_multistart(init, phi, g, cfg, std::optional<Scalar>(V));
}

// Minimize F with no area constraint; the empty curve (everything vanished)
// is a legitimate outcome, reported through `reason`.
template <typename Scalar>
SolveResult<Scalar> minimize_unconstrained(const MultiCurve<Scalar>& init,
                                           const Anisotropy<Scalar>& phi,
                                           const Potential<Scalar>& g,
                                           const SolveConfig<Scalar>& cfg = {}) {
  return run_multistart(init, phi, g, cfg, std::optional<Scalar>{});
}

// One implicit time step of size tau for the anisotropic flow driven by Phi:
// minimize surface energy + integral of sdist(., prev)/tau, starting at prev.
template <typename Scalar>
SolveResult<Scalar> atw_step(const MultiCurve<Scalar>& prev, const Anisotropy<Scalar>& phi,
                             Scalar tau, SolveConfig<Scalar> cfg = {}) {
  if (!(tau > 0)) throw Error("time step must be positive");
  const auto g = signed_distance_potential(prev, tau);
  cfg.multi_start = 1;
  if (cfg.target_h <= 0) cfg.target_h = mean_edge_length(prev);
  cfg.dt0 = std::min(cfg.dt0, tau);
  return minimize_unconstrained(prev, phi, g, cfg);
}

}  // namespace wulff2d
