#pragma once

// Diagnostics aggregation: run the stationarity, stability, two-point, hull,
// connectedness, outward-minimality and per-component checks on a curve and
// assemble a machine-readable certificate.  Failed checks are recorded, never
// thrown; the verdict classifies the curve as
//   "minimizer candidate"        all structural checks pass,
//   "critical but not minimizing" stationary but some structural check fails,
//   "non-critical"                the stationarity residual is too large.

#include <cstdint>
#include <cstring>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "curve.hpp"
#include "io.hpp"
#include "twopoint.hpp"
#include "types.hpp"
#include "variation.hpp"

namespace wulff2d {

// Per-check constants; actual thresholds scale with the mesh size h (or h^2
// for claims with quadratic consistency order) so refinements tighten them.
template <typename Scalar>
struct ThresholdTable {
  Scalar stationarity = Scalar(0.1);  // x h      residual sup norm
  Scalar stability = Scalar(10);      // x h      admissible eigenvalue floor
  Scalar two_point = Scalar(5);       // x h^2    max S
  Scalar hull = Scalar(5);            // x h^2    max distance to the hull
  Scalar outward = Scalar(1);         // x h      surface-energy slack vs hull
  Scalar subsolution = Scalar(10);    // x h      integrated certificate slack
  Scalar volume = Scalar(1e-6);       // x max(V,1) area drift, constrained
};

struct CheckResult {
  std::string name;
  std::string anchor;  // the mathematical statement the check instantiates
  double measured = 0;
  double threshold = 0;
  bool pass = false;
  bool informational = false;  // recorded but not part of the verdict
};

struct Certificate {
  std::uint64_t fingerprint = 0;  // hash of the vertex data
  std::string mode;               // "constrained" or "unconstrained"
  std::vector<CheckResult> checks;
  bool pass = false;       // AND over non-informational checks
  std::string verdict;
  double q_s = 0, i_omega = 0, margin = 0;  // integrated subsolution numbers
  std::string subsolution_label;
  std::string timestamp;  // excluded from reproducibility comparisons
};

namespace detail {

inline void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
}

}  // namespace detail

template <typename Scalar>
std::uint64_t curve_fingerprint(const MultiCurve<Scalar>& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const std::uint64_t loops = c.loops.size();
  detail::fnv1a(h, &loops, sizeof loops);
  for (const auto& l : c.loops) {
    const std::uint64_t n = std::uint64_t(l.size());
    detail::fnv1a(h, &n, sizeof n);
    for (Index i = 0; i < l.size(); ++i) {
      const double xy[2] = {double(l.pts(i, 0)), double(l.pts(i, 1))};
      detail::fnv1a(h, xy, sizeof xy);
    }
  }
  return h;
}

inline std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run the full battery.  `volume` selects the constrained problem and its
// target area; pass std::nullopt for the unconstrained one.
template <typename Scalar>
Certificate diagnose(const MultiCurve<Scalar>& c, const Anisotropy<Scalar>& phi,
                     const Potential<Scalar>& g, std::optional<Scalar> volume,
                     const ThresholdTable<Scalar>& tab = {}) {
  const bool constrained = volume.has_value();
  Certificate cert;
  cert.fingerprint = curve_fingerprint(c);
  cert.mode = constrained ? "constrained" : "unconstrained";
  cert.timestamp = utc_timestamp();
  const Scalar h = mean_edge_length(c);

  auto add = [&](const std::string& name, const std::string& anchor, double measured,
                 double threshold, bool informational) {
    CheckResult r;
    r.name = name;
    r.anchor = anchor;
    r.measured = measured;
    r.threshold = threshold;
    r.pass = measured <= threshold;
    r.informational = informational;
    cert.checks.push_back(std::move(r));
    return cert.checks.back().pass;
  };
  const double inf = std::numeric_limits<double>::infinity();

  // Stationarity.
  bool critical = false;
  {
    double measured = inf;
    try {
      measured = double(first_variation_residual(c, phi, g, constrained).residual_sup);
    } catch (const Error&) {
    }
    critical = add("stationarity",
                   "anisotropic curvature plus potential is constant along a stationary "
                   "boundary (zero when unconstrained)",
                   measured, double(tab.stationarity * h), false);
  }

  // Stability: smallest eigenvalue over admissible fields (area-preserving
  // fields are mean-zero in the constrained problem).
  {
    double measured = inf;
    try {
      const Index N = c.vertex_count();
      const auto mode = constrained ? SpectrumMode::mean_zero : SpectrumMode::free_mode;
      const int k = int(std::min<Index>(6, constrained ? N - 1 : N));
      const auto sp = spectrum(c, phi, g, mode, std::max(1, k));
      measured = -double(sp.values[0]);  // pass iff lambda_min >= -C h
    } catch (const Error&) {
    }
    add("stability", "the second variation is nonnegative on admissible normal fields at a minimizer",
        measured, double(tab.stability * h), false);
  }

  // Connectedness.
  const std::size_t ncomp = component_loop_indices(c).size();
  add("connected", "the boundary of a minimizer under a strictly convex potential is connected",
      double(ncomp), 1.0, false);

  // Two-point bound and hull proximity (convexity).
  TwoPointField<Scalar> f;
  {
    double measured = inf;
    try {
      f = two_point(c);
      measured = double(f.value.maxCoeff());
    } catch (const Error&) {
    }
    add("two_point_bound", "the two-point function vanishes exactly on the convex-hull boundary",
        measured, double(tab.two_point * h * h), false);
  }
  HullResult<Scalar> hull;
  {
    double measured = inf;
    try {
      hull = convex_hull(c);
      measured = double(hull.distance.maxCoeff());
    } catch (const Error&) {
    }
    add("hull_distance", "minimizers under potentials with convex level sets are convex", measured,
        double(tab.hull * h * h), false);
  }

  // Outward minimality: the hull never carries more surface energy than the
  // curve, with equality iff convex — a positive gap detects nonconvexity.
  {
    double measured = inf;
    try {
      MultiCurve<Scalar> hc;
      hc.loops.push_back(hull.hull);
      measured = double(surface_energy(c, phi) - surface_energy(hc, phi));
    } catch (const Error&) {
    }
    add("outward_minimality",
        "an outward-minimizing boundary never exceeds the surface energy of its convex hull",
        measured, double(tab.outward * h), false);
  }

  // Volume bookkeeping (constrained only; informational).
  if (constrained) {
    const double measured = std::abs(double(enclosed_area(c)) - double(*volume));
    add("volume", "the constrained problem fixes the enclosed area", measured,
        double(tab.volume) * std::max(1.0, std::abs(double(*volume))), true);
  }

  // Component-wise stability witness (informational: a flagged component
  // proves the configuration is not minimizing; none flagged proves nothing).
  {
    double measured = inf;
    try {
      const auto rep = component_instability(c, phi, g, f);
      measured = 0;
      for (const auto& v : rep.verdicts) measured += v.unstable ? 1 : 0;
    } catch (const Error&) {
    }
    add("component_stability",
        "every connected component of an unconditionally stable configuration is itself stable",
        measured, 0.0, true);
  }

  // Integrated subsolution certificate (informational; meaningful at critical
  // points, labeled approximate elsewhere).
  {
    try {
      const auto sc = subsolution_certificate(c, phi, g, f, constrained, tab.subsolution);
      cert.q_s = double(sc.q_s);
      cert.i_omega = double(sc.i_omega);
      cert.margin = double(sc.margin);
      cert.subsolution_label = sc.label;
      add("subsolution",
          "at a critical point the two-point function satisfies the integrated inequality "
          "Q(S) <= -integral of omega(S) S",
          double(sc.q_s + sc.i_omega), double(sc.tol), true);
    } catch (const Error&) {
      add("subsolution",
          "at a critical point the two-point function satisfies the integrated inequality "
          "Q(S) <= -integral of omega(S) S",
          inf, 0.0, true);
    }
  }

  cert.pass = true;
  for (const auto& r : cert.checks)
    if (!r.informational) cert.pass = cert.pass && r.pass;
  cert.verdict = !critical ? "non-critical"
                           : (cert.pass ? "minimizer candidate" : "critical but not minimizing");
  return cert;
}

inline json certificate_to_json(const Certificate& cert) {
  char fp[19];
  std::snprintf(fp, sizeof fp, "0x%016llx", static_cast<unsigned long long>(cert.fingerprint));
  json checks = json::array();
  for (const auto& r : cert.checks)
    checks.push_back(json{{"name", r.name},
                          {"anchor", r.anchor},
                          {"measured", r.measured},
                          {"threshold", r.threshold},
                          {"pass", r.pass},
                          {"informational", r.informational}});
  return json{{"fingerprint", fp},
              {"mode", cert.mode},
              {"checks", std::move(checks)},
              {"pass", cert.pass},
              {"verdict", cert.verdict},
              {"subsolution",
               {{"q_s", cert.q_s},
                {"i_omega", cert.i_omega},
                {"margin", cert.margin},
                {"label", cert.subsolution_label}}},
              {"timestamp", cert.timestamp}};
}

}  // namespace wulff2d
