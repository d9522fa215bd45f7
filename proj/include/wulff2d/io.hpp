#pragma once

// File formats and parsing:
//  - curve JSON          {"loops": [[[x,y], ...], ...]}  (orientation
//    normalized on load) and the blank-line-separated "x,y" CSV alternative,
//  - solution report JSON (energy split, multiplier, residual, spectra),
//  - two-point field CSV  (index,x,y,S,argmax,flags; flags bit 0 =
//    nondegenerate contact),
//  - config files: key = value lines under [anisotropy] / [potential] /
//    [init] / [solve] sections, # or ; comments,
//  - compact command-line specs "family:p1,p2,..." for anisotropies/potentials,
//  - solver events as JSON lines,
//  - SVG plots (loops, optional per-vertex heat coloring, optional hull).

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anisotropy.hpp"
#include "curve.hpp"
#include "potential.hpp"
#include "solve.hpp"
#include "types.hpp"
#include "variation.hpp"

namespace wulff2d {

using json = nlohmann::json;

// ---------------------------------------------------------------- text files

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << body;
  if (!out) throw Error("write failed: " + path);
}

// -------------------------------------------------------------- curve formats

template <typename Scalar>
json curve_to_json(const MultiCurve<Scalar>& c) {
  json loops = json::array();
  for (const auto& l : c.loops) {
    json pts = json::array();
    for (Index i = 0; i < l.size(); ++i)
      pts.push_back({static_cast<double>(l.pts(i, 0)), static_cast<double>(l.pts(i, 1))});
    loops.push_back(std::move(pts));
  }
  return json{{"loops", std::move(loops)}};
}

template <typename Scalar = double>
MultiCurve<Scalar> curve_from_json(const json& j) {
  if (!j.is_object() || !j.contains("loops") || !j["loops"].is_array())
    throw Error("curve JSON needs a top-level \"loops\" array");
  std::vector<Loop<Scalar>> loops;
  for (const auto& jl : j["loops"]) {
    if (!jl.is_array()) throw Error("each loop must be an array of [x,y] pairs");
    Loop<Scalar> l;
    l.pts.resize(static_cast<Index>(jl.size()), 2);
    Index i = 0;
    for (const auto& p : jl) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw Error("loop entries must be [x,y] number pairs");
      l.pts(i, 0) = Scalar(p[0].template get<double>());
      l.pts(i, 1) = Scalar(p[1].template get<double>());
      ++i;
    }
    loops.push_back(std::move(l));
  }
  return build(std::move(loops));
}

template <typename Scalar>
std::string curve_to_csv(const MultiCurve<Scalar>& c) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& l : c.loops) {
    if (!first) os << "\n";
    first = false;
    for (Index i = 0; i < l.size(); ++i)
      os << static_cast<double>(l.pts(i, 0)) << "," << static_cast<double>(l.pts(i, 1)) << "\n";
  }
  return os.str();
}

template <typename Scalar = double>
MultiCurve<Scalar> curve_from_csv(const std::string& text) {
  std::vector<Loop<Scalar>> loops;
  std::vector<Vec2<Scalar>> cur;
  auto flush = [&] {
    if (cur.empty()) return;
    Loop<Scalar> l;
    l.pts.resize(static_cast<Index>(cur.size()), 2);
    for (std::size_t i = 0; i < cur.size(); ++i) l.pts.row(static_cast<Index>(i)) = cur[i];
    loops.push_back(std::move(l));
    cur.clear();
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    s = s.substr(b);
    if (s.empty()) {
      flush();
      continue;
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos)
      throw Error("curve CSV line " + std::to_string(lineno) + ": expected \"x,y\"");
    try {
      cur.push_back(Vec2<Scalar>(Scalar(std::stod(s.substr(0, comma))),
                                 Scalar(std::stod(s.substr(comma + 1)))));
    } catch (const std::exception&) {
      throw Error("curve CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  flush();
  if (loops.empty()) throw Error("curve CSV holds no vertices");
  return build(std::move(loops));
}

inline bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

template <typename Scalar = double>
MultiCurve<Scalar> read_curve_file(const std::string& path) {
  const std::string text = read_text(path);
  if (ends_with(path, ".csv")) return curve_from_csv<Scalar>(text);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("cannot parse " + path + ": " + e.what());
  }
  return curve_from_json<Scalar>(j);
}

template <typename Scalar>
void write_curve_file(const std::string& path, const MultiCurve<Scalar>& c) {
  if (ends_with(path, ".csv"))
    write_text(path, curve_to_csv(c));
  else
    write_text(path, curve_to_json(c).dump(2) + "\n");
}

// ------------------------------------------------------------- report formats

template <typename Scalar>
json solution_report_json(const VariationReport<Scalar>& rep, const VecX<Scalar>& spectrum_free,
                          const VecX<Scalar>& spectrum_mean_zero) {
  auto vec = [](const VecX<Scalar>& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(static_cast<double>(v[i]));
    return a;
  };
  return json{{"F", static_cast<double>(rep.total)},
              {"surface", static_cast<double>(rep.surface)},
              {"bulk", static_cast<double>(rep.bulk)},
              {"mu", static_cast<double>(rep.mu)},
              {"residual_sup", static_cast<double>(rep.residual_sup)},
              {"spectrum_free", vec(spectrum_free)},
              {"spectrum_mean_zero", vec(spectrum_mean_zero)}};
}

// S-field dump; `flags` bit 0 marks a nondegenerate contact.
template <typename Scalar, typename Field>
std::string field_to_csv(const MultiCurve<Scalar>& c, const Field& f) {
  std::ostringstream os;
  os.precision(17);
  os << "index,x,y,S,argmax,flags\n";
  Index off = 0;
  for (const auto& l : c.loops)
    for (Index i = 0; i < l.size(); ++i, ++off)
      os << off << "," << static_cast<double>(l.pts(i, 0)) << ","
         << static_cast<double>(l.pts(i, 1)) << "," << static_cast<double>(f.value[off]) << ","
         << f.argmax[off] << "," << (f.nondegenerate[off] ? 1 : 0) << "\n";
  return os.str();
}

inline json events_to_json(const std::vector<SolveEvent>& events) {
  json a = json::array();
  for (const auto& e : events)
    a.push_back(json{{"iter", e.iter}, {"kind", e.kind}, {"detail", e.detail}});
  return a;
}

inline std::string events_to_jsonl(const std::vector<SolveEvent>& events) {
  std::ostringstream os;
  for (const auto& e : events)
    os << json{{"iter", e.iter}, {"kind", e.kind}, {"detail", e.detail}}.dump() << "\n";
  return os.str();
}

// ------------------------------------------------------------------- configs

using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline ConfigMap parse_config(const std::string& text) {
  ConfigMap cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    // strip trailing comments introduced by whitespace + '#' or ';'
    for (std::size_t i = 0; i < s.size(); ++i)
      if ((s[i] == '#' || s[i] == ';') &&
          (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1])))) {
        s = trim(s.substr(0, i));
        break;
      }
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      cfg[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw Error("config line " + std::to_string(lineno) + ": key outside any [section]");
    cfg[section][trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return cfg;
}

inline std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (cur.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cur, &used));
      if (used != cur.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad number '" + cur + "' in list '" + s + "'");
    }
  }
  return out;
}

// "iso" | "elliptic:a,b" | "lq:q[,eps]"
template <typename Scalar = double>
Anisotropy<Scalar> anisotropy_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string fam = trim(spec.substr(0, colon));
  const std::vector<double> p =
      colon == std::string::npos ? std::vector<double>{} : parse_number_list(spec.substr(colon + 1));
  if (fam == "iso" || fam == "isotropic") {
    if (!p.empty()) throw Error("isotropic anisotropy takes no parameters");
    return Anisotropy<Scalar>::isotropic();
  }
  if (fam == "elliptic") {
    if (p.size() != 2) throw Error("elliptic anisotropy needs params a,b");
    return Anisotropy<Scalar>::elliptic(Scalar(p[0]), Scalar(p[1]));
  }
  if (fam == "lq") {
    if (p.empty() || p.size() > 2) throw Error("lq anisotropy needs params q[,eps]");
    return p.size() == 2 ? Anisotropy<Scalar>::lq(Scalar(p[0]), Scalar(p[1]))
                         : Anisotropy<Scalar>::lq(Scalar(p[0]));
  }
  throw Error("unknown anisotropy family '" + fam + "'");
}

// "zero" | "quadratic:a,cx,cy[,b]" | "tilted:a,cx,cy,vx,vy[,b]"
// (signed-distance potentials need a base curve; configure them in a file.)
template <typename Scalar = double>
Potential<Scalar> potential_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string fam = trim(spec.substr(0, colon));
  const std::vector<double> p =
      colon == std::string::npos ? std::vector<double>{} : parse_number_list(spec.substr(colon + 1));
  if (fam == "zero") {
    if (!p.empty()) throw Error("zero potential takes no parameters");
    return Potential<Scalar>::zero();
  }
  if (fam == "quadratic") {
    if (p.size() != 3 && p.size() != 4) throw Error("quadratic potential needs params a,cx,cy[,b]");
    return Potential<Scalar>::quadratic(Scalar(p[0]), Vec2<Scalar>(Scalar(p[1]), Scalar(p[2])),
                                        p.size() == 4 ? Scalar(p[3]) : Scalar(0));
  }
  if (fam == "tilted") {
    if (p.size() != 5 && p.size() != 6)
      throw Error("tilted potential needs params a,cx,cy,vx,vy[,b]");
    return Potential<Scalar>::tilted(Scalar(p[0]), Vec2<Scalar>(Scalar(p[1]), Scalar(p[2])),
                                     Vec2<Scalar>(Scalar(p[3]), Scalar(p[4])),
                                     p.size() == 6 ? Scalar(p[5]) : Scalar(0));
  }
  if (fam == "sdist")
    throw Error("signed-distance potentials need a base curve; use a config file");
  throw Error("unknown potential family '" + fam + "'");
}

namespace detail {
inline const std::string* find(const ConfigMap& cfg, const std::string& sec,
                               const std::string& key) {
  const auto s = cfg.find(sec);
  if (s == cfg.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

inline double number_or(const ConfigMap& cfg, const std::string& sec, const std::string& key,
                        double fallback) {
  const std::string* v = find(cfg, sec, key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw Error("config [" + sec + "] " + key + ": bad number '" + *v + "'");
  }
}
}  // namespace detail

template <typename Scalar = double>
Anisotropy<Scalar> anisotropy_from_config(const ConfigMap& cfg) {
  const std::string* fam = detail::find(cfg, "anisotropy", "family");
  if (!fam) return Anisotropy<Scalar>::isotropic();
  std::string spec = *fam;
  if (const std::string* p = detail::find(cfg, "anisotropy", "params")) spec += ":" + *p;
  if (const std::string* e = detail::find(cfg, "anisotropy", "epsilon")) {
    if (*fam != "lq") throw Error("config: epsilon applies to the lq family only");
    spec += (spec.find(':') == std::string::npos ? ":" : ",") + *e;
  }
  return anisotropy_from_spec<Scalar>(spec);
}

template <typename Scalar = double>
Potential<Scalar> potential_from_config(const ConfigMap& cfg) {
  const std::string* fam = detail::find(cfg, "potential", "family");
  if (!fam) return Potential<Scalar>::zero();
  if (*fam == "sdist") {
    const std::string* path = detail::find(cfg, "potential", "base_curve");
    if (!path) throw Error("config: sdist potential needs base_curve = <path>");
    const double tau = detail::number_or(cfg, "potential", "tau", 1.0);
    return Potential<Scalar>::signed_distance(read_curve_file<Scalar>(*path), Scalar(tau));
  }
  std::string spec = *fam;
  if (const std::string* p = detail::find(cfg, "potential", "params")) spec += ":" + *p;
  return potential_from_spec<Scalar>(spec);
}

template <typename Scalar = double>
SolveConfig<Scalar> solve_config_from_config(const ConfigMap& cfg) {
  SolveConfig<Scalar> sc;
  sc.dt0 = Scalar(detail::number_or(cfg, "solve", "dt", double(sc.dt0)));
  sc.tolerance = Scalar(detail::number_or(cfg, "solve", "tolerance", double(sc.tolerance)));
  sc.max_iters = int(detail::number_or(cfg, "solve", "max_iters", sc.max_iters));
  sc.remesh_every = int(detail::number_or(cfg, "solve", "remesh_every", sc.remesh_every));
  sc.r_max = Scalar(detail::number_or(cfg, "solve", "r_max", double(sc.r_max)));
  sc.eps_kill = Scalar(detail::number_or(cfg, "solve", "eps_kill", double(sc.eps_kill)));
  sc.multi_start = int(detail::number_or(cfg, "solve", "multi_start", sc.multi_start));
  sc.seed = std::uint64_t(detail::number_or(cfg, "solve", "seed", double(sc.seed)));
  sc.target_h = Scalar(detail::number_or(cfg, "solve", "target_h", double(sc.target_h)));
  sc.log_every = int(detail::number_or(cfg, "solve", "log_every", sc.log_every));
  return sc;
}

// Optional target area; absent means unconstrained minimization.
template <typename Scalar = double>
std::optional<Scalar> volume_from_config(const ConfigMap& cfg) {
  const std::string* v = detail::find(cfg, "solve", "volume");
  if (!v) return std::nullopt;
  return Scalar(detail::number_or(cfg, "solve", "volume", 0.0));
}

// [init] section: either curve = <path>, or shape = circle|star with
// radius/n/cx/cy (+ amp/modes/seed for stars).  Fallback: unit circle.
template <typename Scalar = double>
MultiCurve<Scalar> init_from_config(const ConfigMap& cfg, std::uint64_t seed) {
  if (const std::string* path = detail::find(cfg, "init", "curve"))
    return read_curve_file<Scalar>(*path);
  const std::string* shape = detail::find(cfg, "init", "shape");
  const Index n = Index(detail::number_or(cfg, "init", "n", 256));
  const Scalar radius = Scalar(detail::number_or(cfg, "init", "radius", 1.0));
  const Vec2<Scalar> ctr(Scalar(detail::number_or(cfg, "init", "cx", 0.0)),
                         Scalar(detail::number_or(cfg, "init", "cy", 0.0)));
  if (!shape || *shape == "circle") return build(circle_loop(radius, n, ctr));
  if (*shape == "star") {
    std::mt19937_64 rng(std::uint64_t(detail::number_or(cfg, "init", "seed", double(seed))));
    const Scalar amp = Scalar(detail::number_or(cfg, "init", "amp", 0.25));
    const int modes = int(detail::number_or(cfg, "init", "modes", 5));
    return build(random_star_loop<Scalar>(rng, n, radius, amp, modes, ctr));
  }
  throw Error("config [init] shape must be circle or star");
}

// ----------------------------------------------------------------------- SVG

// Plot loops dark, optionally color vertices by a scalar field (blue = 0 to
// red = max) and overlay a dashed convex hull.
template <typename Scalar>
std::string curve_to_svg(const MultiCurve<Scalar>& c, const VecX<Scalar>* field = nullptr,
                         const Loop<Scalar>* hull = nullptr) {
  Scalar xmin = std::numeric_limits<Scalar>::infinity(), xmax = -xmin, ymin = xmin, ymax = xmax;
  auto widen = [&](const Points<Scalar>& p) {
    xmin = std::min(xmin, p.col(0).minCoeff());
    xmax = std::max(xmax, p.col(0).maxCoeff());
    ymin = std::min(ymin, p.col(1).minCoeff());
    ymax = std::max(ymax, p.col(1).maxCoeff());
  };
  for (const auto& l : c.loops) widen(l.pts);
  if (hull) widen(hull->pts);
  const Scalar w = std::max(xmax - xmin, Scalar(1e-9)), hgt = std::max(ymax - ymin, Scalar(1e-9));
  const Scalar pad = Scalar(0.05) * std::max(w, hgt);
  const double W = 800.0, H = 800.0 * double((hgt + 2 * pad) / (w + 2 * pad));
  auto X = [&](Scalar x) { return double((x - xmin + pad) / (w + 2 * pad)) * W; };
  auto Y = [&](Scalar y) { return H - double((y - ymin + pad) / (hgt + 2 * pad)) * H; };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  auto poly = [&](const Points<Scalar>& p, const char* style) {
    os << "<polygon points=\"";
    for (Index i = 0; i < p.rows(); ++i) os << X(p(i, 0)) << "," << Y(p(i, 1)) << " ";
    os << "\" style=\"" << style << "\"/>\n";
  };
  if (hull) poly(hull->pts, "fill:none;stroke:#2a9d2a;stroke-width:1.5;stroke-dasharray:6 4");
  for (const auto& l : c.loops) poly(l.pts, "fill:none;stroke:#222;stroke-width:2");
  if (field && field->size() == c.vertex_count()) {
    const Scalar top = std::max(field->maxCoeff(), Scalar(1e-300));
    Index off = 0;
    for (const auto& l : c.loops)
      for (Index i = 0; i < l.size(); ++i, ++off) {
        const double t = std::clamp(double((*field)[off] / top), 0.0, 1.0);
        const int r = int(255 * t), b = int(255 * (1 - t));
        os << "<circle cx=\"" << X(l.pts(i, 0)) << "\" cy=\"" << Y(l.pts(i, 1))
           << "\" r=\"2.5\" fill=\"rgb(" << r << ",0," << b << ")\"/>\n";
      }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace wulff2d
