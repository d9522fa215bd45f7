// Command-line front end: minimize / diagnose / two-point / spectrum /
// wulff / atw.  Exit codes: 0 success, 1 failed certificate under --strict,
// 2 bad input (missing files, parse errors, invalid parameters).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "wulff2d/io.hpp"
#include "wulff2d/report.hpp"
#include "wulff2d/solve.hpp"
#include "wulff2d/twopoint.hpp"

using namespace wulff2d;

namespace {

struct Options {
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool strict = false;

  std::string config_path, out_dir = ".";
  std::string curve_path, aniso_spec = "iso", potential_spec = "zero";
  std::string mode = "unconstrained";
  double volume = -1;  // <0: take the curve's enclosed area
  std::string out_path, svg_path;
  bool hull_accel = false;
  int k = 6;
  std::string family, params, out_prefix = "atw";
  double epsilon = -1, scale = 1, tau = 0;
  int n = 256, steps = 1;
};

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void emit(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-")
    std::cout << body;
  else
    write_text(path, body);
}

int finish_certificate(const Certificate& cert, const Options& opt, const std::string& path) {
  emit(path, certificate_to_json(cert).dump(2) + "\n");
  if (path.empty() || path == "-") std::cout.flush();
  std::cerr << "verdict: " << cert.verdict << "\n";
  return (opt.strict && !cert.pass) ? 1 : 0;
}

json spectra_report(const MultiCurve<double>& c, const Anisotropy<double>& phi,
                    const Potential<double>& g, bool constrained, int k) {
  const auto rep = first_variation_residual(c, phi, g, constrained);
  const Eigen::Index N = c.vertex_count();
  const int kf = std::max(1, std::min<int>(k, int(std::min<Eigen::Index>(10, N))));
  const int km = std::max(1, std::min<int>(k, int(std::min<Eigen::Index>(10, N - 1))));
  const auto sfree = spectrum(c, phi, g, SpectrumMode::free_mode, kf);
  const auto smz = spectrum(c, phi, g, SpectrumMode::mean_zero, km);
  return solution_report_json(rep, sfree.values, smz.values);
}

int run_minimize(const Options& opt) {
  const ConfigMap cfg = parse_config(read_text(opt.config_path));
  const auto phi = anisotropy_from_config(cfg);
  const auto g = potential_from_config(cfg);
  auto sc = solve_config_from_config<double>(cfg);
  if (opt.seed_given) sc.seed = opt.seed;
  const auto volume = volume_from_config<double>(cfg);
  const MultiCurve<double> init = init_from_config<double>(cfg, sc.seed);

  const SolveResult<double> res =
      volume ? minimize_constrained(init, phi, g, *volume, sc)
             : minimize_unconstrained(init, phi, g, sc);
  std::cerr << "solve: " << res.reason << " after " << res.iterations
            << " iterations, F = " << res.final_energy << ", residual = " << res.final_residual
            << "\n";

  write_text(join_path(opt.out_dir, "events.jsonl"), events_to_jsonl(res.events));
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%04zu.json", i);
    write_curve_file(join_path(opt.out_dir, name), res.trajectory[i]);
  }
  if (res.curve.loops.empty()) {
    write_text(join_path(opt.out_dir, "final.json"), json{{"loops", json::array()}}.dump(2) + "\n");
    json cert{{"pass", false}, {"verdict", res.reason}, {"checks", json::array()}};
    write_text(join_path(opt.out_dir, "certificate.json"), cert.dump(2) + "\n");
    return opt.strict ? 1 : 0;
  }
  write_curve_file(join_path(opt.out_dir, "final.json"), res.curve);
  write_text(join_path(opt.out_dir, "report.json"),
             spectra_report(res.curve, phi, g, volume.has_value(), 6).dump(2) + "\n");

  const auto f = two_point(res.curve);
  const auto hull = convex_hull(res.curve);
  write_text(join_path(opt.out_dir, "final.svg"), curve_to_svg(res.curve, &f.value, &hull.hull));
  const Certificate cert = diagnose(res.curve, phi, g, volume);
  return finish_certificate(cert, opt, join_path(opt.out_dir, "certificate.json"));
}

int run_diagnose(const Options& opt) {
  const MultiCurve<double> c = read_curve_file(opt.curve_path);
  const auto phi = anisotropy_from_spec(opt.aniso_spec);
  const auto g = potential_from_spec(opt.potential_spec);
  std::optional<double> volume;
  if (opt.mode == "constrained")
    volume = opt.volume > 0 ? opt.volume : std::abs(enclosed_area(c));
  else if (opt.mode != "unconstrained")
    throw Error("--mode must be constrained or unconstrained");
  if (!opt.svg_path.empty()) {
    const auto f = two_point(c);
    const auto hull = convex_hull(c);
    write_text(opt.svg_path, curve_to_svg(c, &f.value, &hull.hull));
  }
  return finish_certificate(diagnose(c, phi, g, volume), opt, opt.out_path);
}

int run_two_point(const Options& opt) {
  const MultiCurve<double> c = read_curve_file(opt.curve_path);
  const auto f = two_point(c, opt.hull_accel);
  emit(opt.out_path, field_to_csv(c, f));
  if (!opt.svg_path.empty()) {
    const auto hull = convex_hull(c);
    write_text(opt.svg_path, curve_to_svg(c, &f.value, &hull.hull));
  }
  return 0;
}

int run_spectrum(const Options& opt) {
  const MultiCurve<double> c = read_curve_file(opt.curve_path);
  const auto phi = anisotropy_from_spec(opt.aniso_spec);
  const auto g = potential_from_spec(opt.potential_spec);
  emit(opt.out_path, spectra_report(c, phi, g, opt.mode == "constrained", opt.k).dump(2) + "\n");
  return 0;
}

int run_wulff(const Options& opt) {
  std::string spec = opt.family;
  if (!opt.params.empty()) spec += ":" + opt.params;
  if (opt.epsilon > 0) spec += (spec.find(':') == std::string::npos ? ":" : ",") +
                               std::to_string(opt.epsilon);
  const auto phi = anisotropy_from_spec(spec);
  if (opt.n < 3) throw Error("--n must be at least 3");
  const MultiCurve<double> w = build(wulff_shape(phi, opt.n, opt.scale));
  write_curve_file(opt.out_path.empty() ? "wulff.json" : opt.out_path, w);
  return 0;
}

int run_atw(const Options& opt) {
  MultiCurve<double> c = read_curve_file(opt.curve_path);
  const auto phi = anisotropy_from_spec(opt.aniso_spec);
  if (!(opt.tau > 0)) throw Error("--tau must be positive");
  SolveConfig<double> sc;
  sc.seed = opt.seed;
  json summary = json::array();
  char name[64];
  std::snprintf(name, sizeof name, "%s_000.json", opt.out_prefix.c_str());
  write_curve_file(name, c);
  for (int s = 1; s <= opt.steps; ++s) {
    const auto res = atw_step(c, phi, opt.tau, sc);
    summary.push_back(json{{"step", s},
                           {"reason", res.reason},
                           {"iterations", res.iterations},
                           {"F", res.final_energy},
                           {"residual", res.final_residual}});
    if (res.curve.loops.empty()) {
      std::cerr << "step " << s << ": " << res.reason << "\n";
      break;
    }
    c = res.curve;
    std::snprintf(name, sizeof name, "%s_%03d.json", opt.out_prefix.c_str(), s);
    write_curve_file(name, c);
  }
  write_text(opt.out_prefix + "_summary.json", summary.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic free-energy minimization and diagnostics on planar curves"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--seed", opt.seed, "seed for all randomized pieces");
  app.add_flag("--strict", opt.strict, "exit 1 when a certificate fails");

  auto* minimize = app.add_subcommand("minimize", "run the descent solver from a config file");
  minimize->add_option("--config", opt.config_path, "config file path")->required();
  minimize->add_option("--out-dir", opt.out_dir, "output directory (must exist)");

  auto* diagnose_cmd = app.add_subcommand("diagnose", "certify a curve against the theory");
  diagnose_cmd->add_option("--curve", opt.curve_path, "curve JSON/CSV")->required();
  diagnose_cmd->add_option("--aniso", opt.aniso_spec, "anisotropy spec, e.g. elliptic:2,1");
  diagnose_cmd->add_option("--potential", opt.potential_spec, "potential spec, e.g. quadratic:1,0,0");
  diagnose_cmd->add_option("--mode", opt.mode, "constrained or unconstrained");
  diagnose_cmd->add_option("--volume", opt.volume, "target area (default: the curve's)");
  diagnose_cmd->add_option("--out", opt.out_path, "certificate path (default: stdout)");
  diagnose_cmd->add_option("--svg", opt.svg_path, "optional SVG plot path");

  auto* twopoint_cmd = app.add_subcommand("two-point", "dump the two-point field as CSV");
  twopoint_cmd->add_option("--curve", opt.curve_path, "curve JSON/CSV")->required();
  twopoint_cmd->add_option("--out", opt.out_path, "CSV path (default: stdout)");
  twopoint_cmd->add_flag("--hull", opt.hull_accel, "restrict partner scan to hull vertices");
  twopoint_cmd->add_option("--svg", opt.svg_path, "optional SVG plot path");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "energy report with stability spectra");
  spectrum_cmd->add_option("--curve", opt.curve_path, "curve JSON/CSV")->required();
  spectrum_cmd->add_option("--aniso", opt.aniso_spec, "anisotropy spec");
  spectrum_cmd->add_option("--potential", opt.potential_spec, "potential spec");
  spectrum_cmd->add_option("--mode", opt.mode, "constrained or unconstrained (sets the multiplier)");
  spectrum_cmd->add_option("--k", opt.k, "eigenvalues per mode");
  spectrum_cmd->add_option("--out", opt.out_path, "report path (default: stdout)");

  auto* wulff_cmd = app.add_subcommand("wulff", "emit the equilibrium shape of an anisotropy");
  wulff_cmd->add_option("--family", opt.family, "iso | elliptic | lq")->required();
  wulff_cmd->add_option("--params", opt.params, "family parameters, comma separated");
  wulff_cmd->add_option("--epsilon", opt.epsilon, "lq smoothing parameter");
  wulff_cmd->add_option("--n", opt.n, "vertex count");
  wulff_cmd->add_option("--scale", opt.scale, "uniform scale factor");
  wulff_cmd->add_option("--out", opt.out_path, "curve path (default: wulff.json)");

  auto* atw_cmd = app.add_subcommand("atw", "implicit time steps of the anisotropic flow");
  atw_cmd->add_option("--curve", opt.curve_path, "initial curve JSON/CSV")->required();
  atw_cmd->add_option("--aniso", opt.aniso_spec, "anisotropy spec");
  atw_cmd->add_option("--tau", opt.tau, "time-step size")->required();
  atw_cmd->add_option("--steps", opt.steps, "number of steps");
  atw_cmd->add_option("--out-prefix", opt.out_prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.seed_given = app.count("--seed") > 0;

  try {
    if (minimize->parsed()) return run_minimize(opt);
    if (diagnose_cmd->parsed()) return run_diagnose(opt);
    if (twopoint_cmd->parsed()) return run_two_point(opt);
    if (spectrum_cmd->parsed()) return run_spectrum(opt);
    if (wulff_cmd->parsed()) return run_wulff(opt);
    if (atw_cmd->parsed()) return run_atw(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
