#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "test_support.hpp"
#include "wulff2d/curve.hpp"
#include "wulff2d/io.hpp"
#include "wulff2d/report.hpp"
#include "wulff2d/twopoint.hpp"
#include "wulff2d/variation.hpp"

using namespace wulff2d;
using oracle::kPi;

namespace {

const Anisotropy<double> iso = Anisotropy<double>::isotropic();
const Potential<double> gq = Potential<double>::quadratic(1.0);
const Potential<double> gball = Potential<double>::quadratic(3.0, {0, 0}, -3.0);

MultiCurve<double> two_small_balls(Index n = 256) {
  const double r = oracle::small_critical_radius();
  return build({circle_loop(r, n, {-1.0, 0.0}), circle_loop(r, n, {1.0, 0.0})});
}

const CheckResult& check_named(const Certificate& cert, const std::string& name) {
  for (const auto& r : cert.checks)
    if (r.name == name) return r;
  throw std::runtime_error("missing check " + name);
}

}  // namespace

// ---------------------------------------------------------------------------
// serialization round trips

TEST_CASE("curve json round trip is exact") {
  const auto c = build({circle_loop(1.3, 64, {0.2, -0.1}), circle_loop(0.9, 48, {4.0, 0.0})});
  const auto j = curve_to_json(c);
  const auto back = curve_from_json(j);
  REQUIRE(back.loops.size() == c.loops.size());
  for (std::size_t l = 0; l < c.loops.size(); ++l) {
    REQUIRE(back.loops[l].size() == c.loops[l].size());
    CHECK((back.loops[l].pts - c.loops[l].pts).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("curve csv round trip is exact") {
  std::mt19937_64 rng(3);
  const auto c =
      build({random_star_loop<double>(rng, 40, 1.0, 0.2, 4), circle_loop(0.5, 24, {5.0, 0.0})});
  const auto text = curve_to_csv(c);
  const auto back = curve_from_csv(text);
  REQUIRE(back.loops.size() == 2);
  for (std::size_t l = 0; l < 2; ++l)
    CHECK((back.loops[l].pts - c.loops[l].pts).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("curve file io dispatches on extension") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "wulff2d_io_test";
  fs::create_directories(dir);
  const auto c = build(circle_loop(1.0, 32));
  for (const char* name : {"c.json", "c.csv"}) {
    const auto path = (dir / name).string();
    write_curve_file(path, c);
    const auto back = read_curve_file(path);
    CHECK((back.loops[0].pts - c.loops[0].pts).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(read_curve_file((dir / "missing.json").string()), Error);
  write_text((dir / "garbage.json").string(), "not json at all {");
  CHECK_THROWS_AS(read_curve_file((dir / "garbage.json").string()), Error);
  write_text((dir / "empty.csv").string(), "\n\n");
  CHECK_THROWS_AS(read_curve_file((dir / "empty.csv").string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("config parser handles sections, comments and errors") {
  const std::string text =
      "# leading comment\n"
      "[solve]\n"
      "dt = 0.05   ; trailing comment\n"
      "max_iters = 100\n"
      "\n"
      "[anisotropy]\n"
      "family = elliptic\n"
      "params = 2,1\n";
  const auto cfg = parse_config(text);
  REQUIRE(cfg.count("solve"));
  CHECK(cfg.at("solve").at("dt") == "0.05");
  CHECK(cfg.at("solve").at("max_iters") == "100");
  CHECK(cfg.at("anisotropy").at("family") == "elliptic");
  CHECK_THROWS_AS(parse_config("key = 1\n"), Error);          // key outside any section
  CHECK_THROWS_AS(parse_config("[solve]\nno equals\n"), Error);
  const auto sc = solve_config_from_config(cfg);
  CHECK(sc.dt0 == 0.05);
  CHECK(sc.max_iters == 100);
  // unknown sections are ignored, absent ones fall back to defaults
  const auto sc2 = solve_config_from_config(parse_config("[other]\nx = 1\n"));
  CHECK(sc2.max_iters == SolveConfig<double>{}.max_iters);
  CHECK_THROWS_AS(solve_config_from_config(parse_config("[solve]\ndt = abc\n")), Error);
}

TEST_CASE("anisotropy and potential specs parse and reject garbage") {
  CHECK(anisotropy_from_spec("iso").value({0.0, 1.0}) == doctest::Approx(1.0));
  const auto ell = anisotropy_from_spec("elliptic:2,1");
  CHECK(tangential_coefficient(ell, Vec2<double>{1, 0}) == doctest::Approx(0.5));
  const auto lq = anisotropy_from_spec("lq:4,0.05");
  CHECK(lq.value({0.0, 1.0}) > 0);
  CHECK_THROWS_AS(anisotropy_from_spec("nope:1"), Error);
  CHECK_THROWS_AS(anisotropy_from_spec("elliptic:2"), Error);

  const auto gz = potential_from_spec("zero");
  CHECK(gz.value({3, 4}) == 0.0);
  const auto g2 = potential_from_spec("quadratic:1e-2,0,0");
  CHECK(g2.value({1, 0}) == doctest::Approx(1e-2));
  const auto gt = potential_from_spec("tilted:1,0,0,0.5,0");
  CHECK(gt.value({1, 0}) == doctest::Approx(1.0 + 0.5));
  CHECK_THROWS_AS(potential_from_spec("quadratic:-1,0,0"), Error);
  CHECK_THROWS_AS(potential_from_spec("sdist:whatever"), Error);
  CHECK_THROWS_AS(potential_from_spec("blah"), Error);
}

TEST_CASE("init specification builds curves") {
  const auto circle_cfg = parse_config("[init]\nshape = circle\nn = 48\nradius = 1.5\n");
  const auto c = init_from_config(circle_cfg, 1);
  CHECK(c.loops[0].size() == 48);
  CHECK(enclosed_area(c) == doctest::Approx(kPi * 1.5 * 1.5).epsilon(1e-2));
  const auto star_cfg = parse_config("[init]\nshape = star\nn = 64\nseed = 5\namp = 0.2\n");
  const auto s = init_from_config(star_cfg, 9);
  CHECK(s.loops[0].size() == 64);
  const auto s2 = init_from_config(star_cfg, 9);
  CHECK(curve_fingerprint(s) == curve_fingerprint(s2));
  const auto def = init_from_config(parse_config(""), 1);
  CHECK(def.loops[0].size() == 256);
}

TEST_CASE("report json exposes exactly the documented keys") {
  const auto c = build(circle_loop(1.0, 128));
  const auto rep = first_variation_residual(c, iso, gq, true);
  const auto sp_free = spectrum(c, iso, gq, SpectrumMode::free_mode, 4);
  const auto sp_mz = spectrum(c, iso, gq, SpectrumMode::mean_zero, 4);
  const auto j = solution_report_json(rep, sp_free.values, sp_mz.values);
  const std::vector<std::string> keys = {"F",   "surface",      "bulk",
                                         "mu",  "residual_sup", "spectrum_free",
                                         "spectrum_mean_zero"};
  CHECK(j.size() == keys.size());
  for (const auto& k : keys) CHECK_MESSAGE(j.contains(k), k);
  CHECK(j["F"].get<double>() == doctest::Approx(rep.total));
  CHECK(j["spectrum_free"].size() == 4);
}

TEST_CASE("field csv has the documented header and one row per vertex") {
  const auto c = build(circle_loop(1.0, 32));
  const auto f = two_point(c);
  const auto text = field_to_csv(c, f);
  std::size_t lines = 0, pos = 0;
  while ((pos = text.find('\n', pos)) != std::string::npos) ++lines, ++pos;
  CHECK(lines == 33);  // header + 32 vertices
  CHECK(text.rfind("index,x,y,S,argmax,flags", 0) == 0);
}

TEST_CASE("event streams serialize to one json object per line") {
  std::vector<SolveEvent> events = {{3, "merge", "crossing boundaries united"},
                                    {7, "remesh", "resampled"}};
  const auto text = events_to_jsonl(events);
  std::size_t start = 0;
  int rows = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto row = json::parse(text.substr(start, end - start));
    CHECK(row.contains("iter"));
    CHECK(row.contains("kind"));
    ++rows;
    start = end + 1;
  }
  CHECK(rows == 2);
}

TEST_CASE("svg output draws every loop and optional overlays") {
  const auto c = build({circle_loop(1.0, 32), circle_loop(0.4, 16, {3.0, 0.0})});
  const auto plain = curve_to_svg<double>(c);
  CHECK(plain.find("<svg") != std::string::npos);
  CHECK(plain.find("polygon") != std::string::npos);
  auto f = two_point(c);
  const auto hull = convex_hull(c);
  const auto fancy = curve_to_svg(c, &f.value, &hull.hull);
  CHECK(fancy.find("circle") != std::string::npos);   // heat markers
  CHECK(fancy.size() > plain.size());
}

// ---------------------------------------------------------------------------
// diagnostics battery

TEST_CASE("a constrained disk in a radial well is a minimizer candidate") {
  const auto c = build(scale_to_area(circle_loop(1.0, 256), kPi));
  const auto cert = diagnose(c, iso, gq, std::optional<double>(kPi));
  CHECK(cert.mode == "constrained");
  for (const char* name :
       {"stationarity", "stability", "connected", "two_point_bound", "hull_distance",
        "outward_minimality"})
    CHECK_MESSAGE(check_named(cert, name).pass, name);
  CHECK(check_named(cert, "volume").informational);
  CHECK(check_named(cert, "volume").pass);
  CHECK(cert.pass);
  CHECK(cert.verdict == "minimizer candidate");
}

TEST_CASE("a wiggly star is reported non-critical") {
  std::mt19937_64 rng(4);
  const auto c = build(random_star_loop<double>(rng, 128, 1.0, 0.3, 5));
  const auto cert = diagnose(c, iso, gq, std::optional<double>(enclosed_area(c)));
  CHECK(!check_named(cert, "stationarity").pass);
  CHECK(cert.verdict == "non-critical");
}

TEST_CASE("the small critical ball is critical but not minimizing") {
  const double r = oracle::small_critical_radius();
  const auto c = build(circle_loop(r, 256));
  const auto cert = diagnose(c, iso, gball, std::optional<double>{});
  CHECK(cert.mode == "unconstrained");
  CHECK(check_named(cert, "stationarity").pass);
  CHECK(!check_named(cert, "stability").pass);
  // geometry checks stay clean: the failure is spectral, not geometric
  CHECK(check_named(cert, "two_point_bound").pass);
  CHECK(check_named(cert, "hull_distance").pass);
  CHECK(cert.verdict == "critical but not minimizing");
}

TEST_CASE("two disjoint balls fail connectedness and flag unstable components") {
  const auto c = two_small_balls();
  const auto cert = diagnose(c, iso, gball, std::optional<double>{});
  CHECK(!check_named(cert, "connected").pass);
  CHECK(!check_named(cert, "two_point_bound").pass);
  CHECK(check_named(cert, "component_stability").measured >= 1.0);
  CHECK(cert.subsolution_label == "approximate");
  CHECK(cert.q_s < 0);
  CHECK(cert.verdict == "non-critical");  // the pair is not a stationary configuration
}

TEST_CASE("certificates are reproducible modulo the timestamp") {
  const auto c = build(circle_loop(1.0, 96));
  auto j1 = certificate_to_json(diagnose(c, iso, gq, std::optional<double>(kPi)));
  auto j2 = certificate_to_json(diagnose(c, iso, gq, std::optional<double>(kPi)));
  j1.erase("timestamp");
  j2.erase("timestamp");
  CHECK(j1 == j2);
}

TEST_CASE("the fingerprint tracks vertex data") {
  auto c = build(circle_loop(1.0, 64));
  const auto f1 = curve_fingerprint(c);
  auto moved = c;
  moved.loops[0].pts(10, 0) += 1e-12;
  CHECK(curve_fingerprint(moved) != f1);
  CHECK(curve_fingerprint(c) == f1);
}

TEST_CASE("certificate json structure") {
  const auto c = build(circle_loop(1.0, 64));
  const auto j = certificate_to_json(diagnose(c, iso, gq, std::optional<double>(kPi)));
  for (const char* k : {"fingerprint", "mode", "checks", "pass", "verdict", "subsolution",
                        "timestamp"})
    CHECK_MESSAGE(j.contains(k), k);
  CHECK(j["fingerprint"].get<std::string>().rfind("0x", 0) == 0);
  REQUIRE(j["checks"].is_array());
  for (const auto& r : j["checks"]) {
    for (const char* k : {"name", "anchor", "measured", "threshold", "pass", "informational"})
      CHECK_MESSAGE(r.contains(k), k);
  }
  CHECK(j["subsolution"].contains("q_s"));
  CHECK(j["subsolution"].contains("i_omega"));
  CHECK(j["subsolution"].contains("margin"));
  CHECK(j["subsolution"].contains("label"));
}

TEST_CASE("diagnose never throws on awkward inputs") {
  // a tiny triangle: many checks will fail or be vacuous, but the battery
  // must still produce a certificate
  Loop<double> tri;
  tri.pts.resize(3, 2);
  tri.pts << 0, 0, 1e-3, 0, 0, 1e-3;
  const auto c = build(tri);
  const auto cert = diagnose(c, iso, gq, std::optional<double>{});
  CHECK(cert.checks.size() >= 7);
  CHECK(!cert.verdict.empty());
}
