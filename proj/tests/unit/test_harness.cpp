#include "covconv/harness.hpp"

#include <json.hpp>

#include "util.hpp"

using namespace covconv;
using namespace test;
using nlohmann::json;

namespace {

CheckReport run(const std::string& check, const std::string& cfg) { return run_check(check, parse_config(cfg)); }

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"({
    "manifold": {"preset": "scaled-sphere", "params": [2.0]},
    "field": {"oracle": "scalar-bump", "params": [1, 1, 0.5]},
    "kernel": {"family": "radial", "params": [3]},
    "quadrature": {"radius": 0.2, "n_r": 3, "n_ang": 7},
    "integrator": {"steps": 50},
    "sharing_mode": "geodesic",
    "output_points": [[1, 0], [1.2, 0.4]],
    "tolerances": {"holonomy": 1e-3}
  })");
  CHECK(cfg.manifold.name == "scaled-sphere");
  CHECK(cfg.manifold.params == std::vector<double>{2.0});
  CHECK(cfg.kernel.family == "radial");
  CHECK(cfg.quadrature.n_angular == 7);
  CHECK(cfg.steps == 50);
  CHECK(cfg.sharing_mode == SharingMode::Geodesic);
  CHECK(cfg.output_points.size() == 2);
  CHECK(reference_point(cfg) == pt(1, 0));
  CHECK(cfg.tolerances.at("holonomy") == 1e-3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"manifol": "sphere"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tolerances": {"holonomy": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tolerances": {"holonomy": -1e-3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tolerances": {"made-up": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"quadrature": {"radius": -1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"integrator": {"steps": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sharing_mode": "sideways"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"field": {"csv": "f.csv"}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  CHECK_THROWS_AS(run("flat-reduction", R"({"manifold": "no-such-preset", "reference_point": [0, 0]})"), ConfigError);
  CHECK_THROWS_AS(run("no-such-check", R"({"reference_point": [0, 0]})"), ConfigError);
  CHECK_THROWS_AS(run("flat-reduction", R"({"manifold": "sphere", "reference_point": [1, 0]})"), ConfigError);
}

TEST_CASE("relative CSV paths resolve against the config directory") {
  const auto cfg = parse_config(R"({"field": {"csv": "data/f.csv", "rank": [0, 0]}})", "/some/dir");
  CHECK(cfg.field.csv == "/some/dir/data/f.csv");
}

TEST_CASE("flat-reduction examples") {
  SUBCASE("constant kernel and field") {
    const auto r = run("flat-reduction", R"({"kernel": {"family": "constant", "params": [1]},
      "field": {"oracle": "scalar-constant", "params": [2]}, "reference_point": [0, 0],
      "output_points": [[0, 0], [3, 1]]})");
    CHECK(r.passed);
    CHECK(r.tolerance == 1e-10);
  }
  SUBCASE("zero kernel has identically zero error") {
    const auto r = run("flat-reduction", R"({"kernel": {"family": "zero"},
      "field": {"oracle": "scalar-bump", "params": [0, 0, 0.5]}, "reference_point": [0.2, 0]})");
    CHECK(r.passed);
    CHECK(r.max_abs_error == 0.0);
  }
  SUBCASE("linear field at (2, 0)") {
    const auto cfg = parse_config(R"({"kernel": {"family": "constant", "params": [1]},
      "field": {"oracle": "scalar-linear", "params": [0, 1, 0]},
      "quadrature": {"radius": 1.0}, "sharing_mode": "none", "reference_point": [2, 0]})");
    CHECK(run_check("flat-reduction", cfg).passed);
    CHECK(std::abs(run_convolution(cfg)[0].components[0] - 2 * kPi) < 1e-8);
  }
}

TEST_CASE("gauge-equivariance examples") {
  SUBCASE("identity transition") {
    const auto r = run("gauge-equivariance", R"({"manifold": "sphere", "chart_transition": "identity",
      "field": {"oracle": "sphere-ambient", "params": [0.3, -0.4, 0.8]},
      "kernel": {"family": "radial-identity", "params": [1, 0.5]},
      "quadrature": {"radius": 0.3}, "sharing_mode": "none", "reference_point": [1.2, 0.4]})");
    CHECK(r.passed);
    CHECK(r.max_abs_error <= 1e-14);
  }
  SUBCASE("cartesian to polar, vector output") {
    const auto r = run("gauge-equivariance", R"({"manifold": "flat2d-polar",
      "chart_transition": "polar-to-cartesian",
      "field": {"oracle": "vector-linear", "params": [0.2, -0.5, 0.4, 0.1, 1.0, -0.3]},
      "kernel": {"family": "radial-identity", "params": [1, 0.5]},
      "quadrature": {"radius": 0.3}, "sharing_mode": "none", "reference_point": [2, 1]})");
    CHECK(r.passed);
    CHECK(r.tolerance == 1e-6);
  }
  SUBCASE("rotated sphere chart") {
    const auto r = run("gauge-equivariance", R"({"manifold": "sphere", "chart_transition": "sphere-rotation",
      "field": {"oracle": "sphere-ambient", "params": [0.3, -0.4, 0.8]},
      "kernel": {"family": "linear-covector"},
      "quadrature": {"radius": 0.3}, "sharing_mode": "none", "reference_point": [1.3, 0.2]})");
    CHECK(r.passed);
    CHECK(r.tolerance == 1e-3);
  }
  SUBCASE("transition from the wrong chart") {
    CHECK_THROWS_AS(run("gauge-equivariance", R"({"manifold": "sphere", "chart_transition": "polar-to-cartesian",
      "reference_point": [1, 0]})"), ConfigError);
  }
}

TEST_CASE("weight-sharing examples") {
  SUBCASE("flat, any path") {
    const auto r = run("weight-sharing", R"({"field": {"oracle": "scalar-bump", "params": [0.3, 0, 0.5]},
      "kernel": {"family": "radial", "params": [1]}, "reference_point": [0, 0],
      "path": [[0, 0], [2, 1], [-1, 3]]})");
    CHECK(r.passed);
    CHECK(r.tolerance == 1e-10);
  }
  SUBCASE("zero-length path is exact") {
    const auto r = run("weight-sharing", R"({"manifold": "sphere",
      "field": {"oracle": "sphere-ambient", "params": [0.3, -0.4, 0.8]},
      "kernel": {"family": "radial-identity", "params": [1, 0.5]}, "quadrature": {"radius": 0.3},
      "reference_point": [1, 1], "path": [[1, 1], [1, 1]]})");
    CHECK(r.passed);
    CHECK(r.max_abs_error == 0.0);
  }
  SUBCASE("sphere equator, scalar bump, with the recentered bump as independent oracle") {
    const auto r = run("weight-sharing", R"({"manifold": "sphere",
      "field": {"oracle": "scalar-bump", "params": [1.5707963267948966, 0.0, 0.4]},
      "transported_field": {"oracle": "scalar-bump", "params": [1.5707963267948966, 1.5707963267948966, 0.4]},
      "kernel": {"family": "linear-vector"}, "quadrature": {"radius": 0.3},
      "reference_point": [1.5707963267948966, 0],
      "path": [[1.5707963267948966, 0], [1.5707963267948966, 1.5707963267948966]]})");
    CHECK(r.passed);
    CHECK(r.tolerance == 1e-4);
    CHECK(r.points.size() == 2);
  }
}

TEST_CASE("holonomy examples") {
  SUBCASE("flat loop") {
    const auto r = run("holonomy", R"({"manifold": "flat2d-polar",
      "loop": {"shape": "polyline", "points": [[1, 0], [2, 0], [2, 1.5], [1, 1.5]]}})");
    CHECK(r.passed);
    CHECK(r.max_abs_error <= 1e-10);
  }
  SUBCASE("octant") {
    const auto r = run("holonomy", R"({"manifold": "sphere", "loop": {"shape": "octant"}})");
    CHECK(r.passed);
    CHECK(std::abs(r.details.at("angle") - kPi / 2) < 1e-4);
  }
  for (const double alpha : {kPi / 6, kPi / 3}) {
    const std::string a = std::to_string(alpha);
    SUBCASE("lune and triangle") {
      const auto lune = run("holonomy", R"({"manifold": "sphere", "loop": {"shape": "lune", "alpha": )" + a + "}}");
      CHECK(lune.passed);
      CHECK(std::abs(lune.details.at("angle") - 2 * alpha) < 1e-4);
      const auto tri = run("holonomy", R"({"manifold": "sphere", "loop": {"shape": "triangle", "alpha": )" + a + "}}");
      CHECK(tri.passed);
      CHECK(std::abs(tri.details.at("angle") - alpha) < 1e-4);
    }
  }
  SUBCASE("sphere shapes need a sphere") {
    CHECK_THROWS_AS(run("holonomy", R"({"loop": {"shape": "octant"}})"), ConfigError);
  }
  SUBCASE("a wrong expectation fails") {
    const auto r = run("holonomy", R"({"manifold": "sphere", "loop": {"shape": "octant", "expected_angle": 1.0}})");
    CHECK_FALSE(r.passed);
  }
}

TEST_CASE("loop prediction") {
  const Manifold s = make_manifold("sphere");
  const double c = std::cos(kLoopPoleLatitude);
  CHECK(predicted_holonomy_angle({"octant", 0, {}, {}}, s) == doctest::Approx(kPi / 2 * c));
  CHECK(predicted_holonomy_angle({"lune", 0.5, {}, {}}, s) == doctest::Approx(1.0 * c));
  CHECK(predicted_holonomy_angle({"triangle", 0.5, {}, {}}, s) == doctest::Approx(0.5 * c));
  CHECK(loop_vertices({"lune", 0.5, {}, {}}, s).size() == 6);
}

TEST_CASE("remaining checks pass on their defaults") {
  CHECK(run("two-path-kernel", R"({"manifold": "sphere", "quadrature": {"radius": 0.3, "n_r": 3, "n_ang": 6}})").passed);
  CHECK(run("two-path-kernel", R"({"manifold": "flat2d-polar", "path": [[1, 0], [2, 0], [2, 1]],
    "path2": [[1, 0], [1, 1], [2, 1]]})").passed);
  CHECK(run("geodesic-accuracy", R"({"manifold": "sphere"})").passed);
  CHECK(run("geodesic-accuracy", R"({"manifold": {"preset": "scaled-sphere", "params": [3.0]}})").passed);
  CHECK(run("transport-isometry", R"({"manifold": "sphere"})").passed);
  CHECK(run("transport-isometry", R"({"manifold": "graph-quadratic", "samples": 5})").passed);
  CHECK(run("locality-linearity", R"({"manifold": "sphere", "field": {"oracle": "sphere-ephi-unit"},
    "field2": {"oracle": "sphere-ambient", "params": [1, 0, 0]}, "kernel": {"family": "linear-covector"},
    "quadrature": {"radius": 0.3}, "reference_point": [1.2, 0.4]})").passed);
  CHECK(run("multiplicities", "{}").passed);
}

TEST_CASE("report JSON schema and reproducibility") {
  const auto cfg = parse_config(R"({"manifold": "sphere", "samples": 5, "seed": 99})");
  const auto a = run_check("geodesic-accuracy", cfg);
  const auto b = run_check("geodesic-accuracy", cfg);
  CHECK(a.max_abs_error == b.max_abs_error);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].error == b.points[i].error);
    CHECK(a.points[i].coords == b.points[i].coords);
  }
  const json j = json::parse(report_to_json(a));
  for (const char* key : {"check", "status", "max_abs_error", "max_rel_error", "tolerance", "points", "wall_time_s"})
    CHECK(j.contains(key));
  CHECK(j["status"] == "pass");
  CHECK(j["points"].size() == 5);
  CHECK(j["points"][0].contains("coords"));
  CHECK(j["points"][0].contains("error"));
}

TEST_CASE("status is pass iff the error is within tolerance") {
  auto cfg = parse_config(R"({"manifold": "sphere", "samples": 3, "tolerances": {"geodesic-accuracy": 1e-30}})");
  const auto r = run_check("geodesic-accuracy", cfg);
  CHECK(r.passed == (r.max_abs_error <= r.tolerance));
  CHECK_FALSE(r.passed);
}
