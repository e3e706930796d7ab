#include <random>

#include "util.hpp"

using namespace covconv;
using namespace test;

namespace {

const Manifold& plane() {
  static const Manifold m = make_manifold("flat2d-cartesian");
  return m;
}
const Manifold& polar() {
  static const Manifold m = make_manifold("flat2d-polar");
  return m;
}
const Manifold& sphere() {
  static const Manifold m = make_manifold("sphere");
  return m;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("metric_at examples") {
  CHECK(max_diff(metric_at(plane(), pt(3, 4)), Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_diff(metric_at(sphere(), pt(kPi / 3, 0)), mat(1, 0, 0, 0.75)) < 1e-15);
  CHECK(max_diff(metric_at(polar(), pt(2, 1)), mat(1, 0, 0, 4)) < 1e-15);
}

TEST_CASE("metric_at rejects points outside the chart") {
  CHECK_THROWS_AS(metric_at(sphere(), pt(0.0, 0.0)), DomainError);
  CHECK_THROWS_AS(metric_at(polar(), pt(-1.0, 0.0)), DomainError);
  CHECK_THROWS_AS(metric_at(plane(), Point::Zero(3)), InvalidArgument);
}

TEST_CASE("volume_density examples") {
  CHECK(volume_density(plane(), pt(-7, 2)) == 1.0);
  CHECK(volume_density(sphere(), pt(kPi / 6, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(volume_density(polar(), pt(2, 1)) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("christoffel_at examples") {
  const Christoffel flat = christoffel_at(plane(), pt(1, 2));
  for (double v : flat.values()) CHECK(v == 0.0);

  const Christoffel s = christoffel_at(sphere(), pt(kPi / 3, 0));
  CHECK(s(1, 0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(s(1, 1, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(s(0, 1, 1) == doctest::Approx(-std::sin(kPi / 3) * std::cos(kPi / 3)).epsilon(1e-14));

  const Christoffel p = christoffel_at(polar(), pt(2, 0.4));
  CHECK(p(0, 1, 1) == doctest::Approx(-2.0));
  CHECK(p(1, 0, 1) == doctest::Approx(0.5));
  CHECK(p(1, 1, 0) == doctest::Approx(0.5));
}

TEST_CASE("Christoffel symmetry and finite-difference agreement") {
  std::mt19937_64 rng(3);
  const std::vector<std::pair<const Manifold*, std::pair<Eigen::Vector2d, Eigen::Vector2d>>> cases = {
      {&sphere(), {{0.3, -3.0}, {kPi - 0.3, 3.0}}},
      {&polar(), {{0.2, -3.0}, {3.0, 3.0}}},
  };
  const Manifold graph = make_manifold("graph-quadratic", {0.8, -0.3, 1.2});
  for (const auto& [m, box] : cases) {
    for (int trial = 0; trial < 20; ++trial) {
      const Point x = pt(uniform(rng, box.first[0], box.second[0]), uniform(rng, box.first[1], box.second[1]));
      const Christoffel a = christoffel_at(*m, x);
      const Christoffel fd = finite_difference_christoffel(*m, x);
      for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            CHECK(a(l, i, j) == a(l, j, i));
            CHECK(std::abs(fd(l, i, j) - fd(l, j, i)) <= 1e-8);
            CHECK(std::abs(fd(l, i, j) - a(l, i, j)) <= 1e-6);
          }
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = pt(uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Christoffel a = christoffel_at(graph, x);
    const Christoffel fd = finite_difference_christoffel(graph, x);
    for (size_t k = 0; k < a.values().size(); ++k) CHECK(std::abs(a.values()[k] - fd.values()[k]) <= 1e-6);
  }
}

TEST_CASE("geodesic_integrate examples") {
  SUBCASE("straight line in the plane") {
    const Path p = geodesic_integrate(plane(), {pt(0, 0), vec(1, 2)}, 200);
    CHECK(p.size() == 201);
    CHECK(max_diff(p.end(), pt(1, 2)) < 1e-14);
    CHECK(p.params().front() == 0.0);
    CHECK(p.params().back() == 1.0);
  }
  SUBCASE("equator arc") {
    const Path p = geodesic_integrate(sphere(), {pt(kPi / 2, 0), vec(0, kPi / 2)}, 200);
    CHECK(max_diff(p.end(), pt(kPi / 2, kPi / 2)) < 1e-10);
  }
  SUBCASE("meridian arc") {
    const Path p = geodesic_integrate(sphere(), {pt(kPi / 2, 0), vec(-kPi / 4, 0)}, 200);
    CHECK(max_diff(p.end(), pt(kPi / 4, 0)) < 1e-10);
  }
}

TEST_CASE("geodesic leaving the chart raises a domain-exit error with the last valid sample") {
  try {
    geodesic_integrate(sphere(), {pt(0.5, 0), vec(-1.0, 0)}, 200);
    FAIL("expected a domain exit");
  } catch (const DomainExitError& e) {
    CHECK(sphere().contains(e.last_valid()));
    CHECK(e.last_param() > 0.0);
    CHECK(e.last_param() < 1.0);
  }
}

TEST_CASE("exp_map examples") {
  CHECK(max_diff(exp_map(plane(), {pt(2, 3), vec(-1, 1)}), pt(1, 4)) < 1e-12);
  CHECK(max_diff(exp_map(sphere(), {pt(kPi / 2, 0), vec(0, kPi / 2)}), pt(kPi / 2, kPi / 2)) < 1e-10);
  for (const Manifold* m : {&plane(), &polar(), &sphere()}) {
    const Point x = pt(1.1, 0.4);
    CHECK(exp_map(*m, {x, vec(0, 0)}) == x);
  }
}

TEST_CASE("geodesic speed is constant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = pt(uniform(rng, 0.8, kPi - 0.8), uniform(rng, -3, 3));
    const Eigen::VectorXd v = vec(uniform(rng, -0.7, 0.7), uniform(rng, -0.7, 0.7));
    const Path p = geodesic_integrate(sphere(), {x, v}, 200);
    REQUIRE(p.has_velocities());
    const double s0 = metric_norm(sphere(), {x, v});
    for (size_t i = 0; i < p.size(); ++i)
      CHECK(std::abs(metric_norm(sphere(), {p.samples()[i], p.velocities()[i]}) - s0) < 1e-8);
  }
}

TEST_CASE("exp_map distance on the unit sphere equals the metric norm") {
  std::mt19937_64 rng(6);
  int done = 0;
  while (done < 20) {
    const Point x = pt(uniform(rng, 0.6, kPi - 0.6), uniform(rng, -3, 3));
    const double beta = uniform(rng, 0, 2 * kPi), s = uniform(rng, 0.01, kPi / 2);
    const Eigen::VectorXd v = vec(s * std::cos(beta), s * std::sin(beta) / std::sin(x[0]));
    Point y;
    try {
      y = exp_map(sphere(), {x, v});
    } catch (const DomainError&) {
      continue;  // great circle passes too close to a pole
    }
    CHECK(std::abs(sphere_angle(x, y) - metric_norm(sphere(), {x, v})) < 1e-6);
    ++done;
  }
}

TEST_CASE("geodesic_flow transport matches transport along the sampled geodesic") {
  const TangentVector v{pt(1.0, 0.3), vec(0.4, 0.6)};
  const GeodesicFlow flow = geodesic_flow(sphere(), v, 200);
  const Path p = geodesic_integrate(sphere(), v, 200);
  CHECK(max_diff(flow.end, p.end()) < 1e-14);
  // The sampled geodesic is a polyline; its chords differ from the curve at O(h^2).
  CHECK(max_diff(flow.transport, transport_matrix(sphere(), p, 200)) < 1e-6);
  // The velocity is carried by its own transport.
  CHECK(max_diff(Eigen::VectorXd(flow.transport * v.components), flow.end_velocity) < 1e-9);
}

TEST_CASE("log_map inverts exp_map") {
  const Point x = pt(1.2, 0.1);
  const Eigen::VectorXd v = vec(0.3, -0.5);
  const Point y = exp_map(sphere(), {x, v});
  const TangentVector w = log_map(sphere(), x, y);
  CHECK(max_diff(w.components, v) < 1e-8);
  CHECK(max_diff(log_map(plane(), pt(1, 1), pt(3, -2)).components, vec(2, -3)) < 1e-10);
}

TEST_CASE("parallel_transport examples") {
  SUBCASE("flat Cartesian leaves components unchanged") {
    const Path p = Path::polyline({pt(0, 0), pt(3, 1), pt(-2, 4)});
    const auto t = parallel_transport(plane(), p, TensorValue::vector(vec(1, 2), p.start()));
    CHECK(max_diff(t.components, {1, 2}) < 1e-14);
  }
  SUBCASE("polar quarter circle carries (1,0) to (0,-1)") {
    std::vector<Point> arc;
    for (int k = 0; k <= 400; ++k) arc.push_back(pt(1.0, kPi / 2 * k / 400.0));
    const Path p = Path::polyline(arc);
    const auto t = parallel_transport(polar(), p, TensorValue::vector(vec(1, 0), p.start()));
    CHECK(max_diff(t.components, {0, -1}) < 1e-4);
  }
  SUBCASE("sphere octant loop rotates e_theta by pi/2") {
    const double e = 2e-3, q = kPi / 2;
    const Path p = Path::polyline({pt(q, 0), pt(q, q), pt(e, q), pt(e, 0), pt(q, 0)});
    const auto t = parallel_transport(sphere(), p, TensorValue::vector(vec(1, 0), p.start()));
    const double angle = std::atan2(t.components[1], t.components[0]);
    CHECK(std::abs(std::abs(angle) - q * std::cos(e)) < 1e-6);
  }
}

TEST_CASE("transport rejects a tensor based elsewhere and a leaving path") {
  const Path p = Path::polyline({pt(1, 0), pt(1, 1)});
  CHECK_THROWS_AS(parallel_transport(sphere(), p, TensorValue::vector(vec(1, 0), pt(0.5, 0))), InvalidArgument);
  const Path out = Path::polyline({pt(0.5, 0), pt(-0.5, 0)});
  CHECK_THROWS_AS(transport_matrix(sphere(), out), DomainError);
}

TEST_CASE("transport: metric compatibility on random paths") {
  std::mt19937_64 rng(7);
  for (const Manifold* m : {&sphere(), &polar()}) {
    const bool s = m == &sphere();
    for (int trial = 0; trial < 15; ++trial) {
      std::vector<Point> vs;
      for (int k = 0; k < 4; ++k)
        vs.push_back(s ? pt(uniform(rng, 0.4, kPi - 0.4), uniform(rng, -3, 3))
                       : pt(uniform(rng, 0.5, 2.5), uniform(rng, -3, 3)));
      const Path p = Path::polyline(vs);
      const Eigen::VectorXd u = vec(uniform(rng, -1, 1), uniform(rng, -1, 1));
      const Eigen::VectorXd w = vec(uniform(rng, -1, 1), uniform(rng, -1, 1));
      const Matrix pm = transport_matrix(*m, p, 100);
      const double before = metric_inner(*m, p.start(), u, w);
      const double after = metric_inner(*m, p.end(), pm * u, pm * w);
      CHECK(std::abs(after - before) < 1e-8);
    }
  }
}

TEST_CASE("transport: reversibility for tensors of mixed rank") {
  const Path p = Path::polyline({pt(1.0, 0.0), pt(0.6, 1.2), pt(2.0, 2.0)});
  const TensorValue t(TensorRank{1, 1}, p.start(), {0.3, -1.2, 0.8, 2.0});
  const auto there = parallel_transport(sphere(), p, t);
  const auto back = parallel_transport(sphere(), p.reversed(), there);
  CHECK(back.max_abs_difference(t) < 1e-8);
  CHECK(max_diff(back.base, t.base) == 0.0);
}

TEST_CASE("transport of tensors equals the push by the transport matrix") {
  const Path p = Path::polyline({pt(1.0, 0.0), pt(0.7, 0.9)});
  const Matrix pm = transport_matrix(sphere(), p);
  const TensorValue t(TensorRank{1, 1}, p.start(), {0.3, -1.2, 0.8, 2.0});
  auto expected = push_tensor(t, pm);
  const auto got = parallel_transport(sphere(), p, t);
  CHECK(got.max_abs_difference(expected) < 1e-9);
}

TEST_CASE("transport commutes with the polar-to-Cartesian chart change") {
  const ChartTransition ct = make_transition("polar-to-cartesian");
  const std::vector<Point> vs = {pt(1.0, 0.2), pt(1.8, 0.9), pt(1.2, 2.1)};
  std::vector<Point> cart;
  for (const auto& v : vs) cart.push_back(transition_point(ct, v));
  // The Cartesian image of a polar chart segment is curved: sample densely.
  std::vector<Point> polar_dense, cart_dense;
  for (size_t k = 0; k + 1 < vs.size(); ++k)
    for (int i = 0; i < 2000; ++i) {
      const Point x = vs[k] + (vs[k + 1] - vs[k]) * (i / 2000.0);
      polar_dense.push_back(x);
      cart_dense.push_back(transition_point(ct, x));
    }
  polar_dense.push_back(vs.back());
  cart_dense.push_back(cart.back());
  const Path pp = Path::polyline(polar_dense), pc = Path::polyline(cart_dense);
  const Eigen::VectorXd u = vec(0.4, -0.7);
  const auto a = parallel_transport(polar(), pp, TensorValue::vector(u, pp.start()));
  const Matrix j_end = transition_jacobian(ct, pp.end());
  const Eigen::VectorXd lhs = j_end * Eigen::Map<const Eigen::VectorXd>(a.components.data(), 2);
  const auto b = parallel_transport(plane(), pc,
                                    TensorValue::vector(transition_jacobian(ct, pp.start()) * u, pc.start()));
  CHECK(std::abs(lhs[0] - b.components[0]) < 1e-6);
  CHECK(std::abs(lhs[1] - b.components[1]) < 1e-6);
}

TEST_CASE("chart transition examples") {
  const ChartTransition pc = make_transition("polar-to-cartesian");
  CHECK(max_diff(transition_point(pc, pt(2, 0)), pt(2, 0)) < 1e-15);
  CHECK(max_diff(transition_jacobian(pc, pt(2, 0)), mat(1, 0, 0, 2)) < 1e-15);

  const ChartTransition id = make_transition("identity", {}, "sphere");
  CHECK(transition_point(id, pt(1, 2)) == pt(1, 2));
  CHECK(transition_jacobian(id, pt(1, 2)) == Matrix::Identity(2, 2));

  const ChartTransition rot = make_transition("cartesian-rotation", {kPi / 2});
  CHECK(max_diff(transition_point(rot, pt(1, 0)), pt(0, 1)) < 1e-15);
  CHECK(max_diff(transition_jacobian(rot, pt(1, 0)), mat(0, -1, 1, 0)) < 1e-15);
}

TEST_CASE("transition Jacobians agree with finite differences and inverses round-trip") {
  std::mt19937_64 rng(8);
  for (const char* name : {"polar-to-cartesian", "cartesian-rotation", "sphere-rotation"}) {
    const ChartTransition ct = make_transition(name);
    const bool sph = std::string(name) == "sphere-rotation";
    int done = 0;
    while (done < 15) {
      const Point x = sph ? pt(uniform(rng, 0.3, kPi - 0.3), uniform(rng, -3, 3))
                          : pt(uniform(rng, 0.3, 2.0), uniform(rng, -3, 3));
      if (ct.overlap && !ct.overlap(x)) continue;
      const Matrix j = transition_jacobian(ct, x);
      CHECK(max_diff(j, finite_difference_jacobian(ct, x)) < 1e-6);
      CHECK(std::abs(j.determinant()) > 1e-12);
      const Point back = transition_inverse(ct, transition_point(ct, x));
      CHECK(std::abs(back[0] - x[0]) < 1e-12);
      CHECK(std::abs(std::remainder(back[1] - x[1], 2 * kPi)) < 1e-12);
      ++done;
    }
  }
}

TEST_CASE("transition outside its overlap is a domain error") {
  const ChartTransition pc = make_transition("polar-to-cartesian");
  CHECK_THROWS_AS(transition_point(pc, pt(-1, 0)), DomainError);
}

TEST_CASE("path construction and composition") {
  CHECK_THROWS_AS(Path({pt(0, 0)}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(Path({pt(0, 0), pt(1, 0)}, {0.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(Path({pt(0, 0), pt(1, 0), pt(2, 0)}, {0.0, 0.6, 0.6}), InvalidArgument);

  const Path a = Path::polyline({pt(0, 0), pt(1, 0)});
  const Path b = Path::polyline({pt(1, 0), pt(1, 3)});
  const Path ab = a.then(b);
  CHECK(ab.start() == pt(0, 0));
  CHECK(ab.end() == pt(1, 3));
  CHECK(ab.chart_length() == doctest::Approx(4.0));
  CHECK(ab.params().back() == 1.0);
  CHECK_THROWS_AS(b.then(a), InvalidArgument);

  const Path r = ab.reversed();
  CHECK(r.start() == ab.end());
  CHECK(r.end() == ab.start());
}
