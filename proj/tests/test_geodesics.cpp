#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rkit;
using namespace rkit::testing;

TEST_SUITE("geodesics") {

TEST_CASE("analytic exponential map examples") {
  const auto C = circle<double>();
  for (double theta : {0.3, 1.0, 2.5}) {
    const auto p = exp_analytic(C, tangent(C, {1, 0}, {0, theta}));
    CHECK(gap(p.coords, vec({std::cos(theta), std::sin(theta)})) < 1e-15);
  }
  CHECK(exp_analytic(C, Tangent{point(C, {1, 0}), Vec::Zero(2)}).coords == vec({1, 0}));
  const auto S = sphere<double>(3);
  const auto q = exp_analytic(S, tangent(S, {1, 0, 0}, {0, std::numbers::pi / 2, 0}));
  CHECK(gap(q.coords, vec({0, 1, 0})) < 1e-15);
  CHECK_THROWS_AS(exp_analytic(ellipse<double>(2, 1), tangent(ellipse<double>(2, 1), {2, 0}, {0, 1})), Error);
}

TEST_CASE("numeric exponential map matches the closed form") {
  const auto C = circle<double>();
  const auto g = exp_numeric(C, tangent(C, {1, 0}, {0, 1}), 100);
  CHECK(gap(g.endpoint.coords, vec({std::cos(1.0), std::sin(1.0)})) < 1e-8);
  CHECK(g.steps == 100);
  const auto z = exp_numeric(C, Tangent{point(C, {1, 0}), Vec::Zero(2)}, 100);
  CHECK(z.endpoint.coords == vec({1, 0}));
  const auto S = sphere<double>(3);
  for (const auto& v : sample_tangents(S, 10, 1.0, 6)) {
    const auto n = exp_numeric(S, v, 100);
    CHECK(geodesic_distance(S, n.endpoint.coords, exp_analytic(S, v).coords) < 1e-8);
  }
}

TEST_CASE("geodesic distance examples") {
  const auto C = circle<double>();
  CHECK(geodesic_distance(C, vec({1, 0}), vec({0, 1})) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(geodesic_distance(C, vec({0.6, 0.8}), vec({0.6, 0.8})) == 0.0);
  const auto S = sphere<double>(3);
  CHECK(geodesic_distance(S, vec({1, 0, 0}), vec({-1, 0, 0})) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  const auto E = ellipse<double>(2, 1);
  CHECK(geodesic_distance(E, vec({2, 0}), vec({0, 1})) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("geodesics keep constant speed and stay on the manifold") {
  for (const char* spec : {"ellipse:2,1", "torus:2,0.5", "ortho-columns:4,2", "ellipsoid:3,2,1"}) {
    const auto F = make_builtin(spec);
    for (const auto& v : sample_tangents(F, 4, 1.0, 9)) {
      CAPTURE(spec);
      const auto g = exp_numeric(F, v, 200);
      CHECK(g.max_speed_drift <= 1e-6);
      CHECK(g.max_drift <= Tolerances::manifold);
      CHECK(std::abs(g.end_velocity.norm() - v.norm()) <= 1e-6);
    }
  }
}

TEST_CASE("integrating back along the reversed velocity returns to the start") {
  for (const char* spec : {"ellipse:2,1", "torus:2,0.5", "sphere:4"}) {
    const auto F = make_builtin(spec);
    for (const auto& v : sample_tangents(F, 4, 1.0, 10)) {
      CAPTURE(spec);
      const auto forward = exp_numeric(F, v, 200);
      const Tangent back{forward.endpoint, -forward.end_velocity};
      const auto home = exp_numeric(F, back, 200);
      CHECK(gap(home.endpoint.coords, v.base.coords) < 1e-6);
    }
  }
}

TEST_CASE("ellipse geodesic acceleration is normal") {
  const auto E = ellipse<double>(2, 1);
  const auto v = tangent(E, {2, 0}, {0, 0.7});
  const Vec a = geodesic_acceleration(E, v.base.coords, v.dir);
  CHECK(tangent_component(E.jacobian(v.base.coords), a).norm() < 1e-14);
  // Curvature of the ellipse at (a, 0) is a / b^2.
  CHECK(a.norm() == doctest::Approx(0.49 * 2.0).epsilon(1e-12));
}

TEST_CASE("invalid step counts are rejected") {
  const auto C = circle<double>();
  CHECK_THROWS_AS(exp_numeric(C, tangent(C, {1, 0}, {0, 1}), 0), Error);
}

}
