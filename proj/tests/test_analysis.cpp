#include "helpers.hpp"

#include "retraction_kit/rates.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>

using namespace rkit;
using namespace rkit::testing;

namespace {

struct ThreadOverride {
  explicit ThreadOverride(const char* value) { ::setenv("RETRACTION_KIT_THREADS", value, 1); }
  ~ThreadOverride() { ::unsetenv("RETRACTION_KIT_THREADS"); }
};

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("exact power law gives its exponent") {
  std::vector<std::pair<double, double>> ladder;
  for (double t : geometric_ladder(0.2, 0.5, 8)) ladder.emplace_back(t, t * t * t / 3);
  const auto est = fit_order(ladder);
  CHECK(est.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(est.leading_constant() == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(est.r_squared == doctest::Approx(1.0));
  CHECK(est.rungs_used == 8);
}

TEST_CASE("fit window drops noisy and saturated rungs") {
  std::vector<std::pair<double, double>> ladder;
  for (double t : geometric_ladder(1.0, 0.1, 10)) ladder.emplace_back(t, 2 * t * t);
  const auto est = fit_order(ladder);
  // Distances 2e-4 .. 2e-12 are inside the window: t = 1e-2 .. 1e-6.
  CHECK(est.rungs_used == 5);
  CHECK(est.slope == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<std::pair<double, double>> short_ladder(ladder.begin(), ladder.begin() + 4);
  CHECK_THROWS_AS(fit_order(short_ladder), Error);
}

TEST_CASE("ladder validation") {
  CHECK(geometric_ladder(0.4, 0.5, 6).back() == doctest::Approx(0.0125));
  CHECK_THROWS_AS(geometric_ladder(0.4, 1.5, 6), Error);
  const auto C = circle<double>();
  const auto v = tangent(C, {1, 0}, {0, 1});
  CHECK_THROWS_AS(estimate_order(C, v, Method::Newton, {0.1, 0.05, 0.025, 0.0125}, Reference::Analytic), Error);
  CHECK_THROWS_AS(estimate_order(C, v, Method::Newton, {0.1, 0.05, 0.02, 0.01, 0.005}, Reference::Analytic), Error);
  const auto E = ellipse<double>(2, 1);
  CHECK_THROWS_AS(estimate_order(E, tangent(E, {2, 0}, {0, 1}), Method::Newton, geometric_ladder(0.2, 0.5, 8),
                                 Reference::Analytic),
                  Error);
}

TEST_CASE("projective retraction on the circle is third order with constant one third") {
  const auto C = circle<double>();
  const auto est = estimate_order(C, tangent(C, {1, 0}, {0, 1}), Method::Projective,
                                  geometric_ladder(0.2, 0.5, 8), Reference::Analytic);
  CHECK(std::abs(est.slope - 3.0) <= 0.1);
  CHECK(std::abs(est.leading_constant() - 1.0 / 3) <= 0.1 / 3);
}

TEST_CASE("every method is at least first order on circle and sphere") {
  for (const char* spec : {"circle", "sphere"}) {
    const auto F = make_builtin(spec);
    const auto v = sample_tangents(F, 1, 1.0, 12).front();
    const Tangent unit{v.base, v.dir / v.norm()};
    for (Method m : all_methods) {
      CAPTURE(spec);
      CAPTURE(to_string(m));
      const auto est = estimate_order(F, unit, m, geometric_ladder(0.2, 0.5, 8), Reference::Analytic);
      CHECK(est.slope >= 1.9);
      if (m == Method::Oblique)
        CHECK((est.slope >= 1.8 && est.slope <= 2.3));
      else
        CHECK(est.slope >= 2.8);
    }
  }
}

TEST_CASE("order estimate is invariant under rescaling the ladder") {
  const auto E = ellipse<double>(2, 1);
  const auto v = sample_tangents(E, 1, 1.0, 3).front();
  const Tangent unit{v.base, v.dir / v.norm()};
  for (Method m : {Method::Newton, Method::Orthographic, Method::Oblique}) {
    const auto a = estimate_order(E, unit, m, geometric_ladder(0.2, 0.5, 8), Reference::Numeric);
    const auto b = estimate_order(E, unit, m, geometric_ladder(0.2 * 0.7, 0.5, 8), Reference::Numeric);
    CAPTURE(to_string(m));
    CHECK(std::abs(a.slope - b.slope) <= 0.05);
  }
}

TEST_CASE("tail contraction of an exact geometric history") {
  std::vector<double> h;
  for (int k = 0; k < 12; ++k) h.push_back(0.1 * std::pow(2.0, -k));
  CHECK(tail_contraction(h, 1e-14) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(tail_contraction(std::vector<double>{1.0, 0.5}, 1e-14), Error);
}

TEST_CASE("rate estimates reject unsupported inputs") {
  const auto E = ellipse<long double>(2, 1);
  const auto x = ManifoldPoint<long double>::on(E, *E.reference_point());
  VectorX<long double> dir(2);
  dir << 0, 1;
  CHECK_THROWS_AS(estimate_rate_exponent(E, x, dir, Method::Newton, {0.4, 0.2, 0.1, 0.05}), Error);
  CHECK_THROWS_AS(estimate_rate_exponent(E, x, dir, Method::ModifiedNewton, {0.4, 0.2, 0.1}), Error);
}

TEST_CASE("parallel_for visits every index once") {
  for (const char* threads : {"1", "3", "8"}) {
    ThreadOverride guard(threads);
    CHECK(worker_count() == static_cast<unsigned>(std::atoi(threads)));
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 4; ++b) seen.insert(derive_seed(123, a, b));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("sample points and tangents are valid") {
  for (const auto& F : all_builtins()) {
    CAPTURE(F.name());
    for (const auto& p : sample_points(F, 8, 5)) CHECK(F.residual(p.coords) <= Tolerances::manifold);
    for (const auto& v : sample_tangents(F, 8, 0.5, 5)) {
      CHECK(v.norm() <= 0.5 + 1e-15);
      CHECK(v.norm() > 0);
      CHECK((F.jacobian(v.base.coords) * v.dir).norm() <= 1e-10);
    }
  }
}

TEST_CASE("region scan example cells") {
  const auto E = ellipse<double>(2, 1);
  const std::vector<Point> bases{point(E, {0, 1})};
  const std::vector<std::vector<Vec>> dirs{{vec({1, 0})}};
  const auto scan = scan_region(E, {Method::Newton, Method::Orthographic}, bases, dirs, {0.0, 2.5}, {});
  REQUIRE(scan.cells.size() == 2);
  const auto& zero = scan.cells[0];
  CHECK(zero.status[0] == Status::Converged);
  CHECK(zero.status[1] == Status::Converged);
  CHECK(zero.iterations[0] == 0);
  CHECK(zero.iterations[1] == 0);
  const auto& far = scan.cells[1];
  CHECK(far.status[0] == Status::Converged);
  CHECK(far.status[1] == Status::NoConvergence);
  CHECK(scan.exclusive_successes(Method::Newton, Method::Orthographic) == 1);
  CHECK(scan.exclusive_successes(Method::Orthographic, Method::Newton) == 0);
  CHECK_THROWS_AS(scan_region(E, {Method::Newton}, bases, dirs, {1.0, 0.5}, {}), Error);
}

TEST_CASE("region scan is deterministic regardless of thread count") {
  const auto E = ellipse<double>(2, 1);
  const auto bases = sample_points(E, 6, 1);
  const std::vector<double> mags{0.5, 1.5, 2.5};
  const std::vector<Method> methods{Method::Newton, Method::Orthographic};
  RegionScan a, b;
  {
    ThreadOverride guard("1");
    a = scan_region(E, methods, bases, 2, mags, {}, 77);
  }
  {
    ThreadOverride guard("4");
    b = scan_region(E, methods, bases, 2, mags, {}, 77);
  }
  CHECK(a.converged == b.converged);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].status == b.cells[i].status);
    CHECK(a.cells[i].iterations == b.cells[i].iterations);
  }
}

TEST_CASE("cost profile counts zero tangents as free") {
  const auto C = circle<double>();
  std::vector<Tangent> samples{Tangent{point(C, {1, 0}), Vec::Zero(2)}, tangent(C, {1, 0}, {0, 0.3})};
  const auto profile = profile_cost(C, samples);
  CHECK(profile.matched == 2);
  CHECK(profile.iterations[0][0] == 0);
  CHECK(profile.iterations[1][0] == 0);
  CHECK(profile.iterations[0][1] > 0);
  CHECK(profile.pair_violations == 0);
}

TEST_CASE("cost profile favours newton on a higher codimension manifold") {
  const auto F = ortho_columns<double>(5, 2);
  const auto profile = profile_cost(F, sample_tangents(F, 30, 0.5, 4));
  REQUIRE(profile.per_method.size() == 2);
  CHECK(profile.per_method[0].mean_ops_per_iteration < profile.per_method[1].mean_ops_per_iteration);
  CHECK(profile.per_method[0].mean_iterations <= profile.per_method[1].mean_iterations);
}

}
