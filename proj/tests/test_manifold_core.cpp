#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

using namespace rkit;
using namespace rkit::testing;

TEST_SUITE("manifold-core") {

TEST_CASE("constraint map rejects invalid dimensions") {
  const auto eval = [](const Vec& x) { return x; };
  const auto jac = [](const Vec& x) { return MatrixX<double>::Identity(x.size(), x.size()); };
  CHECK_THROWS_AS(Manifold(2, 0, eval, jac), Error);
  CHECK_THROWS_AS(Manifold(2, 2, eval, jac), Error);
  CHECK_NOTHROW(Manifold(3, 1, eval, jac));
}

TEST_CASE("builtin registry parses specs") {
  CHECK(make_builtin("circle").ambient_dim() == 2);
  CHECK(make_builtin("sphere").ambient_dim() == 3);
  CHECK(make_builtin("sphere:5").ambient_dim() == 5);
  CHECK(make_builtin("ellipse:2,1").kind() == ManifoldKind::Ellipse);
  CHECK(make_builtin("torus:2,0.5").dim() == 2);
  const auto st = make_builtin("ortho-columns:5,2");
  CHECK(st.ambient_dim() == 10);
  CHECK(st.codim() == 3);
  for (const char* bad : {"", "banana", "ellipse:2", "ellipse:2,x", "sphere:1.5", "torus:0.5,2", "circle:1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(make_builtin(bad), Error);
  }
}

TEST_CASE("reference points lie on their manifolds") {
  for (const auto& F : all_builtins()) {
    CAPTURE(F.name());
    REQUIRE(F.reference_point());
    CHECK(F.residual(*F.reference_point()) < 1e-14);
  }
}

TEST_CASE("analytic jacobians and second derivatives match finite differences") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (const auto& F : all_builtins()) {
    CAPTURE(F.name());
    const Index n = F.ambient_dim();
    for (int trial = 0; trial < 50; ++trial) {
      Vec x(n), u(n);
      for (Index i = 0; i < n; ++i) {
        x(i) = (*F.reference_point())(i) + 0.3 * normal(rng);
        u(i) = normal(rng);
      }
      const double h = 1e-6;
      Vec fd = (F.eval(x + h * u) - F.eval(x - h * u)) / (2 * h);
      CHECK(gap(F.jacobian(x) * u, fd) < 1e-6 * (1 + fd.norm()));
      const Vec analytic = F.second_derivative(x, u);
      CHECK(gap(analytic, F.fd_second_derivative(x, u)) < 1e-4 * (1 + analytic.norm()));
    }
  }
}

TEST_CASE("newton step examples") {
  const auto F = circle<double>();
  const auto s1 = newton_step(F, vec({2, 0}));
  CHECK(gap(s1.delta, vec({-0.75, 0})) < 1e-15);
  const auto s2 = newton_step(F, vec({1.25, 0}));
  CHECK(gap(s2.delta, vec({-0.225, 0})) < 1e-15);
  CHECK(newton_step(F, vec({0.6, 0.8})).delta.norm() < 1e-15);
  CHECK(s1.ops > 0);
}

TEST_CASE("newton step is minimum norm and lies in the row space") {
  const auto F = ortho_columns<double>(5, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = *F.reference_point();
    for (Index i = 0; i < x.size(); ++i) x(i) += 0.2 * normal(rng);
    const auto J = F.jacobian(x);
    const Vec d = newton_step(F, x).delta;
    // Linearized equation holds and the step has no tangent component.
    CHECK(gap(J * d, -F.eval(x)) < 1e-12);
    CHECK(tangent_component(J, d).norm() < 1e-12 * (1 + d.norm()));
  }
}

TEST_CASE("newton step rejects rank-deficient jacobians") {
  const auto F = circle<double>();
  CHECK_THROWS_AS(newton_step(F, vec({0, 0})), Error);
  try {
    newton_step(F, vec({0, 0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("tangent projection examples") {
  const auto C = circle<double>();
  CHECK(gap(tangent_project(C, point(C, {1, 0}), vec({3, 4})).dir, vec({0, 4})) < 1e-15);
  CHECK(gap(tangent_project(C, point(C, {1, 0}), vec({0, 2})).dir, vec({0, 2})) < 1e-12);
  const auto S = sphere<double>(3);
  CHECK(gap(tangent_project(S, point(S, {0, 0, 1}), vec({1, 2, 5})).dir, vec({1, 2, 0})) < 1e-15);
}

TEST_CASE("tangent projection is an idempotent orthogonal projector") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (const auto& F : all_builtins()) {
    CAPTURE(F.name());
    const auto pts = sample_points(F, 5, 19);
    for (const auto& x : pts) {
      Vec w(F.ambient_dim());
      for (Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
      const Vec once = tangent_project(F, x, w).dir;
      const Vec twice = tangent_project(F, x, once).dir;
      CHECK(gap(once, twice) < 1e-12);
      CHECK((F.jacobian(x.coords) * once).norm() < 1e-12 * (1 + w.norm()));
      CHECK(std::abs((w - once).dot(once)) < 1e-12 * (1 + w.squaredNorm()));
    }
  }
}

TEST_CASE("random tangent examples") {
  const auto C = circle<double>();
  const auto x = point(C, {1, 0});
  const auto a = random_tangent(C, x, 0.5, std::uint64_t{42});
  const auto b = random_tangent(C, x, 0.5, std::uint64_t{42});
  CHECK(a.dir == b.dir);
  CHECK(std::abs(a.dir(0)) < 1e-15);
  CHECK(std::abs(std::abs(a.dir(1)) - 0.5) < 1e-15);
  CHECK_THROWS_AS(random_tangent(C, x, 0.0, std::uint64_t{1}), Error);
  const auto S = ortho_columns<double>(4, 2);
  const auto t = random_tangent(S, Point::on(S, *S.reference_point()), 0.7, std::uint64_t{5});
  CHECK(std::abs(t.norm() - 0.7) < 1e-14);
  CHECK((S.jacobian(t.base.coords) * t.dir).norm() < 1e-12);
}

TEST_CASE("pseudoinverse and augmented inverse norm examples") {
  const auto C = circle<double>();
  CHECK(pseudoinverse_norm(C, vec({1, 0})) == doctest::Approx(0.5).epsilon(1e-14));
  const auto S = sphere<double>(3);
  CHECK(pseudoinverse_norm(S, vec({0, 0, 1})) == doctest::Approx(0.5).epsilon(1e-14));
  MatrixX<double> V(1, 2);
  V << 0, 1;
  CHECK(augmented_inverse_norm(C, vec({1, 0}), V) == doctest::Approx(1.0).epsilon(1e-14));
  const auto E = ellipse<double>(2.0, 1.0);
  CHECK(augmented_inverse_norm(E, vec({2, 0}), V) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(pseudoinverse_norm(C, vec({0, 0})), Error);
  MatrixX<double> parallel(1, 2);
  parallel << 1, 0;
  CHECK_THROWS_AS(augmented_inverse_norm(C, vec({1, 0}), parallel), Error);
}

TEST_CASE("orthonormal rows and their complement give unit norms") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  MatrixX<double> A(3, 6);
  for (Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
  const MatrixX<double> Q = Eigen::HouseholderQR<MatrixX<double>>(A.transpose()).householderQ() *
                            MatrixX<double>::Identity(6, 3);
  const MatrixX<double> J = Q.transpose();
  const MatrixX<double> V = normal_complement(J);
  CHECK((J * V.transpose()).norm() < 1e-14);
  CHECK(pseudoinverse_norm(J) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(augmented_inverse_norm(J, V) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pseudoinverse norm never exceeds augmented inverse norm") {
  const auto complement = lemma_ajnf_sweep(8, 200, 99, AugmentMode::Complement);
  CHECK(complement.violations == 0);
  CHECK(complement.trials == 200);
  const auto stiefel = lemma_ajnf_sweep(8, 200, 99, AugmentMode::RandomStiefel);
  CHECK(stiefel.violations == 0);
  const auto fixed = lemma_ajnf_trial(2, 1, 50, 4);
  CHECK(fixed.violations == 0);
  CHECK(fixed.max_gap <= 1e-12);
}

TEST_CASE("solver operation counts follow the flop formulas") {
  MatrixX<double> J = MatrixX<double>::Random(3, 10);
  const SymmetricGramSolver<double> sym(J);
  const GeneralGramSolver<double> gen(J, J);
  CHECK(sym.factor_ops() == doctest::Approx(3 * 4 * 10 + 9.0));
  CHECK(gen.factor_ops() == doctest::Approx(2 * 9 * 10 + 18.0));
  CHECK(sym.solve_ops() == doctest::Approx(18.0));
  CHECK(sym.factor_ops() < gen.factor_ops());
}

TEST_CASE("manifold operations are safe to call concurrently") {
  const auto F = ellipsoid<double>(3.0, 2.0, 1.0);
  const auto x = Point::on(F, *F.reference_point());
  std::vector<Vec> results(8);
  {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < results.size(); ++i)
      threads.emplace_back([&, i] {
        Vec acc = Vec::Zero(3);
        for (int k = 0; k < 200; ++k) acc += random_tangent(F, x, 0.3, std::uint64_t{17}).dir;
        results[i] = acc;
      });
  }
  for (const auto& r : results) CHECK(r == results.front());
}

}
