#pragma once

#include "retraction_kit/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace rkit {

//! Geometry tag. Circle and Sphere are the unit-radius cases for which exact
//! exponential maps and arc distances are available.
enum class ManifoldKind { Custom, Circle, Sphere, Ellipse, Ellipsoid, Torus, OrthoColumns };

//! A smooth map F: R^n -> R^c whose zero set is the constraint manifold.
//!
//! The callables must be safe to invoke concurrently. When no second
//! derivative is supplied, the quadratic forms v^T (d^2 F_i) v are obtained by
//! central differences of the Jacobian.
template <typename Scalar>
class ConstraintMap {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;
  using SecondDerivativeFn = std::function<Vector(const Vector&, const Vector&)>;

  ConstraintMap(Index ambient_dim, Index codim, EvalFn eval, JacobianFn jacobian,
                SecondDerivativeFn second_derivative = {}, std::string name = "custom",
                ManifoldKind kind = ManifoldKind::Custom, Vector reference_point = {})
      : n_(ambient_dim),
        c_(codim),
        eval_(std::move(eval)),
        jacobian_(std::move(jacobian)),
        second_(std::move(second_derivative)),
        name_(std::move(name)),
        kind_(kind),
        reference_(std::move(reference_point)) {
    if (n_ <= 0 || c_ <= 0 || c_ >= n_)
      throw Error(ErrorCode::InvalidArgument, "constraint map needs 0 < codim < ambient_dim");
    if (!eval_ || !jacobian_)
      throw Error(ErrorCode::InvalidArgument, "constraint map needs eval and jacobian");
  }

  Index ambient_dim() const { return n_; }
  Index codim() const { return c_; }
  Index dim() const { return n_ - c_; }
  const std::string& name() const { return name_; }
  ManifoldKind kind() const { return kind_; }
  bool has_analytic_second_derivative() const { return static_cast<bool>(second_); }

  //! A point known to lie on the manifold, if the map provides one.
  std::optional<Vector> reference_point() const {
    if (reference_.size() == 0) return std::nullopt;
    return reference_;
  }

  Vector eval(const Vector& x) const { return eval_(x); }
  Matrix jacobian(const Vector& x) const { return jacobian_(x); }
  Scalar residual(const Vector& x) const { return eval_(x).norm(); }

  //! Component-wise quadratic forms v^T (d^2 F_i)(x) v.
  Vector second_derivative(const Vector& x, const Vector& v) const {
    if (second_) return second_(x, v);
    return fd_second_derivative(x, v);
  }

  Vector fd_second_derivative(const Vector& x, const Vector& v) const {
    using std::max;
    const Scalar vn = v.norm();
    if (vn == Scalar(0)) return Vector::Zero(c_);
    const Scalar h = Scalar(1e-5) * max(Scalar(1), x.norm());
    const Vector u = v / vn;
    const Vector forward = jacobian_(x + h * u) * u;
    const Vector backward = jacobian_(x - h * u) * u;
    return (forward - backward) / (Scalar(2) * h) * (vn * vn);
  }

  //! Same manifold, constraint multiplied by `factor`.
  ConstraintMap scaled(Scalar factor) const {
    auto eval = eval_;
    auto jac = jacobian_;
    auto sec = second_;
    SecondDerivativeFn scaled_second;
    if (sec) scaled_second = [sec, factor](const Vector& x, const Vector& v) -> Vector {
      return factor * sec(x, v);
    };
    return ConstraintMap(
        n_, c_, [eval, factor](const Vector& x) -> Vector { return factor * eval(x); },
        [jac, factor](const Vector& x) -> Matrix { return factor * jac(x); },
        std::move(scaled_second), name_, kind_, reference_);
  }

 private:
  Index n_;
  Index c_;
  EvalFn eval_;
  JacobianFn jacobian_;
  SecondDerivativeFn second_;
  std::string name_;
  ManifoldKind kind_;
  Vector reference_;
};

//! An ambient point certified to lie on the manifold.
template <typename Scalar>
struct ManifoldPoint {
  VectorX<Scalar> coords;
  Scalar residual{0};

  static ManifoldPoint on(const ConstraintMap<Scalar>& F, VectorX<Scalar> x,
                          Scalar tol = Scalar(Tolerances::manifold)) {
    if (x.size() != F.ambient_dim())
      throw Error(ErrorCode::InvalidArgument, "point has wrong ambient dimension");
    const Scalar r = F.residual(x);
    if (!(r <= tol))
      throw Error(ErrorCode::InvalidArgument,
                  "point is off the manifold (residual " + std::to_string(double(r)) + ")");
    return ManifoldPoint{std::move(x), r};
  }
};

//! An ambient vector tangent to the manifold at `base`.
template <typename Scalar>
struct TangentVector {
  ManifoldPoint<Scalar> base;
  VectorX<Scalar> dir;

  static TangentVector at(const ConstraintMap<Scalar>& F, ManifoldPoint<Scalar> base,
                          VectorX<Scalar> dir, Scalar tol = Scalar(Tolerances::tangent)) {
    using std::max;
    if (dir.size() != F.ambient_dim())
      throw Error(ErrorCode::InvalidArgument, "tangent has wrong ambient dimension");
    const Scalar normal_part = (F.jacobian(base.coords) * dir).norm();
    if (!(normal_part <= tol * max(Scalar(1), dir.norm())))
      throw Error(ErrorCode::InvalidArgument, "vector is not tangent at its base point");
    return TangentVector{std::move(base), std::move(dir)};
  }

  Scalar norm() const { return dir.norm(); }
};

}  // namespace rkit
