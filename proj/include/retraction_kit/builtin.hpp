#pragma once

#include "retraction_kit/constraint_map.hpp"

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rkit {

namespace detail {
inline std::string format_param(double value) {
  std::ostringstream os;
  os << value;
  return os.str();
}
}  // namespace detail

//! Unit sphere in R^n, F(x) = |x|^2 - 1. n = 2 yields the circle.
template <typename Scalar = double>
ConstraintMap<Scalar> sphere(Index n) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "sphere needs ambient dimension >= 2");
  Vector ref = Vector::Zero(n);
  ref(0) = Scalar(1);
  return ConstraintMap<Scalar>(
      n, 1,
      [](const Vector& x) -> Vector {
        Vector f(1);
        f(0) = x.squaredNorm() - Scalar(1);
        return f;
      },
      [](const Vector& x) -> Matrix { return Scalar(2) * x.transpose(); },
      [](const Vector&, const Vector& v) -> Vector {
        Vector q(1);
        q(0) = Scalar(2) * v.squaredNorm();
        return q;
      },
      n == 2 ? "circle" : "sphere:" + std::to_string(n),
      n == 2 ? ManifoldKind::Circle : ManifoldKind::Sphere, ref);
}

template <typename Scalar = double>
ConstraintMap<Scalar> circle() {
  return sphere<Scalar>(2);
}

//! Axis-aligned ellipsoid sum_i x_i^2 / a_i^2 = 1.
template <typename Scalar = double>
ConstraintMap<Scalar> axis_ellipsoid(const std::vector<Scalar>& semi_axes) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  const Index n = static_cast<Index>(semi_axes.size());
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "ellipsoid needs at least two semi-axes");
  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    if (!(semi_axes[i] > Scalar(0)))
      throw Error(ErrorCode::InvalidArgument, "semi-axes must be positive");
    w(i) = Scalar(1) / (semi_axes[i] * semi_axes[i]);
  }
  Vector ref = Vector::Zero(n);
  ref(0) = semi_axes[0];
  std::string name = n == 2 ? "ellipse:" : "ellipsoid:";
  for (Index i = 0; i < n; ++i)
    name += (i ? "," : "") + detail::format_param(double(semi_axes[i]));
  return ConstraintMap<Scalar>(
      n, 1,
      [w](const Vector& x) -> Vector {
        Vector f(1);
        f(0) = x.cwiseProduct(x).dot(w) - Scalar(1);
        return f;
      },
      [w](const Vector& x) -> Matrix { return Scalar(2) * x.cwiseProduct(w).transpose(); },
      [w](const Vector&, const Vector& v) -> Vector {
        Vector q(1);
        q(0) = Scalar(2) * v.cwiseProduct(v).dot(w);
        return q;
      },
      name, n == 2 ? ManifoldKind::Ellipse : ManifoldKind::Ellipsoid, ref);
}

template <typename Scalar = double>
ConstraintMap<Scalar> ellipse(Scalar a, Scalar b) {
  return axis_ellipsoid<Scalar>({a, b});
}

template <typename Scalar = double>
ConstraintMap<Scalar> ellipsoid(Scalar a, Scalar b, Scalar c) {
  return axis_ellipsoid<Scalar>({a, b, c});
}

//! Torus of tube radius r around a circle of radius R in the x1-x2 plane,
//! as the quartic (|x|^2 + R^2 - r^2)^2 - 4 R^2 (x1^2 + x2^2) = 0.
template <typename Scalar = double>
ConstraintMap<Scalar> torus(Scalar R, Scalar r) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  if (!(R > r && r > Scalar(0)))
    throw Error(ErrorCode::InvalidArgument, "torus needs R > r > 0");
  const Scalar shift = R * R - r * r;
  const Scalar fourR2 = Scalar(4) * R * R;
  Vector ref = Vector::Zero(3);
  ref(0) = R + r;
  return ConstraintMap<Scalar>(
      3, 1,
      [=](const Vector& x) -> Vector {
        const Scalar s = x.squaredNorm() + shift;
        Vector f(1);
        f(0) = s * s - fourR2 * (x(0) * x(0) + x(1) * x(1));
        return f;
      },
      [=](const Vector& x) -> Matrix {
        const Scalar s = x.squaredNorm() + shift;
        Matrix J(1, 3);
        J(0, 0) = (Scalar(4) * s - Scalar(2) * fourR2) * x(0);
        J(0, 1) = (Scalar(4) * s - Scalar(2) * fourR2) * x(1);
        J(0, 2) = Scalar(4) * s * x(2);
        return J;
      },
      [=](const Vector& x, const Vector& v) -> Vector {
        const Scalar s = x.squaredNorm() + shift;
        const Scalar xv = x.dot(v);
        Vector q(1);
        q(0) = Scalar(8) * xv * xv + Scalar(4) * s * v.squaredNorm() -
               Scalar(2) * fourR2 * (v(0) * v(0) + v(1) * v(1));
        return q;
      },
      "torus:" + detail::format_param(double(R)) + "," + detail::format_param(double(r)),
      ManifoldKind::Torus, ref);
}

//! n x p matrices with orthonormal columns, flattened column-major into
//! R^{np}. Only the upper triangle (i <= j) of X^T X - I is constrained, so
//! c = p(p+1)/2 and the Jacobian keeps full row rank.
template <typename Scalar = double>
ConstraintMap<Scalar> ortho_columns(Index n, Index p) {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  if (p < 1 || n < p || (n == p && p == 1))
    throw Error(ErrorCode::InvalidArgument, "ortho_columns needs 1 <= p <= n");
  const Index c = p * (p + 1) / 2;
  if (c >= n * p) throw Error(ErrorCode::InvalidArgument, "ortho_columns is zero-dimensional");
  Vector ref = Vector::Zero(n * p);
  for (Index k = 0; k < p; ++k) ref(k * n + k) = Scalar(1);

  auto eval = [n, p, c](const Vector& x) -> Vector {
    const Eigen::Map<const Matrix> X(x.data(), n, p);
    const Matrix G = X.transpose() * X;
    Vector f(c);
    Index row = 0;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i <= j; ++i) f(row++) = G(i, j) - (i == j ? Scalar(1) : Scalar(0));
    return f;
  };
  auto jacobian = [n, p, c](const Vector& x) -> Matrix {
    const Eigen::Map<const Matrix> X(x.data(), n, p);
    Matrix J = Matrix::Zero(c, n * p);
    Index row = 0;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i <= j; ++i, ++row) {
        // d(x_i . x_j) = x_j . dx_i + x_i . dx_j
        J.row(row).segment(i * n, n) += X.col(j).transpose();
        J.row(row).segment(j * n, n) += X.col(i).transpose();
      }
    return J;
  };
  auto second = [n, p, c](const Vector&, const Vector& v) -> Vector {
    const Eigen::Map<const Matrix> V(v.data(), n, p);
    Vector q(c);
    Index row = 0;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i <= j; ++i) q(row++) = Scalar(2) * V.col(i).dot(V.col(j));
    return q;
  };
  return ConstraintMap<Scalar>(n * p, c, eval, jacobian, second,
                               "ortho-columns:" + std::to_string(n) + "," + std::to_string(p),
                               ManifoldKind::OrthoColumns, ref);
}

//! Resolves `name[:p1,p2,...]`, e.g. "circle", "sphere:3", "ellipse:2,1",
//! "ellipsoid:3,2,1", "torus:2,0.5", "ortho-columns:5,2".
template <typename Scalar = double>
ConstraintMap<Scalar> make_builtin(std::string_view spec);

extern template ConstraintMap<double> make_builtin<double>(std::string_view);
extern template ConstraintMap<long double> make_builtin<long double>(std::string_view);

//! Names accepted by make_builtin.
std::vector<std::string> builtin_names();

}  // namespace rkit
