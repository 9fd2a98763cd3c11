#pragma once

#include "retraction_kit/constraint_map.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace rkit {

//! Floating-point operation counts for the dense kernels used by the
//! retractions. Counts are reported in flops (one multiply or one add each).
namespace flops {

//! J J^T, exploiting symmetry: c(c+1)/2 inner products of length n.
inline double symmetric_gram(Index c, Index n) { return double(c) * double(c + 1) * double(n); }
//! A B^T with no symmetry: c^2 inner products of length n.
inline double general_gram(Index c, Index n) { return 2.0 * double(c) * double(c) * double(n); }
inline double cholesky(Index c) { return double(c) * double(c) * double(c) / 3.0; }
inline double lu(Index c) { return 2.0 * double(c) * double(c) * double(c) / 3.0; }
//! One forward plus one backward substitution.
inline double triangular_solves(Index c) { return 2.0 * double(c) * double(c); }
//! y -> B^T y for a c x n matrix B.
inline double transpose_apply(Index c, Index n) { return 2.0 * double(c) * double(n); }

}  // namespace flops

//! Cholesky factorization of the Gram matrix J J^T of a full-row-rank J.
template <typename Scalar>
class SymmetricGramSolver {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  explicit SymmetricGramSolver(const Matrix& J) : c_(J.rows()), n_(J.cols()) {
    Matrix gram(c_, c_);
    gram.template triangularView<Eigen::Lower>() = J * J.transpose();
    llt_.compute(gram);
    const Scalar rank_tol = Scalar(Tolerances::rank_rel) * J.norm();
    if (llt_.info() != Eigen::Success || !(pivot_min() > rank_tol))
      throw Error(ErrorCode::RankDeficient, "J J^T is not numerically positive definite");
  }

  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }

  double factor_ops() const { return flops::symmetric_gram(c_, n_) + flops::cholesky(c_); }
  double solve_ops() const { return flops::triangular_solves(c_); }

 private:
  Scalar pivot_min() const {
    if (c_ == 0) return Scalar(0);
    return llt_.matrixLLT().diagonal().cwiseAbs().minCoeff();
  }

  Index c_;
  Index n_;
  Eigen::LLT<Matrix, Eigen::Lower> llt_;
};

//! LU factorization of the generally nonsymmetric product A B^T.
template <typename Scalar>
class GeneralGramSolver {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  GeneralGramSolver(const Matrix& A, const Matrix& B) : c_(A.rows()), n_(A.cols()) {
    const Matrix product = A * B.transpose();
    lu_.compute(product);
    const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
    const Scalar tol = Scalar(Tolerances::rank_rel) * product.norm();
    if (!(pivots.minCoeff() > tol) || !pivots.allFinite())
      throw Error(ErrorCode::Singular, "J J_0^T is numerically singular");
  }

  Vector solve(const Vector& rhs) const { return lu_.solve(rhs); }

  double factor_ops() const { return flops::general_gram(c_, n_) + flops::lu(c_); }
  double solve_ops() const { return flops::triangular_solves(c_); }

 private:
  Index c_;
  Index n_;
  Eigen::PartialPivLU<Matrix> lu_;
};

template <typename Scalar>
struct NewtonStep {
  VectorX<Scalar> delta;
  double ops{0};
};

//! Minimum-norm Newton step -J^T (J J^T)^{-1} F(x) via a Cholesky solve.
template <typename Scalar>
NewtonStep<Scalar> newton_step(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& x) {
  const MatrixX<Scalar> J = F.jacobian(x);
  const SymmetricGramSolver<Scalar> solver(J);
  const VectorX<Scalar> y = solver.solve(F.eval(x));
  return {-(J.transpose() * y),
          solver.factor_ops() + solver.solve_ops() + flops::transpose_apply(J.rows(), J.cols())};
}

//! (I - J^+ J) w for a full-row-rank J.
template <typename Derived, typename OtherDerived>
VectorX<typename Derived::Scalar> tangent_component(const Eigen::MatrixBase<Derived>& J,
                                                    const Eigen::MatrixBase<OtherDerived>& w) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> Jd = J;
  const SymmetricGramSolver<Scalar> solver(Jd);
  const VectorX<Scalar> Jw = Jd * w;
  return w - Jd.transpose() * solver.solve(Jw);
}

template <typename Scalar>
TangentVector<Scalar> tangent_project(const ConstraintMap<Scalar>& F,
                                      const ManifoldPoint<Scalar>& x,
                                      const VectorX<Scalar>& w) {
  if (w.size() != F.ambient_dim())
    throw Error(ErrorCode::InvalidArgument, "vector has wrong ambient dimension");
  return TangentVector<Scalar>{x, tangent_component(F.jacobian(x.coords), w)};
}

//! Tangent vector of length `magnitude` in a Gaussian-uniform direction drawn
//! from `rng`.
template <typename Scalar, typename Rng>
TangentVector<Scalar> random_tangent(const ConstraintMap<Scalar>& F,
                                     const ManifoldPoint<Scalar>& x, Scalar magnitude,
                                     Rng& rng) {
  if (!(magnitude > Scalar(0)))
    throw Error(ErrorCode::InvalidArgument, "tangent magnitude must be positive");
  const MatrixX<Scalar> J = F.jacobian(x.coords);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    VectorX<Scalar> w(F.ambient_dim());
    for (Index i = 0; i < w.size(); ++i) w(i) = Scalar(normal(rng));
    VectorX<Scalar> t = tangent_component(J, w);
    // A second pass removes the normal residue left by the first.
    t = tangent_component(J, t);
    const Scalar tn = t.norm();
    if (tn > Scalar(1e-6) * w.norm()) return TangentVector<Scalar>{x, t * (magnitude / tn)};
  }
  throw Error(ErrorCode::RankDeficient, "could not draw a nonzero tangent direction");
}

template <typename Scalar>
TangentVector<Scalar> random_tangent(const ConstraintMap<Scalar>& F,
                                     const ManifoldPoint<Scalar>& x, Scalar magnitude,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_tangent(F, x, magnitude, rng);
}

//! Spectral norm of J^+, i.e. 1 / sigma_min(J).
template <typename Derived>
typename Derived::Scalar pseudoinverse_norm(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> Jd = J;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(Jd);
  const auto& sigma = svd.singularValues();
  if (sigma.size() < Jd.rows() || sigma.size() == 0)
    throw Error(ErrorCode::RankDeficient, "Jacobian has fewer columns than rows");
  const Scalar smin = sigma(sigma.size() - 1);
  if (!(smin > Scalar(Tolerances::rank_rel) * sigma(0)))
    throw Error(ErrorCode::RankDeficient, "Jacobian is not of full row rank");
  return Scalar(1) / smin;
}

template <typename Scalar>
Scalar pseudoinverse_norm(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& x) {
  return pseudoinverse_norm(F.jacobian(x));
}

//! Spectral norm of the inverse of the square stack [J; V].
template <typename DerivedJ, typename DerivedV>
typename DerivedJ::Scalar augmented_inverse_norm(const Eigen::MatrixBase<DerivedJ>& J,
                                                 const Eigen::MatrixBase<DerivedV>& V) {
  using Scalar = typename DerivedJ::Scalar;
  if (J.cols() != V.cols() || J.rows() + V.rows() != J.cols())
    throw Error(ErrorCode::InvalidArgument, "[J; V] must be square");
  MatrixX<Scalar> stacked(J.cols(), J.cols());
  stacked << J, V;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(stacked);
  const auto& sigma = svd.singularValues();
  const Scalar smin = sigma(sigma.size() - 1);
  if (!(smin > Scalar(Tolerances::rank_rel) * sigma(0)))
    throw Error(ErrorCode::Singular, "[J; V] is numerically singular");
  return Scalar(1) / smin;
}

template <typename Scalar>
Scalar augmented_inverse_norm(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& x,
                              const MatrixX<Scalar>& V) {
  return augmented_inverse_norm(F.jacobian(x), V);
}

//! Orthonormal rows spanning the orthogonal complement of J's row space,
//! from the trailing columns of the full Q in J^T = Q R.
template <typename Derived>
MatrixX<typename Derived::Scalar> normal_complement(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  const Index c = J.rows();
  const Index n = J.cols();
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(J.transpose());
  const MatrixX<Scalar> Q = qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
  return Q.rightCols(n - c).transpose();
}

}  // namespace rkit
