#pragma once

#include "retraction_kit/linalg.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rkit {

enum class Status { Converged, NoConvergence, RankDeficient, Singular, ExceededMaxIter, NotLocalMin };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "Converged";
    case Status::NoConvergence: return "NoConvergence";
    case Status::RankDeficient: return "RankDeficient";
    case Status::Singular: return "Singular";
    case Status::ExceededMaxIter: return "ExceededMaxIter";
    case Status::NotLocalMin: return "NotLocalMin";
  }
  return "Unknown";
}

struct RetractionConfig {
  //! Stop once the step norm drops below this threshold.
  double c0 = 1e-10;
  int max_iter = 50;
  //! Consecutive step-norm increases that count as divergence.
  int divergence_window = 5;
  //! Consecutive iterations without a new best |F| that count as divergence.
  int stall_window = 10;

  void validate() const {
    if (!(c0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "c0 must be positive");
    if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
    if (divergence_window < 1 || stall_window < 1)
      throw Error(ErrorCode::InvalidArgument, "divergence windows must be positive");
  }
};

template <typename Scalar>
struct RetractionOutcome {
  std::optional<ManifoldPoint<Scalar>> point;
  //! Final iterate, set whether or not the loop converged.
  VectorX<Scalar> last_iterate;
  int iterations = 0;
  //! One entry per iteration; what is recorded is named by history_label.
  std::vector<Scalar> residual_history;
  std::string history_label = "step_norm";
  double solver_ops = 0;
  Status status = Status::NoConvergence;
  std::string message;

  bool converged() const { return status == Status::Converged; }
};

enum class Method { Newton, Orthographic, Projective, ModifiedNewton, ChordOrthographic, Oblique };

inline constexpr std::array<Method, 6> all_methods = {
    Method::Newton,         Method::Orthographic,      Method::Projective,
    Method::ModifiedNewton, Method::ChordOrthographic, Method::Oblique};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Newton: return "newton";
    case Method::Orthographic: return "orthographic";
    case Method::Projective: return "projective";
    case Method::ModifiedNewton: return "modified-newton";
    case Method::ChordOrthographic: return "chord-orthographic";
    case Method::Oblique: return "oblique";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods)
    if (name == to_string(m)) return m;
  return std::nullopt;
}

namespace detail {

//! Flags runaway iterations: a run of growing steps, or a long run without
//! improving on the best residual seen so far.
class DivergenceMonitor {
 public:
  explicit DivergenceMonitor(const RetractionConfig& cfg) : cfg_(cfg) {}

  template <typename Scalar>
  bool diverging(Scalar step_norm, Scalar residual) {
    const double s = double(step_norm);
    const double r = double(residual);
    growth_ = (has_prev_ && s > prev_step_) ? growth_ + 1 : 0;
    prev_step_ = s;
    has_prev_ = true;
    if (r < best_residual_) {
      best_residual_ = r;
      stall_ = 0;
    } else {
      ++stall_;
    }
    return growth_ >= cfg_.divergence_window || stall_ >= cfg_.stall_window;
  }

 private:
  const RetractionConfig& cfg_;
  double prev_step_ = 0;
  bool has_prev_ = false;
  int growth_ = 0;
  double best_residual_ = std::numeric_limits<double>::infinity();
  int stall_ = 0;
};

template <typename Scalar>
RetractionOutcome<Scalar> at_base(const TangentVector<Scalar>& v) {
  RetractionOutcome<Scalar> out;
  out.point = v.base;
  out.last_iterate = v.base.coords;
  out.status = Status::Converged;
  return out;
}

inline Status status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::RankDeficient: return Status::RankDeficient;
    case ErrorCode::Singular: return Status::Singular;
    default: return Status::NoConvergence;
  }
}

template <typename Scalar>
void finish_on_manifold(const ConstraintMap<Scalar>& F, RetractionOutcome<Scalar>& out) {
  const Scalar r = F.residual(out.last_iterate);
  if (r <= Scalar(Tolerances::manifold)) {
    out.point = ManifoldPoint<Scalar>{out.last_iterate, r};
    out.status = Status::Converged;
  } else {
    out.status = Status::NoConvergence;
    out.message = "step threshold reached off the manifold";
  }
}

//! Runs x <- x + step(x) until |step| < c0. `step` returns the increment and
//! the flops it spent.
template <typename Scalar, typename StepFn>
RetractionOutcome<Scalar> iterate(const ConstraintMap<Scalar>& F, VectorX<Scalar> x,
                                  const RetractionConfig& cfg, StepFn&& step,
                                  double setup_ops = 0) {
  cfg.validate();
  RetractionOutcome<Scalar> out;
  out.solver_ops = setup_ops;
  DivergenceMonitor monitor(cfg);
  for (int k = 0; k < cfg.max_iter; ++k) {
    std::pair<VectorX<Scalar>, double> s;
    try {
      s = step(x);
    } catch (const Error& e) {
      out.last_iterate = x;
      out.status = status_for(e);
      out.message = e.what();
      return out;
    }
    out.solver_ops += s.second;
    x += s.first;
    const Scalar dn = s.first.norm();
    out.residual_history.push_back(dn);
    ++out.iterations;
    out.last_iterate = x;
    if (!std::isfinite(double(dn)) || !x.allFinite()) {
      out.status = Status::NoConvergence;
      out.message = "iterate is not finite";
      return out;
    }
    if (dn < Scalar(cfg.c0)) {
      finish_on_manifold(F, out);
      return out;
    }
    if (monitor.diverging(dn, F.residual(x))) {
      out.status = Status::NoConvergence;
      out.message = "iteration diverged";
      return out;
    }
  }
  out.status = Status::ExceededMaxIter;
  return out;
}

}  // namespace detail

//! Limit of the minimum-norm Newton map started at `start`.
template <typename Scalar>
RetractionOutcome<Scalar> newton_limit(const ConstraintMap<Scalar>& F,
                                       const VectorX<Scalar>& start,
                                       const RetractionConfig& cfg = {}) {
  return detail::iterate(F, start, cfg, [&F](const VectorX<Scalar>& x) {
    auto s = newton_step(F, x);
    return std::pair{std::move(s.delta), s.ops};
  });
}

//! Newton retraction: minimum-norm Newton iterations from x + v with the
//! Jacobian refreshed at every iterate.
template <typename Scalar>
RetractionOutcome<Scalar> newton_retraction(const ConstraintMap<Scalar>& F,
                                            const TangentVector<Scalar>& v,
                                            const RetractionConfig& cfg = {}) {
  if (v.dir.isZero(0)) return detail::at_base(v);
  return newton_limit(F, VectorX<Scalar>(v.base.coords + v.dir), cfg);
}

//! Orthographic retraction: solves F(x + v + J(x)^T y) = 0 by Newton's method
//! in y. The solve matrix is J(current) J(x)^T.
template <typename Scalar>
RetractionOutcome<Scalar> orthographic_retraction(const ConstraintMap<Scalar>& F,
                                                  const TangentVector<Scalar>& v,
                                                  const RetractionConfig& cfg = {}) {
  if (v.dir.isZero(0)) return detail::at_base(v);
  const MatrixX<Scalar> J_base = F.jacobian(v.base.coords);
  return detail::iterate(
      F, VectorX<Scalar>(v.base.coords + v.dir), cfg, [&F, &J_base](const VectorX<Scalar>& x) {
        const MatrixX<Scalar> J = F.jacobian(x);
        const GeneralGramSolver<Scalar> solver(J, J_base);
        VectorX<Scalar> delta = -(J_base.transpose() * solver.solve(F.eval(x)));
        return std::pair{std::move(delta),
                         solver.factor_ops() + solver.solve_ops() +
                             flops::transpose_apply(J.rows(), J.cols())};
      });
}

namespace detail {

//! Newton-type loop with one frozen Jacobian in both the solve and the step.
template <typename Scalar>
RetractionOutcome<Scalar> frozen_newton(const ConstraintMap<Scalar>& F,
                                        const VectorX<Scalar>& start,
                                        const MatrixX<Scalar>& J_frozen,
                                        const RetractionConfig& cfg) {
  std::optional<SymmetricGramSolver<Scalar>> solver;
  try {
    solver.emplace(J_frozen);
  } catch (const Error& e) {
    RetractionOutcome<Scalar> out;
    out.last_iterate = start;
    out.status = status_for(e);
    out.message = e.what();
    return out;
  }
  const double per_step = solver->solve_ops() + flops::transpose_apply(J_frozen.rows(), J_frozen.cols());
  return iterate(
      F, start, cfg,
      [&](const VectorX<Scalar>& x) {
        VectorX<Scalar> delta = -(J_frozen.transpose() * solver->solve(F.eval(x)));
        return std::pair{std::move(delta), per_step};
      },
      solver->factor_ops());
}

}  // namespace detail

//! Newton retraction with the Jacobian evaluated once, at x + v.
template <typename Scalar>
RetractionOutcome<Scalar> modified_newton_retraction(const ConstraintMap<Scalar>& F,
                                                     const TangentVector<Scalar>& v,
                                                     const RetractionConfig& cfg = {}) {
  if (v.dir.isZero(0)) return detail::at_base(v);
  const VectorX<Scalar> start = v.base.coords + v.dir;
  return detail::frozen_newton(F, start, F.jacobian(start), cfg);
}

//! Chord implementation of the orthographic retraction: step direction and
//! solve matrix both frozen at J(x).
template <typename Scalar>
RetractionOutcome<Scalar> chord_orthographic_retraction(const ConstraintMap<Scalar>& F,
                                                        const TangentVector<Scalar>& v,
                                                        const RetractionConfig& cfg = {}) {
  if (v.dir.isZero(0)) return detail::at_base(v);
  return detail::frozen_newton(F, VectorX<Scalar>(v.base.coords + v.dir),
                               F.jacobian(v.base.coords), cfg);
}

//! Unit vector at `angle` radians from the unit normal at x, tilted toward
//! `toward` (any tangent direction when `toward` vanishes). Codimension one only.
template <typename Scalar>
VectorX<Scalar> oblique_direction(const ConstraintMap<Scalar>& F, const ManifoldPoint<Scalar>& x,
                                  const VectorX<Scalar>& toward, Scalar angle) {
  using std::cos;
  using std::sin;
  if (F.codim() != 1)
    throw Error(ErrorCode::InvalidArgument, "oblique projection needs codimension one");
  const MatrixX<Scalar> J = F.jacobian(x.coords);
  const VectorX<Scalar> normal = J.row(0).transpose().normalized();
  VectorX<Scalar> t = tangent_component(J, toward);
  for (Index k = 0; t.norm() <= Scalar(1e-12) && k < F.ambient_dim(); ++k)
    t = tangent_component(J, VectorX<Scalar>(VectorX<Scalar>::Unit(F.ambient_dim(), k)));
  return cos(angle) * normal + sin(angle) * t.normalized();
}

//! Projects x + v onto the manifold along the fixed direction w by 1-D Newton
//! on t -> F(x + v + t w). A first-order control: w is not normal at x.
template <typename Scalar>
RetractionOutcome<Scalar> oblique_control_retraction(const ConstraintMap<Scalar>& F,
                                                     const TangentVector<Scalar>& v,
                                                     const VectorX<Scalar>& w,
                                                     const RetractionConfig& cfg = {}) {
  using std::abs;
  if (F.codim() != 1)
    throw Error(ErrorCode::InvalidArgument, "oblique projection needs codimension one");
  if (w.size() != F.ambient_dim() || !(w.norm() > Scalar(0)))
    throw Error(ErrorCode::InvalidArgument, "oblique direction must be a nonzero ambient vector");
  if (v.dir.isZero(0)) return detail::at_base(v);
  const Index n = F.ambient_dim();
  return detail::iterate(F, VectorX<Scalar>(v.base.coords + v.dir), cfg,
                         [&F, &w, n](const VectorX<Scalar>& x) {
                           const Scalar g = F.eval(x)(0);
                           const Scalar slope = (F.jacobian(x) * w)(0);
                           if (!(abs(slope) > Scalar(Tolerances::rank_rel) * w.norm()))
                             throw Error(ErrorCode::Singular, "projection line is tangent");
                           VectorX<Scalar> delta = (-g / slope) * w;
                           return std::pair{std::move(delta), 3.0 * double(n) + 1.0};
                         });
}

namespace detail {

//! sum_i lambda_i (d^2 F_i)(y), assembled from quadratic forms by polarization.
template <typename Scalar>
MatrixX<Scalar> weighted_hessian(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& y,
                                 const VectorX<Scalar>& lambda) {
  const Index n = F.ambient_dim();
  MatrixX<Scalar> H = MatrixX<Scalar>::Zero(n, n);
  if (lambda.isZero(0)) return H;
  const auto form = [&](const VectorX<Scalar>& u) { return lambda.dot(F.second_derivative(y, u)); };
  for (Index j = 0; j < n; ++j) H(j, j) = form(VectorX<Scalar>::Unit(n, j));
  for (Index j = 0; j < n; ++j)
    for (Index k = j + 1; k < n; ++k) {
      const VectorX<Scalar> u = VectorX<Scalar>::Unit(n, j) + VectorX<Scalar>::Unit(n, k);
      H(j, k) = H(k, j) = (form(u) - H(j, j) - H(k, k)) / Scalar(2);
    }
  return H;
}

}  // namespace detail

//! Closest-point projection of x + v, found by Newton's method on the
//! stationarity system y - z + J(y)^T lambda = 0, F(y) = 0 (z = x + v),
//! started from the Newton-retraction point with lambda = 0.
//!
//! Iterations and history cover the stationarity solve only; solver_ops also
//! includes the warm start.
template <typename Scalar>
RetractionOutcome<Scalar> projective_retraction(const ConstraintMap<Scalar>& F,
                                                const TangentVector<Scalar>& v,
                                                const RetractionConfig& cfg = {}) {
  cfg.validate();
  if (v.dir.isZero(0)) return detail::at_base(v);
  const Index n = F.ambient_dim();
  const Index c = F.codim();
  const VectorX<Scalar> z = v.base.coords + v.dir;

  const auto warm = newton_retraction(F, v, cfg);
  RetractionOutcome<Scalar> out;
  out.history_label = "kkt_step_norm";
  out.solver_ops = warm.solver_ops;
  VectorX<Scalar> y = warm.converged() ? warm.point->coords : z;
  VectorX<Scalar> lambda = VectorX<Scalar>::Zero(c);
  out.last_iterate = y;

  const Index m = n + c;
  const double kkt_ops = flops::lu(m) + flops::triangular_solves(m);
  detail::DivergenceMonitor monitor(cfg);
  MatrixX<Scalar> H;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const MatrixX<Scalar> J = F.jacobian(y);
    H = detail::weighted_hessian(F, y, lambda);
    MatrixX<Scalar> kkt = MatrixX<Scalar>::Zero(m, m);
    kkt.topLeftCorner(n, n) = MatrixX<Scalar>::Identity(n, n) + H;
    kkt.topRightCorner(n, c) = J.transpose();
    kkt.bottomLeftCorner(c, n) = J;
    VectorX<Scalar> rhs(m);
    rhs << -(y - z + J.transpose() * lambda), -F.eval(y);

    Eigen::PartialPivLU<MatrixX<Scalar>> lu(kkt);
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    if (!(pivots.minCoeff() > Scalar(Tolerances::rank_rel) * kkt.norm())) {
      out.status = Status::Singular;
      out.message = "stationarity system is singular";
      return out;
    }
    const VectorX<Scalar> step = lu.solve(rhs);
    out.solver_ops += kkt_ops;
    y += step.head(n);
    lambda += step.tail(c);
    out.last_iterate = y;
    const Scalar sn = step.norm();
    out.residual_history.push_back(sn);
    ++out.iterations;
    if (!std::isfinite(double(sn)) || !y.allFinite()) {
      out.status = Status::NoConvergence;
      out.message = "iterate is not finite";
      return out;
    }
    if (sn < Scalar(cfg.c0)) {
      detail::finish_on_manifold(F, out);
      if (!out.converged()) return out;
      // Second-order check: reduced Hessian of |y - z|^2 / 2 on the tangent space.
      H = detail::weighted_hessian(F, y, lambda);
      const MatrixX<Scalar> Z = normal_complement(F.jacobian(y));
      const MatrixX<Scalar> reduced =
          Z * (MatrixX<Scalar>::Identity(n, n) + H) * Z.transpose();
      Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(reduced, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues()(0) < Scalar(-1e-8)) {
        out.point.reset();
        out.status = Status::NotLocalMin;
        out.message = "stationary point is not a local minimum of the distance";
      }
      return out;
    }
    if (monitor.diverging(sn, F.residual(y))) {
      out.status = Status::NoConvergence;
      out.message = "iteration diverged";
      return out;
    }
  }
  out.status = Status::ExceededMaxIter;
  return out;
}

struct MethodOptions {
  //! Tilt of the oblique control's projection line away from the normal.
  double oblique_angle = std::numbers::pi / 6.0;
};

template <typename Scalar>
RetractionOutcome<Scalar> retract(Method method, const ConstraintMap<Scalar>& F,
                                  const TangentVector<Scalar>& v,
                                  const RetractionConfig& cfg = {},
                                  const MethodOptions& opts = {}) {
  switch (method) {
    case Method::Newton: return newton_retraction(F, v, cfg);
    case Method::Orthographic: return orthographic_retraction(F, v, cfg);
    case Method::Projective: return projective_retraction(F, v, cfg);
    case Method::ModifiedNewton: return modified_newton_retraction(F, v, cfg);
    case Method::ChordOrthographic: return chord_orthographic_retraction(F, v, cfg);
    case Method::Oblique: {
      const auto w = oblique_direction(F, v.base, v.dir, Scalar(opts.oblique_angle));
      return oblique_control_retraction(F, v, w, cfg);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace rkit
