#pragma once

#include "retraction_kit/retractions.hpp"

#include <algorithm>
#include <cmath>

namespace rkit {

template <typename Scalar>
struct GeodesicResult {
  ManifoldPoint<Scalar> endpoint;
  VectorX<Scalar> end_velocity;
  int steps = 0;
  //! Largest |F| along the trajectory, after projection.
  Scalar max_drift{0};
  //! Largest | |gamma'| - |v| | along the trajectory.
  Scalar max_speed_drift{0};
};

inline bool has_analytic_exp(ManifoldKind kind) {
  return kind == ManifoldKind::Circle || kind == ManifoldKind::Sphere;
}

//! Great-circle exponential map on the unit circle or sphere.
template <typename Scalar>
ManifoldPoint<Scalar> exp_analytic(const ConstraintMap<Scalar>& F, const TangentVector<Scalar>& v) {
  using std::cos;
  using std::sin;
  if (!has_analytic_exp(F.kind()))
    throw Error(ErrorCode::InvalidArgument, "no closed-form exponential map for " + F.name());
  const Scalar speed = v.dir.norm();
  if (speed == Scalar(0)) return v.base;
  VectorX<Scalar> y = cos(speed) * v.base.coords + sin(speed) * (v.dir / speed);
  const Scalar r = F.residual(y);
  return ManifoldPoint<Scalar>{std::move(y), r};
}

//! Ambient acceleration of a geodesic through (p, u): the normal vector
//! -J^+ (u^T d^2F u).
template <typename Scalar>
VectorX<Scalar> geodesic_acceleration(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& p,
                                      const VectorX<Scalar>& u) {
  const MatrixX<Scalar> J = F.jacobian(p);
  const SymmetricGramSolver<Scalar> solver(J);
  return -(J.transpose() * solver.solve(F.second_derivative(p, u)));
}

//! Integrates the geodesic equation over t in [0, 1] with classical RK4,
//! re-projecting position (Newton limit) and velocity (tangent projection)
//! after every step.
template <typename Scalar>
GeodesicResult<Scalar> exp_numeric(const ConstraintMap<Scalar>& F, const TangentVector<Scalar>& v,
                                   int n_steps) {
  using std::abs;
  using std::max;
  if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be at least 1");
  GeodesicResult<Scalar> out{v.base, v.dir, 0, v.base.residual, Scalar(0)};
  if (v.dir.isZero(0)) {
    out.steps = n_steps;
    return out;
  }
  const Scalar speed = v.dir.norm();
  const Scalar h = Scalar(1) / Scalar(n_steps);
  const Scalar half = h / Scalar(2);
  RetractionConfig projection;
  projection.c0 = 1e-13;

  VectorX<Scalar> p = v.base.coords;
  VectorX<Scalar> u = v.dir;
  const auto accel = [&F](const VectorX<Scalar>& pos, const VectorX<Scalar>& vel) {
    return geodesic_acceleration(F, pos, vel);
  };
  for (int step = 0; step < n_steps; ++step) {
    const VectorX<Scalar> k1p = u;
    const VectorX<Scalar> k1u = accel(p, u);
    const VectorX<Scalar> k2p = u + half * k1u;
    const VectorX<Scalar> k2u = accel(p + half * k1p, k2p);
    const VectorX<Scalar> k3p = u + half * k2u;
    const VectorX<Scalar> k3u = accel(p + half * k2p, k3p);
    const VectorX<Scalar> k4p = u + h * k3u;
    const VectorX<Scalar> k4u = accel(p + h * k3p, k4p);
    p += (h / Scalar(6)) * (k1p + Scalar(2) * k2p + Scalar(2) * k3p + k4p);
    u += (h / Scalar(6)) * (k1u + Scalar(2) * k2u + Scalar(2) * k3u + k4u);

    const auto projected = newton_limit(F, p, projection);
    if (!projected.converged())
      throw Error(ErrorCode::ProjectionFailed,
                  std::string("position projection failed: ") + to_string(projected.status));
    p = projected.point->coords;
    u = tangent_component(F.jacobian(p), u);
    out.max_drift = max(out.max_drift, projected.point->residual);
    out.max_speed_drift = max(out.max_speed_drift, abs(u.norm() - speed));
  }
  out.endpoint = ManifoldPoint<Scalar>{p, F.residual(p)};
  out.end_velocity = u;
  out.steps = n_steps;
  return out;
}

//! Arc length on the unit circle and sphere, ambient chord length elsewhere
//! (a local surrogate that agrees with arc length to leading order).
template <typename Scalar>
Scalar geodesic_distance(const ConstraintMap<Scalar>& F, const VectorX<Scalar>& p,
                         const VectorX<Scalar>& q) {
  using std::atan2;
  const Scalar chord = (p - q).norm();
  if (!has_analytic_exp(F.kind())) return chord;
  // Equals arccos(p.q) for unit vectors, without its cancellation near 0 and pi.
  return Scalar(2) * atan2(chord, (p + q).norm());
}

}  // namespace rkit
