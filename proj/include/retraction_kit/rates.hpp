#pragma once

#include "retraction_kit/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rkit {

//! Geometric mean of the last `window` ratios history[k+1] / history[k] among
//! consecutive entries above `floor`. Throws InsufficientData if fewer exist.
template <typename Scalar>
Scalar tail_contraction(const std::vector<Scalar>& history, Scalar floor, int window = 4) {
  using std::exp;
  using std::log;
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  std::vector<Scalar> ratios;
  for (std::size_t k = 0; k + 1 < history.size(); ++k) {
    if (!(history[k] > floor) || !(history[k + 1] > floor)) continue;
    ratios.push_back(history[k + 1] / history[k]);
  }
  if (ratios.size() < static_cast<std::size_t>(window))
    throw Error(ErrorCode::InsufficientData, "residual history too short for a tail rate");
  Scalar log_sum(0);
  for (std::size_t k = ratios.size() - window; k < ratios.size(); ++k) log_sum += log(ratios[k]);
  return exp(log_sum / Scalar(window));
}

//! Step norms below this are treated as rounding noise.
template <typename Scalar>
Scalar rate_floor() {
  return Scalar(100) * std::numeric_limits<Scalar>::epsilon();
}

//! Threshold just above rounding noise and a generous iteration cap, so that
//! linear tails run down to the noise floor.
template <typename Scalar>
RetractionConfig rate_config() {
  RetractionConfig cfg;
  cfg.c0 = double(Scalar(10) * std::numeric_limits<Scalar>::epsilon());
  cfg.max_iter = 400;
  return cfg;
}

struct RateEstimate {
  double exponent = 0;
  double r_squared = 0;
  std::vector<double> magnitudes;
  std::vector<double> contraction;
};

//! Slope of log(tail contraction) against log |v| for v = m * direction,
//! m over `magnitudes`, using the frozen-Jacobian retractions.
template <typename Scalar>
RateEstimate estimate_rate_exponent(const ConstraintMap<Scalar>& F, const ManifoldPoint<Scalar>& x,
                                    const VectorX<Scalar>& direction, Method method,
                                    const std::vector<double>& magnitudes,
                                    const RetractionConfig& cfg = rate_config<Scalar>()) {
  if (method != Method::ModifiedNewton && method != Method::ChordOrthographic)
    throw Error(ErrorCode::InvalidArgument, "rate exponents apply to the frozen-Jacobian methods");
  if (magnitudes.size() < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 magnitudes");
  const VectorX<Scalar> unit = tangent_project(F, x, direction).dir;
  const Scalar norm = unit.norm();
  if (!(norm > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "direction has no tangent part");

  RateEstimate est;
  std::vector<std::pair<double, double>> points;
  for (double m : magnitudes) {
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "magnitudes must be positive");
    const TangentVector<Scalar> v{x, unit * (Scalar(m) / norm)};
    const auto r = retract(method, F, v, cfg);
    if (!r.converged())
      throw Error(ErrorCode::InsufficientData, std::string(to_string(method)) +
                                                   " did not converge at |v| = " + std::to_string(m));
    const double mu = double(tail_contraction(r.residual_history, rate_floor<Scalar>()));
    est.magnitudes.push_back(m);
    est.contraction.push_back(mu);
    points.emplace_back(m, mu);
  }
  // Contraction factors lie in (0, 1); admit all of them into the fit.
  const auto fit = fit_order(points, FitWindow{0.0, 1.0});
  est.exponent = fit.slope;
  est.r_squared = fit.r_squared;
  return est;
}

}  // namespace rkit
