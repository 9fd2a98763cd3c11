#include "retraction_kit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rkit {

namespace {

void check_ladder(const std::vector<double>& t) {
  if (t.size() < 5) throw Error(ErrorCode::InvalidArgument, "ladder needs at least 5 rungs");
  if (!(t[0] > 0.0)) throw Error(ErrorCode::InvalidArgument, "ladder must be positive");
  const double ratio = t[1] / t[0];
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorCode::InvalidArgument, "ladder ratio must lie in (0, 1)");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] / t[i - 1] - ratio) > 1e-9 * ratio)
      throw Error(ErrorCode::InvalidArgument, "ladder is not geometric");
}

Tangent scaled(const Tangent& v, double t) { return Tangent{v.base, t * v.dir}; }

}  // namespace

std::vector<double> geometric_ladder(double t_max, double ratio, int rungs) {
  if (!(t_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || rungs < 1)
    throw Error(ErrorCode::InvalidArgument, "bad ladder parameters");
  std::vector<double> t(static_cast<std::size_t>(rungs));
  for (int i = 0; i < rungs; ++i) t[i] = t_max * std::pow(ratio, i);
  return t;
}

double OrderEstimate::leading_constant() const { return std::exp(intercept); }

OrderEstimate fit_order(std::vector<std::pair<double, double>> ladder, FitWindow window) {
  const double floor = 100.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> xs, ys;
  for (const auto& [t, d] : ladder) {
    if (!std::isfinite(d) || !(t > 0.0)) continue;
    if (d < window.min_distance || d > window.max_distance || d <= floor) continue;
    xs.push_back(std::log(t));
    ys.push_back(std::log(d));
  }
  if (xs.size() < 4)
    throw Error(ErrorCode::InsufficientData,
                "only " + std::to_string(xs.size()) + " rungs inside the fit window");
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  OrderEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  est.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  est.rungs_used = static_cast<int>(xs.size());
  std::erase_if(ladder, [](const auto& rung) { return !std::isfinite(rung.second); });
  est.ladder = std::move(ladder);
  return est;
}

int reference_steps(double t) {
  return std::max(100, static_cast<int>(std::ceil(100.0 / t)));
}

OrderEstimate estimate_order(const Manifold& F, const Tangent& v, Method method,
                             const std::vector<double>& t_ladder, Reference reference,
                             const RetractionConfig& cfg, const MethodOptions& opts,
                             FitWindow window) {
  check_ladder(t_ladder);
  if (reference == Reference::Analytic && !has_analytic_exp(F.kind()))
    throw Error(ErrorCode::InvalidArgument, F.name() + " has no analytic reference");
  std::vector<std::pair<double, double>> ladder(t_ladder.size());
  parallel_for(t_ladder.size(), [&](std::size_t i) {
    const double t = t_ladder[i];
    const Tangent tv = scaled(v, t);
    const auto r = retract(method, F, tv, cfg, opts);
    double d = std::numeric_limits<double>::quiet_NaN();
    if (r.converged()) {
      const Vec e = reference == Reference::Analytic ? exp_analytic(F, tv).coords
                                                     : exp_numeric(F, tv, reference_steps(t)).endpoint.coords;
      d = geodesic_distance(F, r.point->coords, e);
    }
    ladder[i] = {t, d};
  });
  return fit_order(std::move(ladder), window);
}

OrderEstimate estimate_gap_order(const Manifold& F, const Tangent& v, Method first,
                                 Method second, const std::vector<double>& t_ladder,
                                 const RetractionConfig& cfg, const MethodOptions& opts,
                                 FitWindow window) {
  check_ladder(t_ladder);
  std::vector<std::pair<double, double>> ladder(t_ladder.size());
  parallel_for(t_ladder.size(), [&](std::size_t i) {
    const Tangent tv = scaled(v, t_ladder[i]);
    const auto a = retract(first, F, tv, cfg, opts);
    const auto b = retract(second, F, tv, cfg, opts);
    double d = std::numeric_limits<double>::quiet_NaN();
    if (a.converged() && b.converged()) d = (a.point->coords - b.point->coords).norm();
    ladder[i] = {t_ladder[i], d};
  });
  return fit_order(std::move(ladder), window);
}

}  // namespace rkit
