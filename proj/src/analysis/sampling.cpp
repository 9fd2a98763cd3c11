#include "retraction_kit/analysis.hpp"

#include <random>

namespace rkit {

std::vector<Point> sample_points(const Manifold& F, std::size_t count, std::uint64_t seed,
                                 double stride) {
  const auto ref = F.reference_point();
  if (!ref) throw Error(ErrorCode::InvalidArgument, F.name() + " has no reference point");
  std::vector<Point> points;
  points.reserve(count);
  Point current = Point::on(F, *ref);
  std::mt19937_64 rng(seed);
  while (points.size() < count) {
    const auto v = random_tangent(F, current, stride, rng);
    const auto next = newton_retraction(F, v);
    // A failed step just redraws from the same point.
    if (next.converged()) {
      current = *next.point;
      points.push_back(current);
    }
  }
  return points;
}

std::vector<Tangent> sample_tangents(const Manifold& F, std::size_t count, double max_magnitude,
                                     std::uint64_t seed) {
  if (!(max_magnitude > 0.0))
    throw Error(ErrorCode::InvalidArgument, "max_magnitude must be positive");
  const auto bases = sample_points(F, count, derive_seed(seed, 1));
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Tangent> out;
  out.reserve(count);
  for (const auto& base : bases) {
    const double m = max_magnitude * (1.0 - unit(rng));  // in (0, max]
    out.push_back(random_tangent(F, base, m, rng));
  }
  return out;
}

}  // namespace rkit
