#include "retraction_kit/analysis.hpp"

#include <algorithm>
#include <random>

namespace rkit {

int RegionScan::method_index(Method m) const {
  const auto it = std::find(methods.begin(), methods.end(), m);
  if (it == methods.end())
    throw Error(ErrorCode::InvalidArgument, std::string("method not in scan: ") + to_string(m));
  return static_cast<int>(it - methods.begin());
}

int RegionScan::exclusive_successes(Method a, Method b) const {
  const int ia = method_index(a);
  const int ib = method_index(b);
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [&](const RegionCell& cell) {
    return cell.status[ia] == Status::Converged && cell.status[ib] != Status::Converged;
  }));
}

RegionScan scan_region(const Manifold& F, const std::vector<Method>& methods,
                       const std::vector<Point>& base_points, int n_directions,
                       const std::vector<double>& magnitudes, const RetractionConfig& cfg,
                       std::uint64_t seed, const MethodOptions& opts) {
  if (n_directions < 1) throw Error(ErrorCode::InvalidArgument, "n_directions must be positive");
  std::vector<std::vector<Vec>> directions(base_points.size());
  for (std::size_t b = 0; b < base_points.size(); ++b)
    for (int j = 0; j < n_directions; ++j) {
      std::mt19937_64 rng(derive_seed(seed, b, static_cast<std::uint64_t>(j)));
      directions[b].push_back(random_tangent(F, base_points[b], 1.0, rng).dir);
    }
  return scan_region(F, methods, base_points, directions, magnitudes, cfg, opts);
}

RegionScan scan_region(const Manifold& F, const std::vector<Method>& methods,
                       const std::vector<Point>& base_points,
                       const std::vector<std::vector<Vec>>& directions,
                       const std::vector<double>& magnitudes, const RetractionConfig& cfg,
                       const MethodOptions& opts) {
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods to scan");
  if (directions.size() != base_points.size())
    throw Error(ErrorCode::InvalidArgument, "one direction list per base point required");
  for (std::size_t i = 0; i < magnitudes.size(); ++i)
    if (magnitudes[i] < 0.0 || (i > 0 && !(magnitudes[i] > magnitudes[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "magnitudes must be nonnegative and ascending");

  RegionScan scan;
  scan.manifold = F.name();
  scan.methods = methods;
  scan.magnitudes = magnitudes;
  for (std::size_t b = 0; b < base_points.size(); ++b)
    for (std::size_t j = 0; j < directions[b].size(); ++j)
      for (std::size_t k = 0; k < magnitudes.size(); ++k) {
        RegionCell cell;
        cell.base = static_cast<int>(b);
        cell.direction = static_cast<int>(j);
        cell.magnitude_index = static_cast<int>(k);
        cell.magnitude = magnitudes[k];
        scan.cells.push_back(std::move(cell));
      }

  parallel_for(scan.cells.size(), [&](std::size_t i) {
    RegionCell& cell = scan.cells[i];
    const Point& base = base_points[cell.base];
    const Tangent v{base, cell.magnitude * directions[cell.base][cell.direction]};
    for (Method m : methods) {
      const auto r = retract(m, F, v, cfg, opts);
      cell.status.push_back(r.status);
      cell.iterations.push_back(r.iterations);
    }
  });

  const std::size_t nm = methods.size();
  scan.converged.assign(nm, std::vector<int>(magnitudes.size(), 0));
  scan.anomalies.assign(nm, 0);
  scan.cells_per_bucket = magnitudes.empty() ? 0 : static_cast<int>(scan.cells.size() / magnitudes.size());
  for (const auto& cell : scan.cells)
    for (std::size_t m = 0; m < nm; ++m)
      if (cell.status[m] == Status::Converged) ++scan.converged[m][cell.magnitude_index];

  // Cells are laid out with magnitude fastest, so each (base, direction)
  // run is contiguous and ascending.
  const std::size_t run = magnitudes.size();
  for (std::size_t start = 0; run > 0 && start < scan.cells.size(); start += run)
    for (std::size_t m = 0; m < nm; ++m) {
      std::size_t last_success = 0;
      bool any = false;
      for (std::size_t k = 0; k < run; ++k)
        if (scan.cells[start + k].status[m] == Status::Converged) {
          last_success = k;
          any = true;
        }
      if (!any) continue;
      for (std::size_t k = 0; k < last_success; ++k)
        if (scan.cells[start + k].status[m] != Status::Converged) ++scan.anomalies[m];
    }
  return scan;
}

}  // namespace rkit
