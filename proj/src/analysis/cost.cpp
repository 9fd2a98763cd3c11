#include "retraction_kit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rkit {

CostProfile profile_cost(const Manifold& F, const std::vector<Tangent>& samples,
                         const RetractionConfig& cfg, std::vector<Method> methods,
                         const MethodOptions& opts) {
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods to profile");
  const std::size_t nm = methods.size();
  const std::size_t ns = samples.size();
  CostProfile profile;
  profile.methods = methods;
  profile.samples = static_cast<int>(ns);
  profile.iterations.assign(nm, std::vector<int>(ns, -1));
  profile.solver_ops.assign(nm, std::vector<double>(ns, std::numeric_limits<double>::quiet_NaN()));

  parallel_for(ns, [&](std::size_t s) {
    for (std::size_t m = 0; m < nm; ++m) {
      const auto r = retract(methods[m], F, samples[s], cfg, opts);
      if (r.converged()) {
        profile.iterations[m][s] = r.iterations;
        profile.solver_ops[m][s] = r.solver_ops;
      }
    }
  });

  std::vector<bool> matched(ns, true);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t m = 0; m < nm; ++m)
      if (profile.iterations[m][s] < 0) matched[s] = false;
  profile.matched = static_cast<int>(std::count(matched.begin(), matched.end(), true));

  for (std::size_t m = 0; m < nm; ++m) {
    MethodCost cost;
    cost.method = methods[m];
    cost.samples = static_cast<int>(ns);
    double iter_sum = 0, ops_sum = 0, per_iter_sum = 0;
    int per_iter_count = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const int it = profile.iterations[m][s];
      if (it >= 0) ++cost.converged;
      if (!matched[s]) continue;
      iter_sum += it;
      ops_sum += profile.solver_ops[m][s];
      cost.max_iterations = std::max(cost.max_iterations, it);
      if (it > 0) {
        per_iter_sum += profile.solver_ops[m][s] / it;
        ++per_iter_count;
      }
    }
    cost.failure_rate = ns ? double(ns - cost.converged) / double(ns) : 0.0;
    if (profile.matched > 0) {
      cost.mean_iterations = iter_sum / profile.matched;
      cost.mean_solver_ops = ops_sum / profile.matched;
    }
    if (per_iter_count > 0) cost.mean_ops_per_iteration = per_iter_sum / per_iter_count;
    profile.per_method.push_back(cost);
  }

  const auto nr = std::find(methods.begin(), methods.end(), Method::Newton);
  const auto ro = std::find(methods.begin(), methods.end(), Method::Orthographic);
  if (nr != methods.end() && ro != methods.end()) {
    const auto a = static_cast<std::size_t>(nr - methods.begin());
    const auto b = static_cast<std::size_t>(ro - methods.begin());
    for (std::size_t s = 0; s < ns; ++s)
      if (matched[s] && profile.iterations[a][s] > profile.iterations[b][s] + 1)
        ++profile.pair_violations;
  }
  return profile;
}

}  // namespace rkit
