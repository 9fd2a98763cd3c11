#pragma once

#include "retraction_kit/geodesics.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rkit {

using Vec = VectorX<double>;
using Manifold = ConstraintMap<double>;
using Point = ManifoldPoint<double>;
using Tangent = TangentVector<double>;
using Outcome = RetractionOutcome<double>;

// ---------------------------------------------------------------------------
// Parallel evaluation

//! Worker count: RETRACTION_KIT_THREADS if set to a positive integer, else
//! all hardware threads.
unsigned worker_count();

//! Calls fn(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

//! Deterministic per-item seed derived from a base seed and two indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// ---------------------------------------------------------------------------
// Sampling

//! `count` points on F, produced by a chain of Newton retractions with random
//! tangent steps of length `stride` from F's reference point.
std::vector<Point> sample_points(const Manifold& F, std::size_t count, std::uint64_t seed,
                                 double stride = 1.0);

//! Random tangent samples with magnitudes uniform in (0, max_magnitude].
std::vector<Tangent> sample_tangents(const Manifold& F, std::size_t count, double max_magnitude,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Approximation order

enum class Reference { Analytic, Numeric };

//! t_max, t_max * ratio, ..., `rungs` entries.
std::vector<double> geometric_ladder(double t_max, double ratio, int rungs);

struct OrderEstimate {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  //! (t, distance) for every rung, including those outside the fit window.
  std::vector<std::pair<double, double>> ladder;
  int rungs_used = 0;

  double leading_constant() const;
};

//! Window of distances admitted into log-log fits.
struct FitWindow {
  double min_distance = 1e-12;
  double max_distance = 1e-2;
};

//! Least-squares fit of log d against log t on the rungs inside the window.
//! Throws InsufficientData with fewer than four usable rungs.
OrderEstimate fit_order(std::vector<std::pair<double, double>> ladder, FitWindow window = {});

//! Geodesic integration steps used for the numeric reference at scale t.
int reference_steps(double t);

//! Order of agreement between `method` and the exponential map along t * v.
OrderEstimate estimate_order(const Manifold& F, const Tangent& v, Method method,
                             const std::vector<double>& t_ladder, Reference reference,
                             const RetractionConfig& cfg = {}, const MethodOptions& opts = {},
                             FitWindow window = {});

//! Order of agreement between two retractions along t * v.
OrderEstimate estimate_gap_order(const Manifold& F, const Tangent& v, Method first,
                                 Method second, const std::vector<double>& t_ladder,
                                 const RetractionConfig& cfg = {}, const MethodOptions& opts = {},
                                 FitWindow window = {});

// ---------------------------------------------------------------------------
// Convergence regions

struct RegionCell {
  int base = 0;
  int direction = 0;
  int magnitude_index = 0;
  double magnitude = 0;
  //! Indexed like RegionScan::methods.
  std::vector<Status> status;
  std::vector<int> iterations;
};

struct RegionScan {
  std::string manifold;
  std::vector<Method> methods;
  std::vector<double> magnitudes;
  std::vector<RegionCell> cells;
  //! converged[method][magnitude_index]
  std::vector<std::vector<int>> converged;
  //! Cells per magnitude bucket.
  int cells_per_bucket = 0;
  //! Per method: cells that failed at a magnitude below one where the same
  //! (base, direction) converged.
  std::vector<int> anomalies;

  int method_index(Method m) const;
  //! Cells where `a` converged and `b` did not.
  int exclusive_successes(Method a, Method b) const;
};

RegionScan scan_region(const Manifold& F, const std::vector<Method>& methods,
                       const std::vector<Point>& base_points, int n_directions,
                       const std::vector<double>& magnitudes, const RetractionConfig& cfg,
                       std::uint64_t seed, const MethodOptions& opts = {});

//! Same scan with explicit unit directions; directions[i] are tangent at base_points[i].
RegionScan scan_region(const Manifold& F, const std::vector<Method>& methods,
                       const std::vector<Point>& base_points,
                       const std::vector<std::vector<Vec>>& directions,
                       const std::vector<double>& magnitudes, const RetractionConfig& cfg,
                       const MethodOptions& opts = {});

// ---------------------------------------------------------------------------
// Cost

struct MethodCost {
  Method method = Method::Newton;
  int samples = 0;
  int converged = 0;
  double failure_rate = 0;
  //! Aggregates below cover the matched samples only.
  double mean_iterations = 0;
  int max_iterations = 0;
  double mean_solver_ops = 0;
  double mean_ops_per_iteration = 0;
};

struct CostProfile {
  std::vector<Method> methods;
  std::vector<MethodCost> per_method;
  int samples = 0;
  //! Samples where every profiled method converged.
  int matched = 0;
  //! Matched samples with iterations(newton) > iterations(orthographic) + 1.
  int pair_violations = 0;
  //! iterations[method][sample] and solver_ops[method][sample]; -1 / NaN on failure.
  std::vector<std::vector<int>> iterations;
  std::vector<std::vector<double>> solver_ops;
};

CostProfile profile_cost(const Manifold& F, const std::vector<Tangent>& samples,
                         const RetractionConfig& cfg = {},
                         std::vector<Method> methods = {Method::Newton, Method::Orthographic},
                         const MethodOptions& opts = {});

// ---------------------------------------------------------------------------
// Linear-rate exponents: see rates.hpp, templated on the scalar type.

// ---------------------------------------------------------------------------
// Pseudoinverse vs augmented-inverse norm bound

enum class AugmentMode {
  //! V spans the orthogonal complement of J's row space.
  Complement,
  //! V is a random point of the Stiefel manifold.
  RandomStiefel,
};

struct LemmaReport {
  int trials = 0;
  int violations = 0;
  //! Largest pseudoinverse_norm - augmented_inverse_norm seen.
  double max_gap = -std::numeric_limits<double>::infinity();
  //! Trials skipped because [J; V] was numerically singular.
  int skipped = 0;
};

//! Checks |J^+| <= |[J; V]^{-1}| + 1e-9 for random standard-normal c x n J.
LemmaReport lemma_ajnf_trial(int n, int c, int n_trials, std::uint64_t seed,
                             AugmentMode mode = AugmentMode::Complement);

//! As lemma_ajnf_trial with (n, c) drawn per trial from 1 <= c < n <= max_n.
LemmaReport lemma_ajnf_sweep(int max_n, int n_trials, std::uint64_t seed,
                             AugmentMode mode = AugmentMode::Complement);

}  // namespace rkit
