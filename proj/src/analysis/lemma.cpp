#include "retraction_kit/analysis.hpp"

#include <algorithm>
#include <random>

namespace rkit {

namespace {

constexpr double kSlack = 1e-9;

Eigen::MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

//! Runs one trial; returns false if the matrices were unusable.
bool run_trial(int n, int c, AugmentMode mode, std::mt19937_64& rng, LemmaReport& report) {
  const Eigen::MatrixXd J = gaussian(c, n, rng);
  Eigen::MatrixXd V;
  if (mode == AugmentMode::Complement) {
    V = normal_complement(J);
  } else {
    // Orthonormal rows from the Q factor of a Gaussian n x d matrix.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, n - c, rng));
    V = (qr.householderQ() * Eigen::MatrixXd::Identity(n, n - c)).transpose();
  }
  try {
    const double pinv = pseudoinverse_norm(J);
    const double aug = augmented_inverse_norm(J, V);
    const double gap = pinv - aug;
    report.max_gap = std::max(report.max_gap, gap);
    if (gap > kSlack) ++report.violations;
    ++report.trials;
    return true;
  } catch (const Error&) {
    ++report.skipped;
    return false;
  }
}

}  // namespace

LemmaReport lemma_ajnf_trial(int n, int c, int n_trials, std::uint64_t seed, AugmentMode mode) {
  if (!(c >= 1 && c < n)) throw Error(ErrorCode::InvalidArgument, "need 1 <= c < n");
  if (n_trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  std::mt19937_64 rng(seed);
  LemmaReport report;
  for (int t = 0; t < n_trials; ++t) run_trial(n, c, mode, rng, report);
  return report;
}

LemmaReport lemma_ajnf_sweep(int max_n, int n_trials, std::uint64_t seed, AugmentMode mode) {
  if (max_n < 2) throw Error(ErrorCode::InvalidArgument, "need max_n >= 2");
  if (n_trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  std::mt19937_64 rng(seed);
  LemmaReport report;
  for (int t = 0; t < n_trials; ++t) {
    const int n = std::uniform_int_distribution<int>(2, max_n)(rng);
    const int c = std::uniform_int_distribution<int>(1, n - 1)(rng);
    run_trial(n, c, mode, rng, report);
  }
  return report;
}

}  // namespace rkit
