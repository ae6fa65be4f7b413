#pragma once

// Randomized property and oracle checks. Each check draws its own cases from
// a seed and compares the library against an independent route: finite
// differences for derivatives, exhaustive enumeration for assortment
// optimization, KKT conditions for the projection.

#include <cstdint>
#include <string>
#include <vector>

namespace mnl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::string format_check(const CheckResult& result);

/// |1 - total probability| < 1e-12 over random (w, S, X, v0).
CheckResult check_normalization(std::size_t draws, std::uint64_t seed);

/// Analytic gradient vs central differences of the loss (relative error
/// < 1e-5) and ||grad|| <= 2.
CheckResult check_gradient(std::size_t cases, std::uint64_t seed);

/// Analytic Hessian vs central differences of the gradient (relative error
/// < 1e-4) on `cases` draws; eigenvalues within [-1e-10, 1 + 1e-10] on
/// `spectrum_draws` draws.
CheckResult check_hessian(std::size_t cases, std::size_t spectrum_draws, std::uint64_t seed);

/// |phi'''| <= 3 sqrt(2) ||b|| phi'' + 1e-6 along random lines w = a + s b,
/// both derivatives from 5-point stencils of the loss.
CheckResult check_self_concordance(std::size_t lines, std::uint64_t seed);

/// Threshold search vs exhaustive enumeration (N <= 12, K <= 4) within 1e-8,
/// and top-K agreement under unit rewards.
CheckResult check_optimizer_exactness(std::size_t instances, std::uint64_t seed);

/// Feasibility, stationarity and complementary slackness of project_ball.
CheckResult check_projection_kkt(std::size_t pairs, std::uint64_t seed);

/// Lower-bound constructions at d = 4 and d = 8: norms, item counts,
/// x_U.w_V values, gamma, singleton optimum, per-set revenue bound.
CheckResult check_adversarial_constructions();

struct CoverageSettings {
  std::size_t runs = 200;
  std::size_t d = 3;
  std::size_t k = 5;
  std::size_t n_items = 20;
  std::size_t t_rounds = 1000;
  double delta = 0.05;
  std::uint64_t seed = 1;
};

/// Fraction of runs where w* stays in the confidence set at every round is
/// at least 1 - delta.
CheckResult check_coverage(const CoverageSettings& settings);

/// All fast checks at their default sizes.
std::vector<CheckResult> run_validation_suite(std::uint64_t seed);

}  // namespace mnl
