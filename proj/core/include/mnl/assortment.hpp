#pragma once

// Capacitated MNL assortment optimization over |S| <= K, S nonempty.
//
// Ties are always broken toward lower item indices so that runs replay
// exactly.

#include <cstddef>
#include <span>

#include "mnl/choice_model.hpp"

namespace mnl {

struct OptimizedAssortment {
  Assortment assortment;
  double revenue = 0.0;
};

/// The K items with the largest utility (all of them if N <= K). Under unit
/// rewards revenue increases with every added item, so this is optimal.
Assortment top_k(std::span<const double> utilities, std::size_t k);

/// max_{1 <= |S| <= K} sum_{i in S} e^{u_i} r_i / (v0 + sum_{j in S} e^{u_j}).
///
/// For a candidate revenue theta the best set is the top-K items by
/// e^{u_i}(r_i - theta)_+, and theta is achievable iff that set's total is at
/// least v0 * theta. Bisection on theta in [0, 1] brackets the optimum; a
/// final fixed-point pass theta <- R(S(theta)) lands on it exactly.
OptimizedAssortment optimize_revenue(std::span<const double> utilities,
                                     std::span<const double> rewards, double v0, std::size_t k);

/// Maximum number of candidate sets brute_force_best will enumerate.
inline constexpr std::size_t kBruteForceLimit = 1'000'000;

/// Number of nonempty subsets of size <= k out of n, saturating at limit + 1.
std::size_t count_assortments(std::size_t n, std::size_t k,
                              std::size_t limit = kBruteForceLimit);

/// Exhaustive search over nonempty subsets of size <= k of the given
/// utilities. Subsets are visited in lexicographic order and only a strict
/// improvement replaces the incumbent. Throws std::length_error above
/// kBruteForceLimit candidates.
OptimizedAssortment brute_force_utilities(std::span<const double> utilities,
                                          std::span<const double> rewards, double v0,
                                          std::size_t k);

/// Exhaustive maximizer of the true expected revenue under parameter w.
Assortment brute_force_best(const FeatureMatrix& features, const Vector& w,
                            const RewardVector& rewards, double v0, std::size_t k);

}  // namespace mnl
