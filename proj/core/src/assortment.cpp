#include "mnl/assortment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mnl {

namespace {

std::vector<std::size_t> ranked_indices(std::size_t n, std::size_t k, auto better) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t take = std::min(k, n);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    better);
  idx.resize(take);
  return idx;
}

}  // namespace

Assortment top_k(std::span<const double> utilities, std::size_t k) {
  if (utilities.empty()) throw std::domain_error("no items to choose from");
  if (k == 0) throw std::domain_error("capacity must be positive");
  return Assortment(ranked_indices(utilities.size(), k, [&](std::size_t a, std::size_t b) {
    if (utilities[a] != utilities[b]) return utilities[a] > utilities[b];
    return a < b;
  }));
}

OptimizedAssortment optimize_revenue(std::span<const double> utilities,
                                     std::span<const double> rewards, double v0, std::size_t k) {
  const std::size_t n = utilities.size();
  if (n == 0) throw std::domain_error("no items to choose from");
  if (k == 0) throw std::domain_error("capacity must be positive");
  if (rewards.size() != n) throw std::invalid_argument("rewards and utilities differ in length");

  // Shift by the largest utility; every comparison below is scale invariant
  // once v0 is shifted the same way.
  const double shift = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = std::exp(utilities[i] - shift);
  const double v0_shifted = v0 * std::exp(-shift);

  std::vector<std::size_t> order;
  order.reserve(n);
  auto best_set = [&](double theta) {
    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (rewards[i] > theta) order.push_back(i);
    }
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        const double va = weight[a] * (rewards[a] - theta);
                        const double vb = weight[b] * (rewards[b] - theta);
                        if (va != vb) return va > vb;
                        if (utilities[a] != utilities[b]) return utilities[a] > utilities[b];
                        return a < b;
                      });
    order.resize(take);
    double surplus = 0.0;
    for (std::size_t i : order) surplus += weight[i] * (rewards[i] - theta);
    return surplus;
  };
  auto revenue_of = [&](const std::vector<std::size_t>& set) {
    double num = 0.0;
    double den = v0_shifted;
    for (std::size_t i : set) {
      num += weight[i] * rewards[i];
      den += weight[i];
    }
    return num / den;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (best_set(mid) >= v0_shifted * mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  best_set(lo);
  if (order.empty()) {
    // Every reward is zero: any set earns nothing, offer the most attractive item.
    const Assortment single = top_k(utilities, 1);
    return {single, 0.0};
  }
  std::vector<std::size_t> chosen = order;
  double theta = revenue_of(chosen);
  for (int pass = 0; pass < 64; ++pass) {
    const double surplus = best_set(theta);
    if (order.empty() || !(surplus > v0_shifted * theta)) break;
    const double next = revenue_of(order);
    if (!(next > theta)) break;
    chosen = order;
    theta = next;
  }
  Assortment result(std::move(chosen));
  std::vector<double> u;
  std::vector<double> r;
  for (std::size_t i : result) {
    u.push_back(utilities[i]);
    r.push_back(rewards[i]);
  }
  return {std::move(result), revenue_from_utilities(u, r, v0)};
}

std::size_t count_assortments(std::size_t n, std::size_t k, std::size_t limit) {
  std::size_t total = 0;
  std::size_t binom = 1;  // C(n, s) built up incrementally
  for (std::size_t s = 1; s <= std::min(n, k); ++s) {
    // C(n, s) = C(n, s-1) * (n - s + 1) / s, exact in integers.
    const long double next = static_cast<long double>(binom) * static_cast<long double>(n - s + 1) /
                             static_cast<long double>(s);
    if (next > static_cast<long double>(limit)) return limit + 1;
    binom = binom * (n - s + 1) / s;
    total += binom;
    if (total > limit) return limit + 1;
  }
  return total;
}

OptimizedAssortment brute_force_utilities(std::span<const double> utilities,
                                          std::span<const double> rewards, double v0,
                                          std::size_t k) {
  const std::size_t n = utilities.size();
  if (n == 0) throw std::domain_error("no items to choose from");
  if (k == 0) throw std::domain_error("capacity must be positive");
  if (rewards.size() != n) throw std::invalid_argument("rewards and utilities differ in length");
  if (count_assortments(n, k) > kBruteForceLimit) {
    throw std::length_error("brute force over " + std::to_string(n) + " items with capacity " +
                            std::to_string(k) + " exceeds the enumeration limit");
  }

  const double shift = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = std::exp(utilities[i] - shift);
  const double v0_shifted = v0 * std::exp(-shift);

  std::vector<std::size_t> current;
  std::vector<std::size_t> best;
  double best_revenue = -1.0;

  auto visit = [&](auto&& self, std::size_t start, double num, double den) -> void {
    for (std::size_t i = start; i < n; ++i) {
      current.push_back(i);
      const double num_i = num + weight[i] * rewards[i];
      const double den_i = den + weight[i];
      const double revenue = num_i / den_i;
      if (revenue > best_revenue) {
        best_revenue = revenue;
        best = current;
      }
      if (current.size() < k) self(self, i + 1, num_i, den_i);
      current.pop_back();
    }
  };
  visit(visit, 0, 0.0, v0_shifted);
  return {Assortment(std::move(best)), best_revenue};
}

Assortment brute_force_best(const FeatureMatrix& features, const Vector& w,
                            const RewardVector& rewards, double v0, std::size_t k) {
  if (static_cast<std::size_t>(w.size()) != features.dim()) {
    throw std::invalid_argument("parameter dimension does not match features");
  }
  if (static_cast<std::size_t>(rewards.size()) != features.items()) {
    throw std::invalid_argument("reward vector length does not match item count");
  }
  const Vector u = features.matrix() * w;
  std::vector<double> utilities(u.data(), u.data() + u.size());
  for (double& x : utilities) x = std::clamp(x, -kUtilityClamp, kUtilityClamp);
  std::vector<double> r(rewards.data(), rewards.data() + rewards.size());
  return brute_force_utilities(utilities, r, v0, k).assortment;
}

}  // namespace mnl
