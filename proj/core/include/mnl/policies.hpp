#pragma once

// Assortment-selection policies.
//
//   ofu-mnl  optimistic utilities from the online estimator (constant cost)
//   ucb-mnl  MLE + UCB bonus c sqrt(ln t) ||x||_{V^{-1}}
//   ts-mnl   MLE + Gaussian posterior sample N(w_hat, a^2 V^{-1})
//   oracle   true parameter, zero regret
//   random   uniformly random K-subset

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mnl/assortment.hpp"
#include "mnl/choice_model.hpp"
#include "mnl/estimator.hpp"
#include "mnl/mle.hpp"
#include "mnl/random.hpp"

namespace mnl {

struct PolicyDecision {
  Assortment assortment;
  /// One optimistic (or sampled) utility per item of the round.
  std::vector<double> optimistic_utilities;
  /// Objective value of the chosen set under optimistic_utilities.
  double optimistic_revenue = 0.0;
  /// Set when the policy's estimator failed this round.
  bool flagged = false;
};

/// Decision rule shared by all policies: top-K under unit rewards, threshold
/// search otherwise.
PolicyDecision decide_from_utilities(std::vector<double> utilities, const RewardVector& rewards,
                                     bool uniform_rewards, double v0, std::size_t k);

PolicyDecision select_uniform(const EstimatorState& state, const FeatureMatrix& features,
                              double v0, std::size_t k);

PolicyDecision select_nonuniform(const EstimatorState& state, const FeatureMatrix& features,
                                 const RewardVector& rewards, double v0, std::size_t k);

PolicyDecision ucb_mnl_select(const BaselineState& state, const FeatureMatrix& features,
                              const RewardVector& rewards, bool uniform_rewards, double v0,
                              std::size_t k, double c_ucb);

PolicyDecision ts_mnl_select(const BaselineState& state, const FeatureMatrix& features,
                             const RewardVector& rewards, bool uniform_rewards, double v0,
                             std::size_t k, double a, Rng& rng);

/// Everything a policy sees in one round.
struct RoundView {
  const FeatureMatrix& features;
  const RewardVector& rewards;
  bool uniform_rewards = true;
  double v0 = 1.0;
  std::size_t k = 1;
};

struct PolicyParams {
  double delta = 0.05;
  double beta_scale = 1.0;
  double c_ucb = 1.0;
  double ts_a = 1.0;
  double lambda0 = 1.0;
};

class Policy {
 public:
  virtual ~Policy() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  virtual PolicyDecision decide(const RoundView& round) = 0;
  virtual void update(const RoundView& round, const Assortment& offered,
                      const ChoiceFeedback& feedback) = 0;

  /// The online estimator, for policies that carry one.
  [[nodiscard]] virtual const EstimatorState* estimator() const { return nullptr; }
};

inline constexpr std::string_view kOfuMnl = "ofu-mnl";
inline constexpr std::string_view kUcbMnl = "ucb-mnl";
inline constexpr std::string_view kTsMnl = "ts-mnl";
inline constexpr std::string_view kOracle = "oracle";
inline constexpr std::string_view kRandom = "random";

std::vector<std::string> known_policies();

/// Throws std::invalid_argument for unknown names. `w_star` is only used by
/// the oracle; `seed` drives policy-internal randomness.
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyParams& params,
                                    std::size_t d, std::size_t k_max, std::uint64_t seed,
                                    const Vector& w_star);

}  // namespace mnl
