#pragma once

// Problem instances: the synthetic protocol (uniform parameter, clipped
// Gaussian contexts redrawn every round) and the lower-bound constructions
// with K identical copies of each context x_U, U a (d/4)-subset of [d].
//
// Instances are immutable. Round t's data is a pure function of (seed, t),
// so any number of consumers can replay rounds in any order.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnl/assortment.hpp"
#include "mnl/choice_model.hpp"

namespace mnl {

enum class RewardMode { kUniform, kRandom, kAdversarial };
enum class ContextSource { kFresh, kFixed };

std::string_view to_string(RewardMode mode);
RewardMode parse_reward_mode(std::string_view text);

struct AdversarialSpec {
  std::size_t d = 4;
  double epsilon = 0.1;
  /// Coordinates carrying epsilon in w_V; exactly d/4 distinct entries of [0, d).
  std::vector<std::size_t> v_set;
  std::size_t k = 1;
  double v0 = 1.0;
  std::size_t t_rounds = 1000;

  /// Throws std::domain_error unless d % 4 == 0, 0 < epsilon < 1/(d sqrt d),
  /// |V| = d/4 with distinct in-range indices, K >= 1, v0 > 0.
  void check() const;
};

/// Lower-bound perturbation size sqrt(d (v0+K)^2 / (144 C T v0 K)) with C = 1,
/// capped just below 1/(d sqrt d).
double default_epsilon(std::size_t d, std::size_t k, double v0, std::size_t t_rounds);

/// A seeded (d/4)-subset of [0, d), sorted.
std::vector<std::size_t> random_v_set(std::size_t d, std::uint64_t seed);

/// All (d/4)-subsets of [0, d) in lexicographic order.
std::vector<std::vector<std::size_t>> quarter_subsets(std::size_t d);

struct RoundData {
  FeatureMatrix features;
  RewardVector rewards;
  bool uniform_rewards = true;
};

struct MnlInstance {
  std::size_t d = 0;
  std::size_t n_items = 0;
  std::size_t k = 1;
  std::size_t t_rounds = 1;
  double v0 = 1.0;
  Vector w_star;
  RewardMode reward_mode = RewardMode::kUniform;
  ContextSource context = ContextSource::kFresh;
  std::uint64_t seed = 0;

  // Fixed-context instances only.
  std::shared_ptr<const FeatureMatrix> fixed_features;
  RewardVector fixed_rewards;
  std::optional<AdversarialSpec> adversarial;

  /// Features and rewards for round t (1-based).
  [[nodiscard]] RoundData round(std::size_t t) const;
};

/// w* ~ U[-1/sqrt d, 1/sqrt d]^d; each round's features are N(0, I) clipped
/// coordinatewise to the same range; random rewards are U(0,1) per item and
/// round. reward_mode must be kUniform or kRandom.
MnlInstance synth_instance(std::size_t d, std::size_t n_items, std::size_t k,
                           std::size_t t_rounds, double v0, RewardMode reward_mode,
                           std::uint64_t seed);

/// w_V = epsilon on V; K copies of x_U = 1{U}/sqrt d for every U, so
/// N = K * C(d, d/4). Unit rewards, contexts fixed across rounds.
MnlInstance lower_bound_instance(const AdversarialSpec& spec);

/// Same contexts; the lowest-index copy of x_V earns 1, every other item
/// earns 1/(v0 + 1).
MnlInstance nonuniform_lower_bound_instance(const AdversarialSpec& spec);

/// Index of the rewarded item in the non-uniform construction.
std::size_t rewarded_item(const AdversarialSpec& spec);

/// sum_{i in S*} p(i|S*, w*) p(0|S*, w*) for the given round.
double kappa_star(const MnlInstance& instance, std::size_t round,
                  const Assortment& optimal_assortment);

/// Revenue-maximizing assortment under the true parameter for a round.
/// Unit rewards use top-K, otherwise the exact threshold search.
OptimizedAssortment true_optimum(const MnlInstance& instance, const RoundData& round);

/// Plain-text "key = value" form holding sizes, seed, modes, v0 and w*.
std::string serialize_instance(const MnlInstance& instance);

/// Rebuilds an instance from serialize_instance output. Throws
/// std::runtime_error when the stored w* disagrees with the regenerated one.
MnlInstance deserialize_instance(std::string_view text);

}  // namespace mnl
