#include "mnl/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mnl/config.hpp"
#include "mnl/random.hpp"

namespace mnl {

std::string_view to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kUniform: return "uniform";
    case RewardMode::kRandom: return "random";
    case RewardMode::kAdversarial: return "adversarial";
  }
  return "unknown";
}

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "uniform") return RewardMode::kUniform;
  if (text == "random") return RewardMode::kRandom;
  if (text == "adversarial") return RewardMode::kAdversarial;
  throw std::invalid_argument("unknown reward_mode '" + std::string(text) +
                              "' (expected uniform, random or adversarial)");
}

void AdversarialSpec::check() const {
  if (d == 0 || d % 4 != 0) throw std::domain_error("adversarial d must be a positive multiple of 4");
  const double dd = static_cast<double>(d);
  if (!(epsilon > 0.0 && epsilon < 1.0 / (dd * std::sqrt(dd)))) {
    throw std::domain_error("adversarial epsilon must lie in (0, 1/(d sqrt d))");
  }
  if (v_set.size() != d / 4) throw std::domain_error("adversarial V must have d/4 elements");
  std::vector<std::size_t> sorted = v_set;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= d) {
    throw std::domain_error("adversarial V must hold distinct indices below d");
  }
  if (k == 0) throw std::domain_error("adversarial K must be positive");
  if (!(v0 > 0.0)) throw std::domain_error("adversarial v0 must be positive");
}

double default_epsilon(std::size_t d, std::size_t k, double v0, std::size_t t_rounds) {
  const double dd = static_cast<double>(d);
  const double kk = static_cast<double>(k);
  const double eps = std::sqrt(dd * (v0 + kk) * (v0 + kk) /
                               (144.0 * static_cast<double>(t_rounds) * v0 * kk));
  return std::min(eps, 0.99 / (dd * std::sqrt(dd)));
}

std::vector<std::size_t> random_v_set(std::size_t d, std::uint64_t seed) {
  Rng rng(mix_seed(seed ^ hash_tag("v_set", d)));
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < d / 4; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, d - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(d / 4);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::vector<std::size_t>> quarter_subsets(std::size_t d) {
  const std::size_t m = d / 4;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current(m);
  std::iota(current.begin(), current.end(), std::size_t{0});
  if (m == 0) return out;
  while (true) {
    out.push_back(current);
    // Advance to the next combination in lexicographic order.
    std::size_t i = m;
    while (i > 0 && current[i - 1] == d - m + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < m; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

namespace {

std::uint64_t round_seed(std::uint64_t seed, std::size_t t) {
  return mix_seed(seed ^ hash_tag("round", static_cast<std::uint64_t>(t)));
}

void check_sizes(std::size_t d, std::size_t n_items, std::size_t k, std::size_t t_rounds, double v0) {
  if (d == 0) throw std::domain_error("d must be positive");
  if (n_items == 0) throw std::domain_error("n_items must be positive");
  if (k == 0) throw std::domain_error("k must be positive");
  if (t_rounds == 0) throw std::domain_error("t_rounds must be positive");
  if (!(v0 > 0.0)) throw std::domain_error("v0 must be positive");
}

MnlInstance build_lower_bound(const AdversarialSpec& spec, RewardMode mode) {
  spec.check();
  const auto subsets = quarter_subsets(spec.d);
  const auto d = static_cast<Eigen::Index>(spec.d);
  const double coord = 1.0 / std::sqrt(static_cast<double>(spec.d));

  Matrix rows = Matrix::Zero(static_cast<Eigen::Index>(subsets.size() * spec.k), d);
  Eigen::Index row = 0;
  for (const auto& u : subsets) {
    for (std::size_t copy = 0; copy < spec.k; ++copy, ++row) {
      for (std::size_t j : u) rows(row, static_cast<Eigen::Index>(j)) = coord;
    }
  }

  MnlInstance inst;
  inst.d = spec.d;
  inst.n_items = static_cast<std::size_t>(rows.rows());
  inst.k = spec.k;
  inst.t_rounds = spec.t_rounds;
  inst.v0 = spec.v0;
  inst.w_star = Vector::Zero(d);
  for (std::size_t j : spec.v_set) inst.w_star[static_cast<Eigen::Index>(j)] = spec.epsilon;
  inst.reward_mode = mode;
  inst.context = ContextSource::kFixed;
  inst.fixed_features = std::make_shared<const FeatureMatrix>(std::move(rows));
  inst.adversarial = spec;
  inst.fixed_rewards = RewardVector::Ones(static_cast<Eigen::Index>(inst.n_items));
  if (mode == RewardMode::kAdversarial) {
    inst.fixed_rewards.setConstant(1.0 / (spec.v0 + 1.0));
    inst.fixed_rewards[static_cast<Eigen::Index>(rewarded_item(spec))] = 1.0;
  }
  return inst;
}

}  // namespace

RoundData MnlInstance::round(std::size_t t) const {
  if (context == ContextSource::kFixed) {
    return {*fixed_features, fixed_rewards, reward_mode == RewardMode::kUniform};
  }
  Rng rng(round_seed(seed, t));
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix rows(static_cast<Eigen::Index>(n_items), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      rows(i, j) = std::clamp(standard_normal(rng), -bound, bound);
    }
  }
  RewardVector rewards = RewardVector::Ones(rows.rows());
  if (reward_mode == RewardMode::kRandom) {
    for (Eigen::Index i = 0; i < rewards.size(); ++i) rewards[i] = uniform01(rng);
  }
  return {FeatureMatrix(std::move(rows)), std::move(rewards), reward_mode == RewardMode::kUniform};
}

MnlInstance synth_instance(std::size_t d, std::size_t n_items, std::size_t k,
                           std::size_t t_rounds, double v0, RewardMode reward_mode,
                           std::uint64_t seed) {
  check_sizes(d, n_items, k, t_rounds, v0);
  if (reward_mode == RewardMode::kAdversarial) {
    throw std::invalid_argument("synthetic instances support uniform or random rewards only");
  }
  MnlInstance inst;
  inst.d = d;
  inst.n_items = n_items;
  inst.k = k;
  inst.t_rounds = t_rounds;
  inst.v0 = v0;
  inst.reward_mode = reward_mode;
  inst.context = ContextSource::kFresh;
  inst.seed = seed;

  Rng rng(mix_seed(seed ^ hash_tag("w_star", 0)));
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  inst.w_star.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < inst.w_star.size(); ++j) inst.w_star[j] = uniform(rng, -bound, bound);
  return inst;
}

std::size_t rewarded_item(const AdversarialSpec& spec) {
  std::vector<std::size_t> v = spec.v_set;
  std::sort(v.begin(), v.end());
  const auto subsets = quarter_subsets(spec.d);
  const auto it = std::find(subsets.begin(), subsets.end(), v);
  if (it == subsets.end()) throw std::domain_error("V is not a (d/4)-subset of [d]");
  return static_cast<std::size_t>(it - subsets.begin()) * spec.k;
}

MnlInstance lower_bound_instance(const AdversarialSpec& spec) {
  return build_lower_bound(spec, RewardMode::kUniform);
}

MnlInstance nonuniform_lower_bound_instance(const AdversarialSpec& spec) {
  return build_lower_bound(spec, RewardMode::kAdversarial);
}

double kappa_star(const MnlInstance& instance, std::size_t round,
                  const Assortment& optimal_assortment) {
  const RoundData data = instance.round(round);
  const ChoiceDistribution dist =
      choice_probabilities(optimal_assortment, data.features, instance.w_star, instance.v0);
  double total = 0.0;
  for (double p : dist.p_items) total += p * dist.p_outside;
  return total;
}

OptimizedAssortment true_optimum(const MnlInstance& instance, const RoundData& round) {
  const Vector u = round.features.matrix() * instance.w_star;
  std::vector<double> utilities(u.data(), u.data() + u.size());
  if (round.uniform_rewards) {
    Assortment best = top_k(utilities, instance.k);
    std::vector<double> chosen;
    for (std::size_t i : best) chosen.push_back(utilities[i]);
    const std::vector<double> ones(chosen.size(), 1.0);
    const double revenue = revenue_from_utilities(chosen, ones, instance.v0);
    return {std::move(best), revenue};
  }
  const std::span<const double> r(round.rewards.data(),
                                  static_cast<std::size_t>(round.rewards.size()));
  return optimize_revenue(utilities, r, instance.v0, instance.k);
}

std::string serialize_instance(const MnlInstance& inst) {
  std::ostringstream out;
  out << "# mnl instance\n"
      << "d = " << inst.d << '\n'
      << "n_items = " << inst.n_items << '\n'
      << "k = " << inst.k << '\n'
      << "t_rounds = " << inst.t_rounds << '\n'
      << "v0 = " << format_double(inst.v0) << '\n'
      << "reward_mode = " << to_string(inst.reward_mode) << '\n'
      << "context = " << (inst.context == ContextSource::kFresh ? "fresh" : "fixed") << '\n'
      << "seed = " << inst.seed << '\n';
  out << "w_star = ";
  for (Eigen::Index j = 0; j < inst.w_star.size(); ++j) {
    out << (j ? "," : "") << format_double(inst.w_star[j]);
  }
  out << '\n';
  if (inst.adversarial) {
    out << "epsilon = " << format_double(inst.adversarial->epsilon) << '\n' << "v_set = ";
    for (std::size_t j = 0; j < inst.adversarial->v_set.size(); ++j) {
      out << (j ? "," : "") << inst.adversarial->v_set[j];
    }
    out << '\n';
  }
  return out.str();
}

MnlInstance deserialize_instance(std::string_view text) {
  const KeyValues kv = parse_key_values(text);
  auto get = [&](std::string_view key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("instance file lacks key '" + std::string(key) + "'");
    return it->second;
  };
  const auto d = static_cast<std::size_t>(parse_u64("d", get("d")));
  const auto n_items = static_cast<std::size_t>(parse_u64("n_items", get("n_items")));
  const auto k = static_cast<std::size_t>(parse_u64("k", get("k")));
  const auto t_rounds = static_cast<std::size_t>(parse_u64("t_rounds", get("t_rounds")));
  const double v0 = parse_double("v0", get("v0"));
  const RewardMode mode = parse_reward_mode(get("reward_mode"));
  const std::string& context = get("context");
  const std::uint64_t seed = parse_u64("seed", get("seed"));

  MnlInstance inst;
  if (context == "fresh") {
    inst = synth_instance(d, n_items, k, t_rounds, v0, mode, seed);
  } else if (context == "fixed") {
    AdversarialSpec spec;
    spec.d = d;
    spec.epsilon = parse_double("epsilon", get("epsilon"));
    for (const auto& item : split_list(get("v_set"))) {
      spec.v_set.push_back(static_cast<std::size_t>(parse_u64("v_set", item)));
    }
    spec.k = k;
    spec.v0 = v0;
    spec.t_rounds = t_rounds;
    inst = mode == RewardMode::kUniform ? lower_bound_instance(spec)
                                        : nonuniform_lower_bound_instance(spec);
    inst.seed = seed;
  } else {
    throw std::invalid_argument("instance context must be 'fresh' or 'fixed'");
  }

  const auto stored = split_list(get("w_star"));
  if (stored.size() != d) throw std::runtime_error("instance w_star has wrong length");
  for (std::size_t j = 0; j < d; ++j) {
    if (parse_double("w_star", stored[j]) != inst.w_star[static_cast<Eigen::Index>(j)]) {
      throw std::runtime_error("instance w_star does not match the regenerated parameter");
    }
  }
  if (inst.n_items != n_items) throw std::runtime_error("instance n_items does not match its construction");
  return inst;
}

}  // namespace mnl
