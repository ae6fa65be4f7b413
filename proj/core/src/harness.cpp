#include "mnl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "mnl/random.hpp"

namespace mnl {

std::uint64_t instance_seed(std::uint64_t base_seed, std::size_t instance_index) {
  return base_seed ^ hash_tag("instance", instance_index);
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view policy, std::size_t k,
                        std::size_t instance_index) {
  const std::string tag = std::string(policy) + "/k" + std::to_string(k);
  return base_seed ^ hash_tag(tag, instance_index);
}

MnlInstance make_instance(const ExperimentConfig& config, std::size_t k,
                          std::size_t instance_index) {
  const std::uint64_t seed = instance_seed(config.base_seed, instance_index);
  const double v0 = config.v0_for(k);
  if (config.reward_mode == RewardMode::kAdversarial) {
    AdversarialSpec spec;
    spec.d = config.d;
    spec.k = k;
    spec.v0 = v0;
    spec.t_rounds = config.t_rounds;
    spec.epsilon = default_epsilon(config.d, k, v0, config.t_rounds);
    spec.v_set = random_v_set(config.d, seed);
    MnlInstance inst = nonuniform_lower_bound_instance(spec);
    inst.seed = seed;
    return inst;
  }
  return synth_instance(config.d, config.n_items, k, config.t_rounds, v0, config.reward_mode,
                        seed);
}

namespace {

using Clock = std::chrono::steady_clock;

double true_revenue(const MnlInstance& instance, const RoundData& round,
                    const Assortment& assortment) {
  return expected_revenue(assortment, round.features, instance.w_star, round.rewards,
                          instance.v0);
}

}  // namespace

CellResult run_cell_on(const MnlInstance& instance, const ExperimentConfig& config,
                       std::string_view policy_name, std::size_t instance_index,
                       const CellOptions& options) {
  CellResult cell;
  cell.policy = std::string(policy_name);
  cell.k = instance.k;
  cell.v0 = instance.v0;
  cell.instance_index = instance_index;
  cell.seed = instance.seed;
  cell.records.reserve(instance.t_rounds);

  const std::uint64_t seed = cell_seed(config.base_seed, policy_name, instance.k, instance_index);
  Rng feedback_rng(mix_seed(seed ^ hash_tag("feedback", 0)));

  std::unique_ptr<Policy> policy;
  try {
    policy = make_policy(policy_name, config.policy_params(), instance.d, instance.k, seed,
                         instance.w_star);
  } catch (const std::exception& e) {
    cell.error = e.what();
    return cell;
  }

  double cumulative = 0.0;
  std::optional<EstimatorState> before;
  for (std::size_t t = 1; t <= instance.t_rounds; ++t) {
    const RoundData round = instance.round(t);
    const RoundView view{round.features, round.rewards, round.uniform_rewards, instance.v0,
                         instance.k};
    const OptimizedAssortment optimum = true_optimum(instance, round);

    const EstimatorState* estimator = policy->estimator();
    const bool covered = estimator != nullptr && in_confidence_set(*estimator, instance.w_star);
    if (options.observer && estimator != nullptr) before = *estimator;

    try {
      const auto start = Clock::now();
      PolicyDecision decision = policy->decide(view);
      const auto decided = Clock::now();
      decision.assortment.check(instance.n_items, instance.k);

      const double revenue = true_revenue(instance, round, decision.assortment);
      const double regret = optimum.revenue - revenue;
      const ChoiceDistribution dist =
          choice_probabilities(decision.assortment, round.features, instance.w_star, instance.v0);
      const ChoiceFeedback feedback = sample_choice(dist, feedback_rng);

      const auto update_start = Clock::now();
      policy->update(view, decision.assortment, feedback);
      const auto updated = Clock::now();

      cumulative += regret;
      RunRecord rec;
      rec.policy = cell.policy;
      rec.seed = cell.seed;
      rec.t = t;
      rec.inst_regret = regret;
      rec.cum_regret = cumulative;
      rec.round_runtime_ns =
          options.record_timing
              ? std::chrono::duration_cast<std::chrono::nanoseconds>((decided - start) +
                                                                     (updated - update_start))
                    .count()
              : 0;
      rec.assortment_size = decision.assortment.size();
      rec.in_confidence = covered;
      cell.records.push_back(std::move(rec));

      if (options.observer) {
        RoundTrace trace;
        trace.t = t;
        trace.instance = &instance;
        trace.round = &round;
        trace.decision = &decision;
        trace.optimum = &optimum;
        trace.feedback = feedback;
        trace.before = before ? &*before : nullptr;
        trace.after = policy->estimator();
        options.observer(trace);
      }
    } catch (const std::exception& e) {
      cell.error = "round " + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return cell;
}

CellResult run_cell(const ExperimentConfig& config, std::string_view policy, std::size_t k,
                    std::size_t instance_index, const CellOptions& options) {
  return run_cell_on(make_instance(config, k, instance_index), config, policy, instance_index,
                     options);
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells, RewardMode mode,
                                  std::size_t t_rounds) {
  const std::size_t decile = std::max<std::size_t>(1, t_rounds / 10);
  std::map<std::tuple<std::size_t, std::string>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) groups[{c.k, c.policy}].push_back(&c);

  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.k = std::get<0>(key);
    row.policy = std::get<1>(key);
    row.v0 = members.front()->v0;
    row.reward_mode = mode;

    std::vector<double> finals;
    double first_sum = 0.0;
    double last_sum = 0.0;
    for (const CellResult* c : members) {
      if (c->error || c->records.empty()) {
        finals.push_back(std::nan(""));
        continue;
      }
      finals.push_back(c->records.back().cum_regret);
      const std::size_t n = c->records.size();
      const std::size_t span = std::min(decile, n);
      double first = 0.0;
      double last = 0.0;
      for (std::size_t i = 0; i < span; ++i) {
        first += static_cast<double>(c->records[i].round_runtime_ns);
        last += static_cast<double>(c->records[n - span + i].round_runtime_ns);
      }
      first_sum += first / static_cast<double>(span);
      last_sum += last / static_cast<double>(span);
    }
    const double count = static_cast<double>(finals.size());
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= count;
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    row.final_regret_mean = mean;
    row.final_regret_std = finals.size() > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
    row.runtime_first_decile_ns = first_sum / count;
    row.runtime_last_decile_ns = last_sum / count;
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  config.check();
  struct Task {
    std::size_t k;
    std::string policy;
    std::size_t index;
  };
  std::vector<Task> tasks;
  for (std::size_t k : config.k_values) {
    for (const auto& p : config.policies) {
      for (std::size_t i = 0; i < config.num_instances; ++i) tasks.push_back({k, p, i});
    }
  }

  std::vector<CellResult> cells(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    CellOptions cell_options;
    cell_options.record_timing = options.record_timing;
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      cells[i] = run_cell(config, tasks[i].policy, tasks[i].k, tasks[i].index, cell_options);
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.threads, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.k, a.policy, a.seed) < std::tie(b.k, b.policy, b.seed);
  });
  ExperimentResult result;
  result.summary = summarize(cells, config.reward_mode, config.t_rounds);
  result.cells = std::move(cells);
  return result;
}

}  // namespace mnl
