#pragma once

// Simulation loop and experiment driver.
//
// A cell is one (policy, K, instance) triple simulated for T rounds. Cells
// own their instance, policy state and RNGs, so they run independently and
// the merged output does not depend on scheduling.
//
// Seeds:
//   instance seed = base_seed ^ hash_tag("instance", instance index)
//   cell seed     = base_seed ^ hash_tag("<policy>/k<K>", instance index)
// The cell seed drives the policy's own randomness; feedback draws use
// mix_seed(cell seed ^ hash_tag("feedback", 0)).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mnl/config.hpp"
#include "mnl/estimator.hpp"
#include "mnl/instances.hpp"
#include "mnl/policies.hpp"

namespace mnl {

struct RunRecord {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t t = 0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  std::int64_t round_runtime_ns = 0;
  std::size_t assortment_size = 0;
  /// Only meaningful for policies with an online estimator; 0 otherwise.
  bool in_confidence = false;
};

struct CellResult {
  std::string policy;
  std::size_t k = 0;
  double v0 = 1.0;
  std::size_t instance_index = 0;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  /// Set when the policy threw; records hold the rounds completed before.
  std::optional<std::string> error;
};

/// What an observer sees after each round.
struct RoundTrace {
  std::size_t t = 0;
  const MnlInstance* instance = nullptr;
  const RoundData* round = nullptr;
  const PolicyDecision* decision = nullptr;
  const OptimizedAssortment* optimum = nullptr;
  ChoiceFeedback feedback;
  /// Estimator before and after the update, for estimator-backed policies.
  const EstimatorState* before = nullptr;
  const EstimatorState* after = nullptr;
};

using RoundObserver = std::function<void(const RoundTrace&)>;

std::uint64_t instance_seed(std::uint64_t base_seed, std::size_t instance_index);
std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view policy, std::size_t k,
                        std::size_t instance_index);

/// Builds the instance for (config, K, index) per the config's reward mode.
MnlInstance make_instance(const ExperimentConfig& config, std::size_t k,
                          std::size_t instance_index);

struct CellOptions {
  /// When false every round_runtime_ns is written as 0, making output
  /// byte-reproducible.
  bool record_timing = true;
  RoundObserver observer;
};

/// Simulates one cell. Policy exceptions are caught and stored in `error`.
CellResult run_cell(const ExperimentConfig& config, std::string_view policy, std::size_t k,
                    std::size_t instance_index, const CellOptions& options = {});

/// Cell against an explicit instance (the instance's K is used).
CellResult run_cell_on(const MnlInstance& instance, const ExperimentConfig& config,
                       std::string_view policy, std::size_t instance_index,
                       const CellOptions& options = {});

struct SummaryRow {
  std::string policy;
  std::size_t k = 0;
  double v0 = 1.0;
  RewardMode reward_mode = RewardMode::kUniform;
  double final_regret_mean = 0.0;
  /// Sample standard deviation over instances (0 for one instance).
  double final_regret_std = 0.0;
  double runtime_first_decile_ns = 0.0;
  double runtime_last_decile_ns = 0.0;
};

struct ExperimentResult {
  /// Sorted by (K, policy, seed).
  std::vector<CellResult> cells;
  std::vector<SummaryRow> summary;
};

struct ExperimentOptions {
  std::size_t threads = 1;
  bool record_timing = true;
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const ExperimentOptions& options = {});

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells, RewardMode mode,
                                  std::size_t t_rounds);

inline constexpr std::string_view kRunCsvHeader =
    "policy,seed,t,inst_regret,cum_regret,round_runtime_ns,assortment_size,in_confidence";
inline constexpr std::string_view kSummaryCsvHeader =
    "policy,k,v0,reward_mode,final_regret_mean,final_regret_std,runtime_first_decile_ns,"
    "runtime_last_decile_ns";

/// Rows sorted by (policy, seed, t). A failed cell contributes one row with
/// t = 0 and nan regret after its completed rounds.
std::string format_run_csv(const std::vector<const CellResult*>& cells);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);

/// Writes runs_k<K>.csv per capacity plus summary.csv into `dir`; returns
/// the written paths. Throws std::runtime_error naming the path on I/O
/// failure.
std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                    const std::filesystem::path& dir);

}  // namespace mnl
