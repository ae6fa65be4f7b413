#pragma once

// "key = value" text files. Blank lines and lines starting with '#' are
// ignored; keys are unique.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mnl/instances.hpp"
#include "mnl/policies.hpp"

namespace mnl {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Throws std::invalid_argument naming the offending line on malformed input.
KeyValues parse_key_values(std::string_view text);

std::vector<std::string> split_list(std::string_view text);

double parse_double(std::string_view key, std::string_view text);
std::uint64_t parse_u64(std::string_view key, std::string_view text);

/// Shortest round-trip decimal form.
std::string format_double(double value);

struct ExperimentConfig {
  std::size_t d = 5;
  std::size_t n_items = 100;
  /// One experiment may sweep several capacities.
  std::vector<std::size_t> k_values{10};
  std::size_t t_rounds = 3000;
  /// v0 is either a constant or K / v0_per_k_divisor ("k/5").
  double v0 = 1.0;
  double v0_per_k_divisor = 0.0;
  RewardMode reward_mode = RewardMode::kUniform;
  std::vector<std::string> policies{std::string(kOfuMnl), std::string(kUcbMnl),
                                    std::string(kTsMnl)};
  std::size_t num_instances = 20;
  std::uint64_t base_seed = 1;
  double delta = 0.05;
  double beta_scale = 1.0;
  double c_ucb = 1.0;
  double ts_a = 1.0;
  double lambda0 = 1.0;
  std::string out_path = "results";

  [[nodiscard]] double v0_for(std::size_t k) const;
  [[nodiscard]] PolicyParams policy_params() const;
  /// Throws std::invalid_argument on inconsistent values.
  void check() const;
};

/// Recognized keys: d, n_items, k, t_rounds, v0, reward_mode, policies,
/// num_instances, base_seed, delta, beta_scale, c_ucb, ts_a, lambda0,
/// out_path. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& config);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mnl
