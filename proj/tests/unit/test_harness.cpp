#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "mnl/config.hpp"
#include "mnl/diagnostics.hpp"
#include "mnl/harness.hpp"

using namespace mnl;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.d = 3;
  c.n_items = 12;
  c.k_values = {3};
  c.t_rounds = 10;
  c.v0 = 1.0;
  c.reward_mode = RewardMode::kRandom;
  c.policies = {"ofu-mnl", "ucb-mnl"};
  c.num_instances = 3;
  c.base_seed = 5;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<const CellResult*> pointers(const std::vector<CellResult>& cells) {
  std::vector<const CellResult*> out;
  for (const auto& c : cells) out.push_back(&c);
  return out;
}

}  // namespace

TEST_CASE("config: every key, lists and the k/5 form") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "d = 4\nn_items = 30\nk = 5, 10,15\nt_rounds = 77\nv0 = k/5\n"
      "reward_mode = random\npolicies = ofu-mnl,ts-mnl\nnum_instances = 2\n"
      "base_seed = 11\ndelta = 0.1\nbeta_scale = 0.5\nc_ucb = 2\nts_a = 0.25\n"
      "lambda0 = 3\nout_path = somewhere\n\n");
  CHECK(c.d == 4);
  CHECK(c.n_items == 30);
  CHECK(c.k_values == std::vector<std::size_t>{5, 10, 15});
  CHECK(c.t_rounds == 77);
  CHECK(c.v0_for(10) == 2.0);
  CHECK(c.v0_for(15) == 3.0);
  CHECK(c.reward_mode == RewardMode::kRandom);
  CHECK(c.policies == std::vector<std::string>{"ofu-mnl", "ts-mnl"});
  CHECK(c.num_instances == 2);
  CHECK(c.base_seed == 11);
  CHECK(c.delta == 0.1);
  CHECK(c.beta_scale == 0.5);
  CHECK(c.c_ucb == 2.0);
  CHECK(c.ts_a == 0.25);
  CHECK(c.lambda0 == 3.0);
  CHECK(c.out_path == "somewhere");

  const ExperimentConfig back = parse_config(format_config(c));
  CHECK(format_config(back) == format_config(c));
}

TEST_CASE("config: rejections") {
  CHECK_THROWS_AS(parse_config("d = 3\ncolour = blue\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("d = 3\nd = 4\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("d 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("d = three\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("k = 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("delta = 1.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("policies = ofu-mnl, greedy\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("reward_mode = sometimes\n"), std::invalid_argument);
}

TEST_CASE("CSV headers") {
  CHECK(kRunCsvHeader ==
        "policy,seed,t,inst_regret,cum_regret,round_runtime_ns,assortment_size,in_confidence");
  CHECK(kSummaryCsvHeader ==
        "policy,k,v0,reward_mode,final_regret_mean,final_regret_std,runtime_first_decile_ns,"
        "runtime_last_decile_ns");
}

TEST_CASE("experiment output shape and summary statistics") {
  const ExperimentConfig c = small_config();
  const ExperimentResult res = run_experiment(c, {1, false});
  REQUIRE(res.cells.size() == 6);
  const auto csv = lines(format_run_csv(pointers(res.cells)));
  CHECK(csv.size() == 1 + 60);
  CHECK(csv.front() == kRunCsvHeader);

  REQUIRE(res.summary.size() == 2);
  for (const SummaryRow& row : res.summary) {
    std::vector<double> finals;
    for (const auto& cell : res.cells) {
      if (cell.policy == row.policy) finals.push_back(cell.records.back().cum_regret);
    }
    REQUIRE(finals.size() == 3);
    const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / 3.0;
    double ss = 0.0;
    for (double f : finals) ss += (f - mean) * (f - mean);
    CHECK(row.final_regret_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(row.final_regret_std == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12));
    CHECK(row.k == 3);
    CHECK(row.reward_mode == RewardMode::kRandom);
  }
  const auto summary = lines(format_summary_csv(res.summary));
  CHECK(summary.size() == 3);
  CHECK(summary.front() == kSummaryCsvHeader);
}

TEST_CASE("per-round invariants") {
  ExperimentConfig c = small_config();
  c.t_rounds = 60;
  c.policies = {"ofu-mnl", "ucb-mnl", "ts-mnl", "oracle", "random"};
  const ExperimentResult res = run_experiment(c, {1, true});
  for (const auto& cell : res.cells) {
    REQUIRE_FALSE(cell.error);
    REQUIRE(cell.records.size() == 60);
    double prev = 0.0;
    for (std::size_t i = 0; i < cell.records.size(); ++i) {
      const RunRecord& r = cell.records[i];
      CHECK(r.t == i + 1);
      CHECK(r.policy == cell.policy);
      CHECK(r.seed == cell.seed);
      CHECK(r.inst_regret >= -1e-12);
      CHECK(r.cum_regret >= prev);
      CHECK(r.cum_regret == doctest::Approx(prev + r.inst_regret).epsilon(1e-12));
      CHECK(r.assortment_size >= 1);
      CHECK(r.assortment_size <= 3);
      CHECK(r.round_runtime_ns >= 0);
      if (cell.policy != "ofu-mnl") CHECK_FALSE(r.in_confidence);
      prev = r.cum_regret;
    }
  }
}

TEST_CASE("oracle has no regret, random policy keeps paying") {
  ExperimentConfig c = small_config();
  c.t_rounds = 400;
  c.num_instances = 1;
  for (RewardMode mode : {RewardMode::kUniform, RewardMode::kRandom}) {
    c.reward_mode = mode;
    const CellResult oracle = run_cell(c, "oracle", 3, 0);
    CHECK(oracle.records.back().cum_regret <= 1e-9 * 400);
    const CellResult rnd = run_cell(c, "random", 3, 0);
    const double half = rnd.records[199].cum_regret;
    const double full = rnd.records.back().cum_regret;
    CHECK(full > 1e-3 * 400);
    CHECK(full - half > 0.5 * half);
  }
}

TEST_CASE("seeding: common instances, distinct cells") {
  const ExperimentConfig c = small_config();
  CHECK(instance_seed(5, 0) != instance_seed(5, 1));
  CHECK(cell_seed(5, "ofu-mnl", 3, 0) != cell_seed(5, "ucb-mnl", 3, 0));
  CHECK(cell_seed(5, "ofu-mnl", 3, 0) != cell_seed(5, "ofu-mnl", 4, 0));
  const MnlInstance a = make_instance(c, 3, 1);
  const MnlInstance b = make_instance(c, 5, 1);
  CHECK(a.w_star == b.w_star);
  CHECK(a.round(9).features.matrix() == b.round(9).features.matrix());
}

TEST_CASE("output is independent of the thread count") {
  ExperimentConfig c = small_config();
  c.t_rounds = 30;
  c.k_values = {2, 3};
  c.policies = {"ofu-mnl", "ucb-mnl", "ts-mnl"};
  const ExperimentResult one = run_experiment(c, {1, false});
  const ExperimentResult four = run_experiment(c, {4, false});
  CHECK(format_run_csv(pointers(one.cells)) == format_run_csv(pointers(four.cells)));
  CHECK(format_summary_csv(one.summary) == format_summary_csv(four.summary));

  const auto dir = std::filesystem::temp_directory_path() / "mnl_harness_test";
  std::filesystem::remove_all(dir);
  const auto paths = write_experiment(one, dir);
  CHECK(paths.size() == 3);
  CHECK(read_text_file(dir / "summary.csv") == format_summary_csv(one.summary));
  CHECK(std::filesystem::exists(dir / "runs_k2.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("adversarial reward mode runs on the non-uniform construction") {
  ExperimentConfig c = small_config();
  c.d = 4;
  c.reward_mode = RewardMode::kAdversarial;
  c.t_rounds = 20;
  const MnlInstance inst = make_instance(c, 3, 0);
  CHECK(inst.adversarial.has_value());
  CHECK(inst.n_items == 12);
  const CellResult cell = run_cell(c, "ofu-mnl", 3, 0);
  CHECK_FALSE(cell.error);
  CHECK(cell.records.size() == 20);
}

TEST_CASE("diagnostics hold on small runs") {
  ExperimentConfig c = small_config();
  c.t_rounds = 300;
  c.reward_mode = RewardMode::kUniform;
  for (std::size_t i = 0; i < 2; ++i) {
    const DiagnosticReport rep = diagnose(c, 3, i);
    INFO(format_report(rep));
    CHECK(rep.passed());
    CHECK(rep.rounds == 300);
    CHECK(rep.covered_all);
    CHECK(rep.potential_sum <= rep.potential_bound);
    CHECK(rep.max_movement <= rep.movement_bound);
    CHECK(rep.kappa_hat <= rep.max_kappa_star + 1e-12);
  }
}
