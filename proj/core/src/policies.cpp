#include "mnl/policies.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace mnl {

PolicyDecision decide_from_utilities(std::vector<double> utilities, const RewardVector& rewards,
                                     bool uniform_rewards, double v0, std::size_t k) {
  if (utilities.empty()) throw std::domain_error("no items to choose from");
  PolicyDecision decision;
  if (uniform_rewards) {
    decision.assortment = top_k(utilities, k);
    std::vector<double> chosen;
    for (std::size_t i : decision.assortment) chosen.push_back(utilities[i]);
    const std::vector<double> ones(chosen.size(), 1.0);
    decision.optimistic_revenue = revenue_from_utilities(chosen, ones, v0);
  } else {
    const std::span<const double> r(rewards.data(), static_cast<std::size_t>(rewards.size()));
    OptimizedAssortment best = optimize_revenue(utilities, r, v0, k);
    decision.assortment = std::move(best.assortment);
    decision.optimistic_revenue = best.revenue;
  }
  decision.optimistic_utilities = std::move(utilities);
  return decision;
}

PolicyDecision select_uniform(const EstimatorState& state, const FeatureMatrix& features,
                              double v0, std::size_t k) {
  if (features.items() == 0) throw std::domain_error("no items to choose from");
  const RewardVector ones = RewardVector::Ones(static_cast<Eigen::Index>(features.items()));
  return decide_from_utilities(optimistic_utilities(state, features), ones, true, v0, k);
}

PolicyDecision select_nonuniform(const EstimatorState& state, const FeatureMatrix& features,
                                 const RewardVector& rewards, double v0, std::size_t k) {
  if (features.items() == 0) throw std::domain_error("no items to choose from");
  return decide_from_utilities(optimistic_utilities(state, features), rewards, false, v0, k);
}

PolicyDecision ucb_mnl_select(const BaselineState& state, const FeatureMatrix& features,
                              const RewardVector& rewards, bool uniform_rewards, double v0,
                              std::size_t k, double c_ucb) {
  const Eigen::LLT<Matrix> llt(state.V);
  if (llt.info() != Eigen::Success) throw std::runtime_error("design matrix is not positive definite");
  const double scale = c_ucb * std::sqrt(std::log(static_cast<double>(state.round())));
  const Matrix z = llt.matrixL().solve(features.matrix().transpose());
  const Vector mean = features.matrix() * state.w_hat;
  std::vector<double> alpha(features.items());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    alpha[i] = mean[col] + scale * z.col(col).norm();
  }
  PolicyDecision decision = decide_from_utilities(std::move(alpha), rewards, uniform_rewards, v0, k);
  decision.flagged = state.last_fit_flagged;
  return decision;
}

PolicyDecision ts_mnl_select(const BaselineState& state, const FeatureMatrix& features,
                             const RewardVector& rewards, bool uniform_rewards, double v0,
                             std::size_t k, double a, Rng& rng) {
  const Eigen::LLT<Matrix> llt(state.V);
  if (llt.info() != Eigen::Success) throw std::runtime_error("design matrix is not positive definite");
  Vector z(state.w_hat.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = standard_normal(rng);
  // V = L L^T, so L^{-T} z has covariance V^{-1}.
  const Vector sample = state.w_hat + a * llt.matrixU().solve(z);
  const Vector u = features.matrix() * sample;
  PolicyDecision decision = decide_from_utilities(std::vector<double>(u.data(), u.data() + u.size()),
                                                  rewards, uniform_rewards, v0, k);
  decision.flagged = state.last_fit_flagged;
  return decision;
}

namespace {

class OfuMnlPolicy final : public Policy {
 public:
  OfuMnlPolicy(std::size_t d, std::size_t k_max, const PolicyParams& params)
      : state_(init_estimator(d, k_max, params.delta, params.beta_scale)) {}

  std::string_view name() const override { return kOfuMnl; }

  PolicyDecision decide(const RoundView& round) override {
    return round.uniform_rewards ? select_uniform(state_, round.features, round.v0, round.k)
                                 : select_nonuniform(state_, round.features, round.rewards,
                                                     round.v0, round.k);
  }

  void update(const RoundView& round, const Assortment& offered,
              const ChoiceFeedback& feedback) override {
    state_ = step(state_, offered, round.features, feedback, round.v0);
  }

  const EstimatorState* estimator() const override { return &state_; }

 private:
  EstimatorState state_;
};

class UcbMnlPolicy final : public Policy {
 public:
  UcbMnlPolicy(std::size_t d, const PolicyParams& params)
      : state_(init_baseline(d, params.lambda0)), c_ucb_(params.c_ucb) {}

  std::string_view name() const override { return kUcbMnl; }

  PolicyDecision decide(const RoundView& round) override {
    return ucb_mnl_select(state_, round.features, round.rewards, round.uniform_rewards, round.v0,
                          round.k, c_ucb_);
  }

  void update(const RoundView& round, const Assortment& offered,
              const ChoiceFeedback& feedback) override {
    observe(state_, offered, round.features, feedback, round.v0);
  }

 private:
  BaselineState state_;
  double c_ucb_;
};

class TsMnlPolicy final : public Policy {
 public:
  TsMnlPolicy(std::size_t d, const PolicyParams& params, std::uint64_t seed)
      : state_(init_baseline(d, params.lambda0)), a_(params.ts_a), rng_(seed) {}

  std::string_view name() const override { return kTsMnl; }

  PolicyDecision decide(const RoundView& round) override {
    return ts_mnl_select(state_, round.features, round.rewards, round.uniform_rewards, round.v0,
                         round.k, a_, rng_);
  }

  void update(const RoundView& round, const Assortment& offered,
              const ChoiceFeedback& feedback) override {
    observe(state_, offered, round.features, feedback, round.v0);
  }

 private:
  BaselineState state_;
  double a_;
  Rng rng_;
};

class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(Vector w_star) : w_star_(std::move(w_star)) {}

  std::string_view name() const override { return kOracle; }

  PolicyDecision decide(const RoundView& round) override {
    const Vector u = round.features.matrix() * w_star_;
    return decide_from_utilities(std::vector<double>(u.data(), u.data() + u.size()), round.rewards,
                                 round.uniform_rewards, round.v0, round.k);
  }

  void update(const RoundView&, const Assortment&, const ChoiceFeedback&) override {}

 private:
  Vector w_star_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  std::string_view name() const override { return kRandom; }

  PolicyDecision decide(const RoundView& round) override {
    const std::size_t n = round.features.items();
    const std::size_t take = std::min(round.k, n);
    // Partial Fisher-Yates.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng_, n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    PolicyDecision decision;
    decision.assortment = Assortment(std::move(idx));
    decision.optimistic_utilities.assign(n, 0.0);
    return decision;
  }

  void update(const RoundView&, const Assortment&, const ChoiceFeedback&) override {}

 private:
  Rng rng_;
};

}  // namespace

std::vector<std::string> known_policies() {
  return {std::string(kOfuMnl), std::string(kUcbMnl), std::string(kTsMnl), std::string(kOracle),
          std::string(kRandom)};
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyParams& params,
                                    std::size_t d, std::size_t k_max, std::uint64_t seed,
                                    const Vector& w_star) {
  if (name == kOfuMnl) return std::make_unique<OfuMnlPolicy>(d, k_max, params);
  if (name == kUcbMnl) return std::make_unique<UcbMnlPolicy>(d, params);
  if (name == kTsMnl) return std::make_unique<TsMnlPolicy>(d, params, seed);
  if (name == kOracle) return std::make_unique<OraclePolicy>(w_star);
  if (name == kRandom) return std::make_unique<RandomPolicy>(seed);
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

}  // namespace mnl
