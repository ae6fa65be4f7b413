#include "mnl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace mnl {

namespace {

constexpr double kTol = 1e-10;

class Collector {
 public:
  Collector(DiagnosticReport& report, const Vector& w_star) : r_(report), w_star_(w_star) {}

  void operator()(const RoundTrace& trace) {
    const EstimatorState& before = *trace.before;
    const EstimatorState& after = *trace.after;
    const FeatureMatrix& x = trace.round->features;
    const Assortment& s = trace.decision->assortment;
    const double v0 = trace.instance->v0;
    const std::size_t t = trace.t;

    if (r_.rounds == 0) {
      r_.d = before.dim();
      r_.lambda = before.lambda;
      r_.eta = before.eta;
      r_.movement_bound = 4.0 * before.eta / std::sqrt(before.lambda);
    }
    r_.rounds = t;

    const Eigen::LLT<Matrix> llt(before.H);
    auto inv_sq = [&](const Vector& v) { return llt.matrixL().solve(v).squaredNorm(); };

    // Potential sums at w_{s+1}.
    const ChoiceDistribution p_next = choice_probabilities(s, x, after.w, v0);
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(r_.d));
    for (std::size_t k = 0; k < s.size(); ++k) mean += p_next.p_items[k] * x.row(s[k]).transpose();
    double max_sq = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const Vector xi = x.row(s[k]).transpose();
      const double sq = inv_sq(xi);
      const double pp = p_next.p_items[k] * p_next.p_outside;
      r_.potential_sum += pp * sq;
      r_.centered_sum += p_next.p_items[k] * inv_sq(xi - mean);
      r_.kappa_hat = std::min(r_.kappa_hat, pp);
      max_sq = std::max(max_sq, sq);
    }
    r_.max_norm_sum += max_sq;

    const double dd = static_cast<double>(r_.d);
    r_.potential_bound = 2.0 * dd * std::log(1.0 + static_cast<double>(t) / (dd * r_.lambda));
    r_.max_norm_bound = r_.potential_bound / r_.kappa_hat;
    if (r_.potential_sum > r_.potential_bound * (1.0 + 1e-12)) {
      fail(t, "elliptical potential sum exceeds 2d ln(1 + t/(d lambda))");
    }
    if (r_.max_norm_sum > r_.max_norm_bound * (1.0 + 1e-12)) {
      fail(t, "max-norm potential sum exceeds (2/kappa_hat) d ln(1 + t/(d lambda))");
    }
    if (r_.centered_sum > r_.potential_bound * (1.0 + 1e-12)) {
      fail(t, "centered potential sum exceeds 2d ln(1 + t/(d lambda))");
    }

    // kappa*_t at the true optimum.
    const ChoiceDistribution p_star =
        choice_probabilities(trace.optimum->assortment, x, w_star_, v0);
    double ks = 0.0;
    for (double p : p_star.p_items) ks += p * p_star.p_outside;
    r_.kappa_star.push_back(ks);
    r_.max_kappa_star = std::max(r_.max_kappa_star, ks);

    // Movement of the online estimate.
    const Vector step = after.w - before.w;
    const double movement = std::sqrt(step.dot(before.H * step));
    r_.max_movement = std::max(r_.max_movement, movement);
    if (movement > 4.0 * before.eta / before.lambda) ++r_.movement_over_4eta_over_lambda;
    const Vector grad = loss_gradient(before.w, s, x, trace.feedback, v0);
    if (grad.norm() > 2.0 + kTol) fail(t, "loss gradient norm exceeds 2");
    if (movement > 2.0 * before.eta * std::sqrt(inv_sq(grad)) + kTol) {
      fail(t, "estimator step exceeds 2 eta ||grad||_{H^{-1}}");
    }
    if (movement > r_.movement_bound + kTol) fail(t, "estimator step exceeds 4 eta / sqrt(lambda)");
    if (after.w.norm() > 1.0 + 1e-9) fail(t, "estimate left the unit ball");

    const Eigen::SelfAdjointEigenSolver<Matrix> growth(after.H - before.H, Eigen::EigenvaluesOnly);
    if (growth.eigenvalues().minCoeff() < -kTol) fail(t, "H decreased in the PSD order");

    // Regret and decision structure.
    const double regret = trace.optimum->revenue -
                          expected_revenue(s, x, w_star_, trace.round->rewards, v0);
    r_.min_regret = t == 1 ? regret : std::min(r_.min_regret, regret);
    if (regret < -1e-12) fail(t, "negative instantaneous regret");
    if (trace.round->uniform_rewards && s.size() != std::min(x.items(), trace.instance->k)) {
      fail(t, "unit-reward assortment is not full");
    }
    if (!trace.round->uniform_rewards) {
      for (std::size_t i : s) {
        if (trace.round->rewards[static_cast<Eigen::Index>(i)] <
            trace.decision->optimistic_revenue - 1e-8) {
          fail(t, "chosen item's reward is below the optimistic revenue");
          break;
        }
      }
    }

    // Optimism, given coverage at the decision.
    const Vector diff = before.w - w_star_;
    const bool covered = std::sqrt(diff.dot(before.H * diff)) <= confidence_radius(before).beta;
    if (covered) {
      ++r_.covered_rounds;
      ++r_.optimism_checks;
      const auto& alpha = trace.decision->optimistic_utilities;
      for (std::size_t i = 0; i < x.items(); ++i) {
        const double truth = x.row(i).dot(w_star_);
        const double width = alpha[i] - x.row(i).dot(before.w);
        if (alpha[i] < truth - kTol || alpha[i] - truth > 2.0 * width + kTol) {
          fail(t, "optimistic utility outside [x.w*, x.w* + 2 bonus]");
          break;
        }
      }
      if (trace.decision->optimistic_revenue < trace.optimum->revenue - 1e-9) {
        fail(t, "optimistic revenue below the true optimal revenue");
      }
    } else {
      r_.covered_all = false;
    }
  }

 private:
  void fail(std::size_t t, const std::string& what) {
    // One entry per kind of failure keeps reports short.
    for (const auto& v : r_.violations) {
      if (v.find(what) != std::string::npos) return;
    }
    r_.violations.push_back("round " + std::to_string(t) + ": " + what);
  }

  DiagnosticReport& r_;
  const Vector& w_star_;
};

}  // namespace

DiagnosticReport diagnose_instance(const MnlInstance& instance, const ExperimentConfig& config,
                                   std::size_t instance_index) {
  DiagnosticReport report;
  CellOptions options;
  options.record_timing = false;
  options.observer = Collector(report, instance.w_star);
  const CellResult cell = run_cell_on(instance, config, kOfuMnl, instance_index, options);
  if (cell.error) report.violations.push_back("run failed: " + *cell.error);
  return report;
}

DiagnosticReport diagnose(const ExperimentConfig& config, std::size_t k,
                          std::size_t instance_index) {
  return diagnose_instance(make_instance(config, k, instance_index), config, instance_index);
}

std::string format_report(const DiagnosticReport& r) {
  std::ostringstream out;
  out << "rounds                 " << r.rounds << "  (d = " << r.d << ", lambda = " << r.lambda
      << ", eta = " << r.eta << ")\n"
      << "potential sum          " << r.potential_sum << " <= " << r.potential_bound << '\n'
      << "centered potential sum " << r.centered_sum << " <= " << r.potential_bound << '\n'
      << "max-norm sum           " << r.max_norm_sum << " <= " << r.max_norm_bound
      << "  (kappa_hat = " << r.kappa_hat << ")\n"
      << "max kappa*_t           " << r.max_kappa_star << '\n'
      << "coverage               " << r.covered_rounds << "/" << r.rounds
      << (r.covered_all ? " (all rounds)" : "") << '\n'
      << "max step ||dw||_H      " << r.max_movement << " <= " << r.movement_bound
      << "  (rounds above 4 eta/lambda: " << r.movement_over_4eta_over_lambda << ")\n"
      << "min inst. regret       " << r.min_regret << '\n'
      << "status                 " << (r.passed() ? "PASS" : "FAIL") << '\n';
  for (const auto& v : r.violations) out << "  violation: " << v << '\n';
  return out.str();
}

}  // namespace mnl
