#include "mnl/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mnl/assortment.hpp"
#include "mnl/choice_model.hpp"
#include "mnl/config.hpp"
#include "mnl/harness.hpp"
#include "mnl/instances.hpp"
#include "mnl/projection.hpp"
#include "mnl/random.hpp"

namespace mnl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector random_direction(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = standard_normal(rng);
  return v / v.norm();
}

// Uniform in the ball of the given radius.
Vector random_in_ball(Rng& rng, Eigen::Index d, double radius) {
  return random_direction(rng, d) *
         (radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(d)));
}

FeatureMatrix random_features(Rng& rng, std::size_t n, std::size_t d) {
  Matrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    rows.row(i) = random_in_ball(rng, rows.cols(), 1.0).transpose();
  }
  return FeatureMatrix(std::move(rows));
}

Assortment random_assortment(Rng& rng, std::size_t n, std::size_t size) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < size; ++i) {
    std::swap(idx[i], idx[i + static_cast<std::size_t>(uniform_index(rng, n - i))]);
  }
  idx.resize(size);
  return Assortment(std::move(idx));
}

// A random round: features, assortment, parameter, v0 and an observed choice.
struct Case {
  FeatureMatrix x;
  Assortment s;
  Vector w;
  double v0;
  ChoiceFeedback y;
};

Case random_case(Rng& rng, double w_radius) {
  const std::size_t d = 1 + static_cast<std::size_t>(uniform_index(rng, 8));
  const std::size_t n = 1 + static_cast<std::size_t>(uniform_index(rng, 20));
  const std::size_t size = 1 + static_cast<std::size_t>(uniform_index(rng, n));
  Case c{random_features(rng, n, d), random_assortment(rng, n, size),
         random_in_ball(rng, static_cast<Eigen::Index>(d), w_radius),
         std::exp(uniform(rng, std::log(0.05), std::log(20.0))), ChoiceFeedback{}};
  const std::size_t outcome = static_cast<std::size_t>(uniform_index(rng, size + 1));
  c.y = outcome == size ? ChoiceFeedback{} : ChoiceFeedback{outcome};
  return c;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

}  // namespace

std::string format_check(const CheckResult& r) {
  std::ostringstream out;
  out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << " ("
      << std::fixed;
  out.precision(2);
  out << r.seconds << " s)";
  return out.str();
}

CheckResult check_normalization(std::size_t draws, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("normalization", draws)));
  double worst = 0.0;
  bool in_range = true;
  for (std::size_t i = 0; i < draws; ++i) {
    const Case c = random_case(rng, 5.0);
    const ChoiceDistribution p = choice_probabilities(c.s, c.x, c.w, c.v0);
    worst = std::max(worst, std::abs(1.0 - p.total()));
    in_range = in_range && p.p_outside >= 0.0 && p.p_outside <= 1.0;
    for (double q : p.p_items) in_range = in_range && q >= 0.0 && q <= 1.0;
  }
  return {"probability normalization", worst < 1e-12 && in_range,
          std::to_string(draws) + " draws, max |1 - total| = " + fmt(worst),
          seconds_since(start)};
}

CheckResult check_gradient(std::size_t cases, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("gradient", cases)));
  double worst_rel = 0.0;
  double worst_norm = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < cases; ++i) {
    const Case c = random_case(rng, 1.0);
    const Vector g = loss_gradient(c.w, c.s, c.x, c.y, c.v0);
    Vector fd(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      Vector wp = c.w;
      Vector wm = c.w;
      wp[j] += h;
      wm[j] -= h;
      fd[j] = (mnl_loss(wp, c.s, c.x, c.y, c.v0) - mnl_loss(wm, c.s, c.x, c.y, c.v0)) / (2.0 * h);
    }
    const double scale = std::max({g.norm(), fd.norm(), 1e-8});
    worst_rel = std::max(worst_rel, (g - fd).norm() / scale);
    worst_norm = std::max(worst_norm, g.norm());
  }
  return {"gradient vs finite differences", worst_rel < 1e-5 && worst_norm <= 2.0,
          std::to_string(cases) + " cases, max rel err = " + fmt(worst_rel) +
              ", max ||grad|| = " + fmt(worst_norm),
          seconds_since(start)};
}

CheckResult check_hessian(std::size_t cases, std::size_t spectrum_draws, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("hessian", cases)));
  double worst_rel = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < cases; ++i) {
    const Case c = random_case(rng, 1.0);
    const Matrix hess = loss_hessian(c.w, c.s, c.x, c.v0);
    Matrix fd(hess.rows(), hess.cols());
    for (Eigen::Index j = 0; j < hess.cols(); ++j) {
      Vector wp = c.w;
      Vector wm = c.w;
      wp[j] += h;
      wm[j] -= h;
      fd.col(j) = (loss_gradient(wp, c.s, c.x, c.y, c.v0) - loss_gradient(wm, c.s, c.x, c.y, c.v0)) /
                  (2.0 * h);
    }
    const double scale = std::max({hess.norm(), fd.norm(), 1e-8});
    worst_rel = std::max(worst_rel, (hess - fd).norm() / scale);
  }
  double min_eig = 0.0;
  double max_eig = 0.0;
  for (std::size_t i = 0; i < spectrum_draws; ++i) {
    const Case c = random_case(rng, 1.0);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(loss_hessian(c.w, c.s, c.x, c.v0),
                                                    Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    max_eig = std::max(max_eig, eig.eigenvalues().maxCoeff());
  }
  const bool ok = worst_rel < 1e-4 && min_eig >= -1e-10 && max_eig <= 1.0 + 1e-10;
  return {"Hessian vs finite differences and spectrum", ok,
          std::to_string(cases) + " cases, max rel err = " + fmt(worst_rel) + "; " +
              std::to_string(spectrum_draws) + " draws, eig in [" + fmt(min_eig) + ", " +
              fmt(max_eig) + "]",
          seconds_since(start)};
}

CheckResult check_self_concordance(std::size_t lines, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("self_concordance", lines)));
  const double h = 1e-2;
  const double m = 3.0 * std::numbers::sqrt2;
  double worst_margin = -1e300;  // max of |phi'''| - m ||b|| phi''
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < lines; ++i) {
    const Case c = random_case(rng, 1.0);
    const Vector b = random_in_ball(rng, c.w.size(), 1.0);
    const double s0 = uniform(rng, -1.0, 1.0);
    auto phi = [&](double s) { return mnl_loss(c.w + s * b, c.s, c.x, c.y, c.v0); };
    const double f2m = phi(s0 - 2 * h);
    const double f1m = phi(s0 - h);
    const double f0 = phi(s0);
    const double f1p = phi(s0 + h);
    const double f2p = phi(s0 + 2 * h);
    const double second = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h);
    const double third = (f2p - 2 * f1p + 2 * f1m - f2m) / (2 * h * h * h);
    const double bound = m * b.norm() * second;
    worst_margin = std::max(worst_margin, std::abs(third) - bound);
    if (bound > 1e-9) worst_ratio = std::max(worst_ratio, std::abs(third) / bound);
  }
  return {"self-concordance along random lines", worst_margin <= 1e-6,
          std::to_string(lines) + " lines, max |phi'''| - 3sqrt2 ||b|| phi'' = " +
              fmt(worst_margin) + ", max ratio = " + fmt(worst_ratio),
          seconds_since(start)};
}

CheckResult check_optimizer_exactness(std::size_t instances, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("optimizer", instances)));
  double worst_gap = 0.0;
  std::size_t uniform_mismatch = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform_index(rng, 12));
    const std::size_t k = 1 + static_cast<std::size_t>(uniform_index(rng, 4));
    const double v0 = uniform(rng, 0.1, 5.0);
    std::vector<double> u(n);
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      u[j] = uniform(rng, -3.0, 3.0);
      r[j] = uniform01(rng);
    }
    const OptimizedAssortment fast = optimize_revenue(u, r, v0, k);
    const OptimizedAssortment slow = brute_force_utilities(u, r, v0, k);
    std::vector<double> su;
    std::vector<double> sr;
    for (std::size_t j : fast.assortment) {
      su.push_back(u[j]);
      sr.push_back(r[j]);
    }
    worst_gap = std::max(worst_gap, std::abs(revenue_from_utilities(su, sr, v0) - slow.revenue));

    const std::vector<double> ones(n, 1.0);
    const OptimizedAssortment unit = optimize_revenue(u, ones, v0, k);
    const OptimizedAssortment unit_slow = brute_force_utilities(u, ones, v0, k);
    if (!(unit.assortment == top_k(u, k)) || !(unit_slow.assortment == top_k(u, k))) {
      ++uniform_mismatch;
    }
  }
  const double secs = seconds_since(start);
  return {"assortment optimizer vs enumeration",
          worst_gap <= 1e-8 && uniform_mismatch == 0 && secs < 5.0,
          std::to_string(instances) + " instances, max revenue gap = " + fmt(worst_gap) +
              ", unit-reward top-K mismatches = " + std::to_string(uniform_mismatch),
          secs};
}

CheckResult check_projection_kkt(std::size_t pairs, std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed ^ hash_tag("projection", pairs)));
  double worst_feas = 0.0;
  double worst_resid = 0.0;
  double worst_slack = 0.0;
  bool mu_nonneg = true;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto d = static_cast<Eigen::Index>(1 + uniform_index(rng, 10));
    Matrix a(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) = standard_normal(rng);
    }
    // Scales from O(1) up to the estimator's regularizer range.
    const double scale = std::exp(uniform(rng, std::log(0.1), std::log(5000.0)));
    const Matrix metric = scale * (a * a.transpose() / static_cast<double>(d) +
                                   0.05 * Matrix::Identity(d, d));
    const Vector w_prime = random_direction(rng, d) * uniform(rng, 0.1, 4.0);
    const BallProjection proj = project_ball_with_multiplier(w_prime, metric);
    const double norm = proj.w.norm();
    worst_feas = std::max(worst_feas, norm - 1.0);
    worst_resid = std::max(worst_resid,
                           (metric * (proj.w - w_prime) + proj.multiplier * proj.w).norm());
    worst_slack = std::max(worst_slack, std::abs(proj.multiplier * (1.0 - norm)));
    mu_nonneg = mu_nonneg && proj.multiplier >= 0.0;
  }
  const bool ok = worst_feas <= 1e-9 && worst_resid < 1e-6 && worst_slack < 1e-8 && mu_nonneg;
  return {"ball projection KKT", ok,
          std::to_string(pairs) + " pairs, max (||w|| - 1) = " + fmt(worst_feas) +
              ", max residual = " + fmt(worst_resid) + ", max slackness = " + fmt(worst_slack),
          seconds_since(start)};
}

CheckResult check_adversarial_constructions() {
  const auto start = Clock::now();
  std::vector<std::string> problems;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond && std::find(problems.begin(), problems.end(), what) == problems.end()) {
      problems.push_back(what);
    }
  };
  std::size_t checked_specs = 0;

  for (std::size_t d : {std::size_t{4}, std::size_t{8}}) {
    const auto subsets = quarter_subsets(d);
    const std::size_t binom = d == 4 ? 4 : 28;  // C(4,1), C(8,2)
    expect(subsets.size() == binom, "number of (d/4)-subsets");
    for (std::size_t k : {std::size_t{1}, std::size_t{3}}) {
      for (double v0 : {1.0, 2.0}) {
        for (const auto& v : subsets) {
          AdversarialSpec spec;
          spec.d = d;
          spec.k = k;
          spec.v0 = v0;
          spec.v_set = v;
          spec.t_rounds = 1000;
          spec.epsilon = default_epsilon(d, k, v0, spec.t_rounds);
          ++checked_specs;

          const MnlInstance uni = lower_bound_instance(spec);
          const MnlInstance non = nonuniform_lower_bound_instance(spec);
          const RoundData r1 = non.round(1);
          const RoundData r9 = non.round(9);
          expect(uni.n_items == k * binom && non.n_items == k * binom, "N = K C(d, d/4)");
          expect(r1.features.matrix() == r9.features.matrix(), "contexts invariant across rounds");
          expect(uni.w_star.norm() <= 1.0, "||w_V|| <= 1");
          for (std::size_t i = 0; i < non.n_items; ++i) {
            expect(std::abs(r1.features.row(i).norm() -
                            std::sqrt(static_cast<double>(d / 4) / static_cast<double>(d))) < 1e-12,
                   "||x_U|| = sqrt(1/4)");
          }
          // x_U . w_V = eps |U n V| / sqrt d for every U.
          for (std::size_t ui = 0; ui < subsets.size(); ++ui) {
            std::size_t overlap = 0;
            for (std::size_t j : subsets[ui]) overlap += std::count(v.begin(), v.end(), j);
            const double expected = spec.epsilon * static_cast<double>(overlap) /
                                    std::sqrt(static_cast<double>(d));
            expect(std::abs(r1.features.row(ui * k).dot(non.w_star) - expected) < 1e-15,
                   "x_U . w_V = eps |U n V| / sqrt d");
          }
          // Rewards: exactly one item at 1, the rest at gamma = 1/(v0+1).
          const double gamma = 1.0 / (v0 + 1.0);
          const std::size_t star = rewarded_item(spec);
          std::size_t at_one = 0;
          for (std::size_t i = 0; i < non.n_items; ++i) {
            const double r = r1.rewards[static_cast<Eigen::Index>(i)];
            if (r == 1.0) {
              ++at_one;
            } else {
              expect(r == gamma, "non-rewarded items earn gamma = 1/(v0+1)");
            }
          }
          expect(at_one == 1 && r1.rewards[static_cast<Eigen::Index>(star)] == 1.0,
                 "single rewarded item");
          // Exactly K items share the maximal utility, the first is i*.
          const Vector u = r1.features.matrix() * non.w_star;
          const double top = u.maxCoeff();
          std::size_t n_top = 0;
          std::size_t first_top = non.n_items;
          for (std::size_t i = 0; i < non.n_items; ++i) {
            if (u[static_cast<Eigen::Index>(i)] == top) {
              ++n_top;
              first_top = std::min(first_top, i);
            }
          }
          expect(n_top == k && first_top == star, "K maximal copies, i* lowest index");
          // Singleton optimum.
          const Assortment best = brute_force_best(r1.features, non.w_star, r1.rewards, v0, k);
          expect(best == Assortment{star}, "optimal assortment is the singleton {i*}");
          // Unit rewards: optimum fills K slots with maximal-utility items.
          const Assortment best_uni = brute_force_best(r1.features, uni.w_star,
                                                       uni.round(1).rewards, v0, k);
          expect(best_uni.size() == std::min(k, uni.n_items), "unit-reward optimum has K items");

          // R(S, w_V) <= max_{i in S} e^{u_i} / (v0 + e^{u_i}) for every S (d = 4 only).
          if (d == 4) {
            const std::size_t n = non.n_items;
            std::vector<std::size_t> set;
            auto visit = [&](auto&& self, std::size_t from) -> void {
              for (std::size_t i = from; i < n; ++i) {
                set.push_back(i);
                double num = 0.0;
                double den = v0;
                double cap = 0.0;
                for (std::size_t j : set) {
                  const double e = std::exp(u[static_cast<Eigen::Index>(j)]);
                  num += e * r1.rewards[static_cast<Eigen::Index>(j)];
                  den += e;
                  cap = std::max(cap, e / (v0 + e));
                }
                expect(num / den <= cap + 1e-15, "R(S, w_V) <= max_i e^u_i / (v0 + e^u_i)");
                if (set.size() < k) self(self, i + 1);
                set.pop_back();
              }
            };
            visit(visit, 0);
          }
        }
      }
    }
  }
  std::string detail = std::to_string(checked_specs) + " (d, K, v0, V) specs";
  for (const auto& p : problems) detail += "; violated: " + p;
  return {"adversarial constructions", problems.empty(), detail, seconds_since(start)};
}

CheckResult check_coverage(const CoverageSettings& s) {
  const auto start = Clock::now();
  ExperimentConfig config;
  config.d = s.d;
  config.n_items = s.n_items;
  config.k_values = {s.k};
  config.t_rounds = s.t_rounds;
  config.v0 = 1.0;
  config.reward_mode = RewardMode::kUniform;
  config.policies = {std::string(kOfuMnl)};
  config.num_instances = s.runs;
  config.base_seed = s.seed;
  config.delta = s.delta;
  config.beta_scale = 1.0;

  std::size_t covered_runs = 0;
  std::size_t failed = 0;
  CellOptions options;
  options.record_timing = false;
  for (std::size_t i = 0; i < s.runs; ++i) {
    const CellResult cell = run_cell(config, kOfuMnl, s.k, i, options);
    if (cell.error) {
      ++failed;
      continue;
    }
    const bool all = std::all_of(cell.records.begin(), cell.records.end(),
                                 [](const RunRecord& r) { return r.in_confidence; });
    covered_runs += all ? 1 : 0;
  }
  const double fraction = static_cast<double>(covered_runs) / static_cast<double>(s.runs);
  return {"confidence-set coverage", failed == 0 && fraction >= 1.0 - s.delta,
          std::to_string(s.runs) + " runs (d = " + std::to_string(s.d) + ", K = " +
              std::to_string(s.k) + ", T = " + std::to_string(s.t_rounds) +
              "), covered at every round: " + std::to_string(covered_runs) + " (" +
              std::to_string(fraction) + ")",
          seconds_since(start)};
}

std::vector<CheckResult> run_validation_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(check_normalization(100'000, seed));
  out.push_back(check_gradient(100, seed));
  out.push_back(check_hessian(100, 1000, seed));
  out.push_back(check_self_concordance(500, seed));
  out.push_back(check_optimizer_exactness(200, seed));
  out.push_back(check_projection_kkt(500, seed));
  out.push_back(check_adversarial_constructions());
  CoverageSettings coverage;
  coverage.seed = seed;
  out.push_back(check_coverage(coverage));
  return out;
}

}  // namespace mnl
