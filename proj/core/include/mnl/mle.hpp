#pragma once

// Regularized maximum-likelihood fit over the full choice history, the
// estimation step of the UCB-MNL and TS-MNL baselines. Its cost grows with
// the history length, which is the contrast the runtime benchmarks show.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mnl/choice_model.hpp"

namespace mnl {

/// Past rounds stored as one stacked row matrix: the offered items of every
/// round, in order, with per-round offsets and the chosen row (or none).
class ChoiceHistory {
 public:
  explicit ChoiceHistory(std::size_t d = 0) : d_(d) {}

  void append(const Assortment& assortment, const FeatureMatrix& features,
              const ChoiceFeedback& feedback);
  /// `offered` is |S| x d in offer order; feedback indexes its rows.
  void append(const Matrix& offered, const ChoiceFeedback& feedback);

  [[nodiscard]] std::size_t rounds() const noexcept { return chosen_.size(); }
  [[nodiscard]] bool empty() const noexcept { return chosen_.empty(); }
  [[nodiscard]] std::size_t dim() const noexcept { return d_; }
  [[nodiscard]] std::size_t total_rows() const noexcept { return offsets_.back(); }

  using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>;
  [[nodiscard]] RowMap rows() const {
    return RowMap(data_.data(), static_cast<Eigen::Index>(total_rows()),
                  static_cast<Eigen::Index>(d_));
  }
  /// Rows of round s are [offset(s), offset(s + 1)).
  [[nodiscard]] std::size_t offset(std::size_t s) const { return offsets_[s]; }
  /// Global row index of round s's choice, or -1 for the outside option.
  [[nodiscard]] std::int64_t chosen_row(std::size_t s) const { return chosen_[s]; }

 private:
  std::size_t d_;
  std::vector<double> data_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::int64_t> chosen_;
};

/// Objective value, gradient and Hessian at a point, for warm starts.
struct FitPoint {
  Vector w;
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

struct MleResult {
  Vector w;
  /// Minimizer before projection; the natural warm start for the next fit.
  Vector w_unprojected;
  bool converged = false;
  int iterations = 0;
  /// Objective, gradient and Hessian at w_unprojected.
  FitPoint last;
};

struct MleOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 50;
};

/// Minimizes lambda0 ||w||^2 / 2 + sum_s loss_s(w) by damped Newton from
/// `start`, then projects the result onto the unit ball. Non-convergence is
/// reported through MleResult::converged with the last iterate returned.
MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0, const Vector& start,
                  const MleOptions& options = {});

/// Same, with the objective already evaluated at the start point.
MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0, FitPoint start,
                  const MleOptions& options = {});

/// Starts from the origin.
MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0);

/// Baseline learner state: MLE estimate, design matrix and full history.
struct BaselineState {
  Vector w_hat;
  /// Previous minimizer with the objective evaluated there; extended by
  /// each new observation so a refit starts without a pass over the history.
  FitPoint warm_start;
  Matrix V;  // lambda0 I + sum_s sum_{i in S_s} x_i x_i^T
  ChoiceHistory history;
  double lambda0 = 1.0;
  /// Set when the most recent refit failed and w_hat was kept.
  bool last_fit_flagged = false;

  /// Round index t of the next decision (history length + 1).
  [[nodiscard]] std::size_t round() const noexcept { return history.rounds() + 1; }
};

BaselineState init_baseline(std::size_t d, double lambda0);

/// Records the observation, updates V and refits w_hat warm-started from the
/// previous estimate. A failed fit keeps the previous w_hat and sets the flag.
void observe(BaselineState& state, const Assortment& assortment, const FeatureMatrix& features,
             const ChoiceFeedback& feedback, double v0);

}  // namespace mnl
