#pragma once

// Multinomial-logit choice model with an outside option.
//
// An assortment S of at most K items is offered; item i in S is chosen with
// probability exp(x_i.w) / (v0 + sum_{j in S} exp(x_j.w)) and the outside
// ("no purchase") option with probability v0 / (same denominator). Everything
// here is a pure function of its arguments.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mnl/random.hpp"

namespace mnl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Utilities are clamped to this magnitude before exponentiation.
inline constexpr double kUtilityClamp = 50.0;

/// Slack allowed on the unit-norm bound for feature rows and parameters.
inline constexpr double kNormSlack = 1e-9;

/// Item features for one round: one row per item, every row in the unit ball.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws std::domain_error if any row has Euclidean norm above 1.
  explicit FeatureMatrix(Matrix rows);

  [[nodiscard]] std::size_t items() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  [[nodiscard]] auto row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return rows_; }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.rows_.rows() == b.rows_.rows() && a.rows_.cols() == b.rows_.cols() &&
           a.rows_ == b.rows_;
  }

 private:
  Matrix rows_;
};

/// Offered set of item indices, kept strictly increasing.
class Assortment {
 public:
  Assortment() = default;
  /// Sorts the indices; throws std::invalid_argument on duplicates.
  explicit Assortment(std::vector<std::size_t> items);
  Assortment(std::initializer_list<std::size_t> items)
      : Assortment(std::vector<std::size_t>(items)) {}

  [[nodiscard]] std::span<const std::size_t> items() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
  [[nodiscard]] std::size_t operator[](std::size_t k) const { return items_[k]; }
  [[nodiscard]] auto begin() const noexcept { return items_.begin(); }
  [[nodiscard]] auto end() const noexcept { return items_.end(); }

  /// Throws unless 1 <= size <= capacity and every index is below n_items.
  void check(std::size_t n_items, std::size_t capacity) const;

  friend bool operator==(const Assortment&, const Assortment&) = default;

 private:
  std::vector<std::size_t> items_;
};

/// Outcome probabilities aligned with an assortment's item order.
struct ChoiceDistribution {
  double p_outside = 1.0;
  std::vector<double> p_items;

  [[nodiscard]] double total() const noexcept;
};

/// One observed choice: a position inside the assortment, or the outside option.
struct ChoiceFeedback {
  static constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();

  std::size_t chosen = kOutside;

  [[nodiscard]] bool outside() const noexcept { return chosen == kOutside; }
  friend bool operator==(const ChoiceFeedback&, const ChoiceFeedback&) = default;
};

/// Per-item rewards, each in [0, 1].
using RewardVector = Vector;

/// Throws std::domain_error unless every reward lies in [0, 1].
void check_rewards(const RewardVector& rewards);

/// x_i.w for every item of the assortment, clamped to +-kUtilityClamp.
std::vector<double> assortment_utilities(const Assortment& assortment,
                                         const FeatureMatrix& features, const Vector& w);

/// Softmax with the outside option's log-weight ln(v0), max-shifted.
ChoiceDistribution probabilities_from_utilities(std::span<const double> utilities, double v0);

ChoiceDistribution choice_probabilities(const Assortment& assortment,
                                        const FeatureMatrix& features, const Vector& w,
                                        double v0);

/// sum_i exp(u_i) r_i / (v0 + sum_j exp(u_j)), evaluated stably.
double revenue_from_utilities(std::span<const double> utilities,
                              std::span<const double> rewards, double v0);

double expected_revenue(const Assortment& assortment, const FeatureMatrix& features,
                        const Vector& w, const RewardVector& rewards, double v0);

ChoiceFeedback sample_choice(const ChoiceDistribution& dist, Rng& rng);

/// Full negative log-likelihood of the observed outcome, outside option included.
double mnl_loss(const Vector& w, const Assortment& assortment, const FeatureMatrix& features,
                const ChoiceFeedback& feedback, double v0);

/// sum_i (p_i - y_i) x_i over the assortment.
Vector loss_gradient(const Vector& w, const Assortment& assortment,
                     const FeatureMatrix& features, const ChoiceFeedback& feedback, double v0);

/// Same residual form with an explicit (possibly non one-hot) target vector
/// aligned with the assortment.
Vector loss_gradient_from_target(const Vector& w, const Assortment& assortment,
                                 const FeatureMatrix& features, std::span<const double> target,
                                 double v0);

/// sum_i p_i x_i x_i^T - (sum_i p_i x_i)(sum_i p_i x_i)^T.
Matrix loss_hessian(const Vector& w, const Assortment& assortment,
                    const FeatureMatrix& features, double v0);

}  // namespace mnl
