#include "mnl/choice_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mnl {

FeatureMatrix::FeatureMatrix(Matrix rows) : rows_(std::move(rows)) {
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    const double norm = rows_.row(i).norm();
    if (!(norm <= 1.0 + kNormSlack)) {
      throw std::domain_error("feature row " + std::to_string(i) + " has norm " +
                              std::to_string(norm) + " > 1");
    }
  }
}

Assortment::Assortment(std::vector<std::size_t> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  if (std::adjacent_find(items_.begin(), items_.end()) != items_.end()) {
    throw std::invalid_argument("assortment contains duplicate items");
  }
}

void Assortment::check(std::size_t n_items, std::size_t capacity) const {
  if (items_.empty()) throw std::invalid_argument("assortment is empty");
  if (items_.size() > capacity) {
    throw std::invalid_argument("assortment of size " + std::to_string(items_.size()) +
                                " exceeds capacity " + std::to_string(capacity));
  }
  if (items_.back() >= n_items) {
    throw std::out_of_range("assortment item " + std::to_string(items_.back()) +
                            " out of range for " + std::to_string(n_items) + " items");
  }
}

double ChoiceDistribution::total() const noexcept {
  return std::accumulate(p_items.begin(), p_items.end(), p_outside);
}

void check_rewards(const RewardVector& rewards) {
  for (Eigen::Index i = 0; i < rewards.size(); ++i) {
    if (!(rewards[i] >= 0.0 && rewards[i] <= 1.0)) {
      throw std::domain_error("reward " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

namespace {

void check_v0(double v0) {
  if (!(v0 > 0.0) || !std::isfinite(v0)) {
    throw std::domain_error("outside-option weight v0 must be positive and finite");
  }
}

void check_inputs(const Assortment& assortment, const FeatureMatrix& features, const Vector& w,
                  double v0) {
  check_v0(v0);
  if (static_cast<std::size_t>(w.size()) != features.dim()) {
    throw std::invalid_argument("parameter dimension does not match features");
  }
  if (!assortment.empty() && assortment.items().back() >= features.items()) {
    throw std::out_of_range("assortment index out of range");
  }
}

double clamp_utility(double u) {
  assert(std::abs(u) <= kUtilityClamp && "utility clamp fired");
  return std::clamp(u, -kUtilityClamp, kUtilityClamp);
}

// log(v0 + sum exp(u)), max-shifted.
double log_partition(std::span<const double> utilities, double log_v0) {
  double shift = log_v0;
  for (double u : utilities) shift = std::max(shift, u);
  double sum = std::exp(log_v0 - shift);
  for (double u : utilities) sum += std::exp(u - shift);
  return shift + std::log(sum);
}

}  // namespace

std::vector<double> assortment_utilities(const Assortment& assortment,
                                         const FeatureMatrix& features, const Vector& w) {
  std::vector<double> u;
  u.reserve(assortment.size());
  for (std::size_t item : assortment) u.push_back(clamp_utility(features.row(item).dot(w)));
  return u;
}

ChoiceDistribution probabilities_from_utilities(std::span<const double> utilities, double v0) {
  check_v0(v0);
  const double log_v0 = std::log(v0);
  const double log_z = log_partition(utilities, log_v0);
  ChoiceDistribution dist;
  dist.p_outside = std::exp(log_v0 - log_z);
  dist.p_items.reserve(utilities.size());
  for (double u : utilities) dist.p_items.push_back(std::exp(u - log_z));
  return dist;
}

ChoiceDistribution choice_probabilities(const Assortment& assortment,
                                        const FeatureMatrix& features, const Vector& w,
                                        double v0) {
  check_inputs(assortment, features, w, v0);
  return probabilities_from_utilities(assortment_utilities(assortment, features, w), v0);
}

double revenue_from_utilities(std::span<const double> utilities,
                              std::span<const double> rewards, double v0) {
  const ChoiceDistribution dist = probabilities_from_utilities(utilities, v0);
  double revenue = 0.0;
  for (std::size_t k = 0; k < utilities.size(); ++k) revenue += dist.p_items[k] * rewards[k];
  return revenue;
}

double expected_revenue(const Assortment& assortment, const FeatureMatrix& features,
                        const Vector& w, const RewardVector& rewards, double v0) {
  check_inputs(assortment, features, w, v0);
  if (static_cast<std::size_t>(rewards.size()) != features.items()) {
    throw std::invalid_argument("reward vector length does not match item count");
  }
  const ChoiceDistribution dist = choice_probabilities(assortment, features, w, v0);
  double revenue = 0.0;
  for (std::size_t k = 0; k < assortment.size(); ++k) {
    revenue += dist.p_items[k] * rewards[static_cast<Eigen::Index>(assortment[k])];
  }
  return revenue;
}

ChoiceFeedback sample_choice(const ChoiceDistribution& dist, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < dist.p_items.size(); ++k) {
    cumulative += dist.p_items[k];
    if (u < cumulative) return ChoiceFeedback{k};
  }
  return ChoiceFeedback{};
}

double mnl_loss(const Vector& w, const Assortment& assortment, const FeatureMatrix& features,
                const ChoiceFeedback& feedback, double v0) {
  check_inputs(assortment, features, w, v0);
  const std::vector<double> u = assortment_utilities(assortment, features, w);
  const double log_v0 = std::log(v0);
  const double log_z = log_partition(u, log_v0);
  if (feedback.outside()) return log_z - log_v0;
  if (feedback.chosen >= u.size()) throw std::out_of_range("feedback position out of range");
  return log_z - u[feedback.chosen];
}

Vector loss_gradient_from_target(const Vector& w, const Assortment& assortment,
                                 const FeatureMatrix& features, std::span<const double> target,
                                 double v0) {
  if (target.size() != assortment.size()) {
    throw std::invalid_argument("target length does not match assortment");
  }
  const ChoiceDistribution dist = choice_probabilities(assortment, features, w, v0);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(features.dim()));
  for (std::size_t k = 0; k < assortment.size(); ++k) {
    g += (dist.p_items[k] - target[k]) * features.row(assortment[k]).transpose();
  }
  return g;
}

Vector loss_gradient(const Vector& w, const Assortment& assortment,
                     const FeatureMatrix& features, const ChoiceFeedback& feedback, double v0) {
  std::vector<double> y(assortment.size(), 0.0);
  if (!feedback.outside()) {
    if (feedback.chosen >= y.size()) throw std::out_of_range("feedback position out of range");
    y[feedback.chosen] = 1.0;
  }
  return loss_gradient_from_target(w, assortment, features, y, v0);
}

Matrix loss_hessian(const Vector& w, const Assortment& assortment,
                    const FeatureMatrix& features, double v0) {
  const ChoiceDistribution dist = choice_probabilities(assortment, features, w, v0);
  const auto d = static_cast<Eigen::Index>(features.dim());
  Matrix h = Matrix::Zero(d, d);
  Vector mean = Vector::Zero(d);
  for (std::size_t k = 0; k < assortment.size(); ++k) {
    const auto x = features.row(assortment[k]);
    h.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), dist.p_items[k]);
    mean += dist.p_items[k] * x.transpose();
  }
  h.selfadjointView<Eigen::Lower>().rankUpdate(mean, -1.0);
  return h.selfadjointView<Eigen::Lower>();
}

}  // namespace mnl
