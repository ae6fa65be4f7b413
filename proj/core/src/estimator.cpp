#include "mnl/estimator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "mnl/projection.hpp"

namespace mnl {

double default_step_size(std::size_t k_max) {
  return 0.5 * std::log(static_cast<double>(k_max) + 1.0) + 2.0;
}

double default_regularizer(std::size_t d, std::size_t k_max) {
  return 84.0 * std::numbers::sqrt2 * static_cast<double>(d) * default_step_size(k_max);
}

EstimatorState init_estimator(std::size_t d, std::size_t k_max, double delta,
                              double beta_scale) {
  if (d == 0) throw std::domain_error("dimension must be positive");
  if (k_max == 0) throw std::domain_error("capacity must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("delta must lie in (0, 1]");
  if (!(beta_scale >= 0.0)) throw std::domain_error("beta_scale must be nonnegative");

  EstimatorState s;
  const auto n = static_cast<Eigen::Index>(d);
  s.eta = default_step_size(k_max);
  s.lambda = default_regularizer(d, k_max);
  s.w = Vector::Zero(n);
  s.H = s.lambda * Matrix::Identity(n, n);
  s.t = 1;
  s.delta = delta;
  s.k_max = k_max;
  s.beta_scale = beta_scale;
  return s;
}

EstimatorState step_with_target(const EstimatorState& state, const Assortment& assortment,
                                const FeatureMatrix& features, std::span<const double> target,
                                double v0) {
  const Vector grad = loss_gradient_from_target(state.w, assortment, features, target, v0);
  const Matrix h_tilde = state.H + state.eta * loss_hessian(state.w, assortment, features, v0);

  const Eigen::LLT<Matrix> llt(h_tilde);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("estimator metric is not positive definite");
  }
  const Vector w_prime = state.w - state.eta * llt.solve(grad);

  EstimatorState next = state;
  next.w = project_ball(w_prime, h_tilde);
  next.H = state.H + loss_hessian(next.w, assortment, features, v0);
  ++next.t;
  return next;
}

EstimatorState step(const EstimatorState& state, const Assortment& assortment,
                    const FeatureMatrix& features, const ChoiceFeedback& feedback, double v0) {
  std::vector<double> y(assortment.size(), 0.0);
  if (!feedback.outside()) {
    if (feedback.chosen >= y.size()) throw std::out_of_range("feedback position out of range");
    y[feedback.chosen] = 1.0;
  }
  return step_with_target(state, assortment, features, y, v0);
}

double theoretical_radius(std::size_t t, std::size_t d, std::size_t k_max, double delta,
                          double eta, double lambda) {
  const double tt = static_cast<double>(t);
  const double c = 7.0 * eta / 6.0;
  const double concentration = 11.0 *
                               (3.0 * std::log(1.0 + (static_cast<double>(k_max) + 1.0) * tt) + 3.0) *
                               std::log(2.0 * std::sqrt(1.0 + 2.0 * tt) / delta);
  const double potential =
      std::sqrt(6.0) * c * static_cast<double>(d) * std::log(1.0 + (tt + 1.0) / (2.0 * lambda));
  const double beta_prime_sq = 2.0 * eta * (concentration + 2.0 + potential) + 4.0 * lambda;
  return 2.0 * eta / lambda + std::sqrt(beta_prime_sq);
}

ConfidenceRadius confidence_radius(const EstimatorState& state) {
  return {state.beta_scale *
          theoretical_radius(state.t, state.dim(), state.k_max, state.delta, state.eta, state.lambda)};
}

bool in_confidence_set(const EstimatorState& state, const Vector& w_star) {
  const Vector diff = state.w - w_star;
  return std::sqrt(diff.dot(state.H * diff)) <= confidence_radius(state).beta;
}

double inverse_norm(const Matrix& H, const Vector& v) {
  const Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw std::runtime_error("matrix is not positive definite");
  return llt.matrixL().solve(v).norm();
}

double bonus(const EstimatorState& state, const Vector& x) {
  return confidence_radius(state).beta * inverse_norm(state.H, x);
}

std::vector<double> optimistic_utilities(const EstimatorState& state,
                                         const FeatureMatrix& features) {
  const Eigen::LLT<Matrix> llt(state.H);
  if (llt.info() != Eigen::Success) throw std::runtime_error("H is not positive definite");
  const double beta = confidence_radius(state).beta;
  // Solving L Z = X^T for all items at once gives ||x_i||_{H^{-1}} = ||Z_i||.
  const Matrix z = llt.matrixL().solve(features.matrix().transpose());
  const Vector mean = features.matrix() * state.w;
  std::vector<double> alpha(features.items());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    alpha[i] = mean[col] + beta * z.col(col).norm();
  }
  return alpha;
}

}  // namespace mnl
