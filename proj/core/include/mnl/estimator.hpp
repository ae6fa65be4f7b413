#pragma once

// Online mirror-descent estimator for the MNL parameter.
//
// Each round costs one gradient, one Hessian and one d x d SPD solve, so the
// per-round work is independent of how many rounds have been seen:
//
//   H~_t    = H_t + eta * G_t(w_t)
//   w'      = w_t - eta * H~_t^{-1} grad l_t(w_t)
//   w_{t+1} = argmin_{||w|| <= 1} ||w - w'||_{H~_t}
//   H_{t+1} = H_t + G_t(w_{t+1})
//
// with G_t the loss Hessian. The confidence radius beta_t(delta) uses
// explicit constants, so coverage of the true parameter can be checked in
// simulation.

#include <cstddef>

#include "mnl/choice_model.hpp"

namespace mnl {

struct EstimatorState {
  Vector w;
  Matrix H;
  std::size_t t = 1;
  double eta = 0.0;
  double lambda = 0.0;
  double delta = 0.05;
  std::size_t k_max = 1;
  /// Multiplies the theoretical radius; 1.0 keeps the explicit constants.
  double beta_scale = 1.0;

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(w.size()); }
};

struct ConfidenceRadius {
  double beta = 0.0;
};

/// eta = ln(K+1)/2 + 2 and lambda = 84 sqrt(2) d eta.
double default_step_size(std::size_t k_max);
double default_regularizer(std::size_t d, std::size_t k_max);

/// Fresh state: w = 0, H = lambda I, t = 1. Throws std::domain_error on
/// d = 0, K = 0, or delta outside (0, 1].
EstimatorState init_estimator(std::size_t d, std::size_t k_max, double delta,
                              double beta_scale = 1.0);

/// One online update from the round's observation. Throws std::runtime_error
/// if H~ fails to factor, which means the state invariants were broken.
EstimatorState step(const EstimatorState& state, const Assortment& assortment,
                    const FeatureMatrix& features, const ChoiceFeedback& feedback, double v0);

/// Same update against an arbitrary target vector y aligned with the
/// assortment. step() calls this with the one-hot observation.
EstimatorState step_with_target(const EstimatorState& state, const Assortment& assortment,
                                const FeatureMatrix& features, std::span<const double> target,
                                double v0);

/// Unscaled beta_t(delta) from the explicit constants.
double theoretical_radius(std::size_t t, std::size_t d, std::size_t k_max, double delta,
                          double eta, double lambda);

/// beta_scale * theoretical_radius for the state's round.
ConfidenceRadius confidence_radius(const EstimatorState& state);

/// ||w_t - w_star||_{H_t} <= beta_t(delta).
bool in_confidence_set(const EstimatorState& state, const Vector& w_star);

/// ||v||_{H^{-1}} via Cholesky of H.
double inverse_norm(const Matrix& H, const Vector& v);

/// beta_t(delta) ||x||_{H_t^{-1}}.
double bonus(const EstimatorState& state, const Vector& x);

/// Optimistic utilities x_i.w_t + bonus(x_i) for every row, sharing one
/// factorization of H_t.
std::vector<double> optimistic_utilities(const EstimatorState& state,
                                         const FeatureMatrix& features);

}  // namespace mnl
