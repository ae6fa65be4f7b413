#pragma once

#include "mnl/choice_model.hpp"

namespace mnl {

struct BallProjection {
  Vector w;
  /// KKT multiplier of the constraint ||w|| <= 1; zero when w' was feasible.
  double multiplier = 0.0;
};

/// argmin_{||w|| <= 1} (w - w')^T M (w - w') for a symmetric positive-definite
/// metric M. Infeasible points are handled by solving M(w - w') + mu w = 0,
/// ||w|| = 1 for mu > 0 in the eigenbasis of M.
BallProjection project_ball_with_multiplier(const Vector& w_prime, const Matrix& metric);

inline Vector project_ball(const Vector& w_prime, const Matrix& metric) {
  return project_ball_with_multiplier(w_prime, metric).w;
}

}  // namespace mnl
