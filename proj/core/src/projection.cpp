#include "mnl/projection.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace mnl {

BallProjection project_ball_with_multiplier(const Vector& w_prime, const Matrix& metric) {
  if (metric.rows() != w_prime.size() || metric.cols() != w_prime.size()) {
    throw std::invalid_argument("projection metric has wrong shape");
  }
  if (w_prime.norm() <= 1.0) return {w_prime, 0.0};

  Eigen::SelfAdjointEigenSolver<Matrix> eig(metric);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::domain_error("projection metric is not positive definite");
  }
  const Vector& lambda = eig.eigenvalues();
  const Vector coeff = eig.eigenvectors().transpose() * w_prime;

  // ||w(mu)||^2 = sum_i (lambda_i c_i / (lambda_i + mu))^2 strictly decreases in mu.
  auto norm_at = [&](double mu) {
    return (lambda.array() * coeff.array() / (lambda.array() + mu)).matrix().norm();
  };

  double lo = 0.0;
  double hi = lambda.maxCoeff() * w_prime.norm();
  while (norm_at(hi) > 1.0) hi *= 2.0;

  // Newton on the secular equation 1/||w(mu)|| - 1 = 0 (concave, nearly
  // linear in mu), safeguarded by the bracket.
  double mu = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::ArrayXd scaled = lambda.array() * coeff.array() / (lambda.array() + mu);
    const double norm = std::sqrt(scaled.square().sum());
    if (norm > 1.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    if (norm == 1.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    // d||w||/dmu = -(sum scaled_i^2 / (lambda_i + mu)) / ||w||
    const double dnorm = -(scaled.square() / (lambda.array() + mu)).sum() / norm;
    const double f = 1.0 / norm - 1.0;
    const double df = -dnorm / (norm * norm);
    double next = mu - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == mu) break;
    mu = next;
  }

  const Vector w = eig.eigenvectors() *
                   (lambda.array() * coeff.array() / (lambda.array() + mu)).matrix();
  return {w, mu};
}

}  // namespace mnl
