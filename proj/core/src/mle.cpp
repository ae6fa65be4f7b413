#include "mnl/mle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "mnl/projection.hpp"

namespace mnl {

void ChoiceHistory::append(const Matrix& offered, const ChoiceFeedback& feedback) {
  if (static_cast<std::size_t>(offered.cols()) != d_) {
    throw std::invalid_argument("observation dimension does not match the history");
  }
  const std::size_t n = static_cast<std::size_t>(offered.rows());
  if (!feedback.outside() && feedback.chosen >= n) {
    throw std::out_of_range("chosen position outside the offered set");
  }
  const std::size_t base = total_rows();
  for (Eigen::Index i = 0; i < offered.rows(); ++i) {
    for (Eigen::Index j = 0; j < offered.cols(); ++j) data_.push_back(offered(i, j));
  }
  offsets_.push_back(base + n);
  chosen_.push_back(feedback.outside() ? -1 : static_cast<std::int64_t>(base + feedback.chosen));
}

void ChoiceHistory::append(const Assortment& assortment, const FeatureMatrix& features,
                           const ChoiceFeedback& feedback) {
  Matrix offered(static_cast<Eigen::Index>(assortment.size()),
                 static_cast<Eigen::Index>(features.dim()));
  for (std::size_t k = 0; k < assortment.size(); ++k) {
    offered.row(static_cast<Eigen::Index>(k)) = features.row(assortment[k]);
  }
  append(offered, feedback);
}

namespace {

// Objective, gradient and Hessian of the regularized negative log-likelihood
// over the stacked history, in one sweep over the rows. Scratch buffers are
// reused across evaluations.
class Objective {
 public:
  Objective(const ChoiceHistory& history, double v0, double lambda0)
      : h_(history),
        x_(history.rows()),
        d_(static_cast<Eigen::Index>(history.dim())),
        log_v0_(std::log(v0)),
        lambda0_(lambda0) {}

  double value(const Vector& w) { return sweep(w, nullptr, nullptr); }

  double value_grad_hess(const Vector& w, Vector& grad, Matrix& hess) {
    return sweep(w, &grad, &hess);
  }

 private:
  double sweep(const Vector& w, Vector* grad, Matrix* hess) {
    const std::size_t rounds = h_.rounds();
    u_.noalias() = x_ * w;
    // Without overflow risk one vectorized exp covers the whole history;
    // otherwise each round is shifted by its own maximum.
    const bool shifted = u_.cwiseAbs().maxCoeff() > 300.0;
    if (!shifted) p_ = u_.array().exp();
    else p_.resize(u_.size());
    double total = 0.5 * lambda0_ * w.squaredNorm();
    for (std::size_t s = 0; s < rounds; ++s) {
      const auto lo = static_cast<Eigen::Index>(h_.offset(s));
      const auto hi = static_cast<Eigen::Index>(h_.offset(s + 1));
      const std::int64_t c = h_.chosen_row(s);
      const double chosen_utility = c >= 0 ? u_[c] : log_v0_;
      double shift = 0.0;
      if (shifted) {
        shift = log_v0_;
        for (Eigen::Index i = lo; i < hi; ++i) shift = std::max(shift, u_[i]);
        for (Eigen::Index i = lo; i < hi; ++i) p_[i] = std::exp(u_[i] - shift);
      }
      double partition = std::exp(log_v0_ - shift);
      for (Eigen::Index i = lo; i < hi; ++i) partition += p_[i];
      const double inv = 1.0 / partition;
      for (Eigen::Index i = lo; i < hi; ++i) p_[i] *= inv;
      total += shift + std::log(partition) - chosen_utility;
    }
    if (grad == nullptr) return total;

    // Gradient sum_s X_s^T (p_s - y_s) and Hessian
    // sum_s [X_s^T diag(p_s) X_s - m_s m_s^T], m_s = X_s^T p_s, in one pass
    // over the row-major buffer. Only the lower triangle is accumulated.
    const auto d = static_cast<std::size_t>(d_);
    acc_.assign(d * d, 0.0);
    grad_acc_.assign(d, 0.0);
    mean_.assign(d, 0.0);
    double* a = acc_.data();
    double* g = grad_acc_.data();
    double* m = mean_.data();
    const double* x = x_.data();
    for (std::size_t s = 0; s < rounds; ++s) {
      std::fill(m, m + d, 0.0);
      for (std::size_t i = h_.offset(s); i < h_.offset(s + 1); ++i) {
        const double pi = p_[static_cast<Eigen::Index>(i)];
        const double* xi = x + i * d;
        for (std::size_t j = 0; j < d; ++j) {
          const double pxj = pi * xi[j];
          m[j] += pxj;
          for (std::size_t k = 0; k <= j; ++k) a[j * d + k] += pxj * xi[k];
        }
      }
      for (std::size_t j = 0; j < d; ++j) {
        g[j] += m[j];
        for (std::size_t k = 0; k <= j; ++k) a[j * d + k] -= m[j] * m[k];
      }
      const std::int64_t c = h_.chosen_row(s);
      if (c >= 0) {
        const double* xc = x + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j) g[j] -= xc[j];
      }
    }
    *grad = lambda0_ * w;
    *hess = lambda0_ * Matrix::Identity(d_, d_);
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      (*grad)[jj] += g[j];
      for (std::size_t k = 0; k <= j; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        (*hess)(jj, kk) += a[j * d + k];
        if (k != j) (*hess)(kk, jj) = (*hess)(jj, kk);
      }
    }
    return total;
  }

  const ChoiceHistory& h_;
  ChoiceHistory::RowMap x_;
  Eigen::Index d_;
  double log_v0_;
  double lambda0_;
  Vector u_;
  Vector p_;
  std::vector<double> acc_;
  std::vector<double> grad_acc_;
  std::vector<double> mean_;
};

}  // namespace

namespace {

void check_fit_inputs(const ChoiceHistory& history, double v0, double lambda0,
                      const Vector& start) {
  if (history.empty()) throw std::invalid_argument("MLE needs at least one observation");
  if (!(v0 > 0.0)) throw std::domain_error("v0 must be positive");
  if (!(lambda0 > 0.0)) throw std::domain_error("lambda0 must be positive");
  if (static_cast<std::size_t>(start.size()) != history.dim()) {
    throw std::invalid_argument("start point dimension does not match the history");
  }
}

MleResult newton(Objective& objective, FitPoint point, const MleOptions& options) {
  MleResult result;
  Vector grad_c;
  Matrix hess_c;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!std::isfinite(point.value) || !point.grad.allFinite()) break;
    if (point.grad.norm() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    const Eigen::LLT<Matrix> llt(point.hess);
    if (llt.info() != Eigen::Success) break;
    const Vector direction = -llt.solve(point.grad);
    const double slope = point.grad.dot(direction);

    // Relative slack lets full Newton steps through once the decrease is
    // below the rounding noise of a sum over the whole history.
    const double slack = 1e-12 * std::abs(point.value);
    double step = 1.0;
    Vector candidate = point.w + direction;
    // The full step is usually accepted, so evaluate everything there at once.
    double f_c = objective.value_grad_hess(candidate, grad_c, hess_c);
    bool derivatives_current = true;
    auto sufficient = [&] { return f_c <= point.value + 1e-4 * step * slope + slack; };
    for (int halving = 0; halving < 40 && !sufficient(); ++halving) {
      step *= 0.5;
      candidate = point.w + step * direction;
      f_c = objective.value(candidate);
      derivatives_current = false;
    }
    ++result.iterations;
    if (!sufficient()) break;
    point.w = std::move(candidate);
    if (derivatives_current) {
      point.value = f_c;
      std::swap(point.grad, grad_c);
      std::swap(point.hess, hess_c);
    } else {
      point.value = objective.value_grad_hess(point.w, point.grad, point.hess);
    }
  }
  if (!result.converged && std::isfinite(point.value) && point.grad.allFinite() &&
      point.grad.norm() < options.gradient_tolerance) {
    result.converged = true;
  }

  const auto d = point.w.size();
  result.w_unprojected = point.w;
  result.w = point.w.allFinite() ? project_ball(point.w, Matrix::Identity(d, d)) : point.w;
  result.last = std::move(point);
  return result;
}

}  // namespace

MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0, const Vector& start,
                  const MleOptions& options) {
  check_fit_inputs(history, v0, lambda0, start);
  Objective objective(history, v0, lambda0);
  FitPoint point;
  point.w = start;
  point.value = objective.value_grad_hess(point.w, point.grad, point.hess);
  return newton(objective, std::move(point), options);
}

MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0, FitPoint start,
                  const MleOptions& options) {
  check_fit_inputs(history, v0, lambda0, start.w);
  const auto d = start.w.size();
  if (start.grad.size() != d || start.hess.rows() != d || start.hess.cols() != d) {
    throw std::invalid_argument("start point derivatives have the wrong shape");
  }
  Objective objective(history, v0, lambda0);
  return newton(objective, std::move(start), options);
}

MleResult mle_fit(const ChoiceHistory& history, double v0, double lambda0) {
  if (history.empty()) throw std::invalid_argument("MLE needs at least one observation");
  return mle_fit(history, v0, lambda0, Vector::Zero(static_cast<Eigen::Index>(history.dim())));
}

BaselineState init_baseline(std::size_t d, double lambda0) {
  if (d == 0) throw std::domain_error("dimension must be positive");
  if (!(lambda0 > 0.0)) throw std::domain_error("lambda0 must be positive");
  BaselineState s;
  const auto n = static_cast<Eigen::Index>(d);
  s.w_hat = Vector::Zero(n);
  // The empty-history objective lambda0 ||w||^2 / 2 at the origin.
  s.warm_start.w = Vector::Zero(n);
  s.warm_start.value = 0.0;
  s.warm_start.grad = Vector::Zero(n);
  s.warm_start.hess = lambda0 * Matrix::Identity(n, n);
  s.V = lambda0 * Matrix::Identity(n, n);
  s.history = ChoiceHistory(d);
  s.lambda0 = lambda0;
  return s;
}

void observe(BaselineState& state, const Assortment& assortment, const FeatureMatrix& features,
             const ChoiceFeedback& feedback, double v0) {
  for (std::size_t i : assortment) {
    const Vector x = features.row(i).transpose();
    state.V.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  state.V.triangularView<Eigen::StrictlyUpper>() = state.V.transpose();
  state.history.append(assortment, features, feedback);

  // Extend the cached objective at the warm start by the new round's terms.
  FitPoint start = state.warm_start;
  start.value += mnl_loss(start.w, assortment, features, feedback, v0);
  start.grad += loss_gradient(start.w, assortment, features, feedback, v0);
  start.hess += loss_hessian(start.w, assortment, features, v0);

  MleResult fit = mle_fit(state.history, v0, state.lambda0, std::move(start));
  state.last_fit_flagged = !fit.converged || !fit.w.allFinite();
  if (!state.last_fit_flagged) {
    state.w_hat = fit.w;
    state.warm_start = std::move(fit.last);
  } else {
    // Keep w_hat; re-anchor the cache on the history that now includes this round.
    Objective objective(state.history, v0, state.lambda0);
    FitPoint& p = state.warm_start;
    p.value = objective.value_grad_hess(p.w, p.grad, p.hess);
  }
}

}  // namespace mnl
