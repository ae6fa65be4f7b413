#include "oracles.hpp"

#include <cmath>

namespace oracle {

std::vector<double> naive_probabilities(const std::vector<double>& utilities, double v0) {
  double den = v0;
  for (double u : utilities) den += std::exp(u);
  std::vector<double> p;
  for (double u : utilities) p.push_back(std::exp(u) / den);
  p.push_back(v0 / den);
  return p;
}

double naive_revenue(const std::vector<double>& utilities, const std::vector<double>& rewards,
                     const std::vector<std::size_t>& set, double v0) {
  double num = 0.0;
  double den = v0;
  for (std::size_t i : set) {
    num += std::exp(utilities[i]) * rewards[i];
    den += std::exp(utilities[i]);
  }
  return num / den;
}

Best enumerate_best(const std::vector<double>& utilities, const std::vector<double>& rewards,
                    double v0, std::size_t k) {
  Best best;
  std::vector<std::size_t> set;
  std::function<void(std::size_t)> visit = [&](std::size_t from) {
    for (std::size_t i = from; i < utilities.size(); ++i) {
      set.push_back(i);
      const double r = naive_revenue(utilities, rewards, set, v0);
      if (r > best.revenue) best = {set, r};
      if (set.size() < k) visit(i + 1);
      set.pop_back();
    }
  };
  visit(0);
  return best;
}

Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                        double h) {
  Vector g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Vector a = w;
    Vector b = w;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Matrix central_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& w,
                        double h) {
  Matrix jac(w.size(), w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Vector a = w;
    Vector b = w;
    a[j] += h;
    b[j] -= h;
    jac.col(j) = (f(a) - f(b)) / (2 * h);
  }
  return jac;
}

Vector random_ball(mnl::Rng& rng, std::size_t d, double radius) {
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = mnl::standard_normal(rng);
  return v.normalized() * radius * std::pow(mnl::uniform01(rng), 1.0 / static_cast<double>(d));
}

Matrix random_rows(mnl::Rng& rng, std::size_t n, std::size_t d) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = random_ball(rng, d, 1.0).transpose();
  return m;
}

}  // namespace oracle
