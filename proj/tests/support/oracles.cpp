#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_odds_ratio(double p11, double a, double b) {
  const double p10 = a - p11;
  const double p01 = b - p11;
  const double p00 = 1.0 - a - b + p11;
  return std::log(p11) + std::log(p00) - std::log(p10) - std::log(p01);
}

double p11_bisection(double gamma, double a, double b) {
  double lo = std::max(0.0, a + b - 1.0);
  double hi = std::min(a, b);
  // The cross-product ratio increases from 0 to infinity across the interval.
  for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (log_odds_ratio(mid, a, b) < gamma) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                     int max_iterations, double tolerance) {
  const auto n = x.rows();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  if (family == Family::gaussian) return ols(x, y);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w(n);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double eta = x.row(i).dot(beta);
      double mu = 0.0;
      double var = 0.0;
      if (family == Family::logistic) {
        mu = expit(eta);
        var = mu * (1.0 - mu);
      } else {
        mu = std::exp(eta);
        var = mu;
      }
      // Canonical link: d mu / d eta equals the variance.
      w(i) = var;
      z(i) = eta + (y(i) - mu) / var;
    }
    const Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd xtwz = x.transpose() * w.asDiagonal() * z;
    const Eigen::VectorXd next = xtwx.ldlt().solve(xtwz);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < tolerance) break;
  }
  return beta;
}

Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtx = x.transpose() * x;
  return xtx.ldlt().solve(x.transpose() * y);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

double variance(const std::vector<double>& v) { return covariance(v, v); }

bool inside_ellipse(const Eigen::Vector2d& point, const Eigen::Vector2d& centre,
                    const Eigen::Matrix2d& v, double n, double crit) {
  const Eigen::Vector2d d = point - centre;
  const double det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
  const double q = (v(1, 1) * d(0) * d(0) - 2.0 * v(0, 1) * d(0) * d(1) + v(0, 0) * d(1) * d(1)) / det;
  return n / 2.0 * q <= crit;
}

}  // namespace oracle
