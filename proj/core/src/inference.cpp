#include "vecgee/inference.hpp"

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "linalg.hpp"
#include "vecgee/errors.hpp"

namespace vecgee {

std::string_view to_string(VarianceChoice choice) {
  return choice == VarianceChoice::naive ? "naive" : "sandwich";
}

VarianceChoice parse_variance_choice(std::string_view name) {
  if (name == "naive" || name == "unadjusted" || name == "model") return VarianceChoice::naive;
  if (name == "sandwich" || name == "adjusted" || name == "robust") return VarianceChoice::sandwich;
  throw ConfigurationError("unknown variance estimator '" + std::string(name) + "'");
}

Eigen::MatrixXd naive_vcov(const Eigen::MatrixXd& bread_sum, std::size_t n,
                           std::span<const std::string> slot_names) {
  const auto p = bread_sum.rows();
  const Eigen::MatrixXd inv =
      detail::spd_solve(bread_sum, Eigen::MatrixXd::Identity(p, p), slot_names);
  return detail::symmetrize(static_cast<double>(n) * inv);
}

Eigen::MatrixXd sandwich_vcov(const Eigen::MatrixXd& bread_sum, const Eigen::MatrixXd& meat_sum,
                              std::size_t n, std::span<const std::string> slot_names) {
  const auto p = bread_sum.rows();
  const Eigen::MatrixXd inv =
      detail::spd_solve(bread_sum, Eigen::MatrixXd::Identity(p, p), slot_names);
  return detail::symmetrize(static_cast<double>(n) * inv * meat_sum * inv);
}

double f_upper_tail(double f, double df1, double df2) {
  if (!(f > 0.0)) return 1.0;
  const boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

double f_critical(double alpha, double df1, double df2) {
  const boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double t_lower_tail(double t, double df) {
  const boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(dist, t);
}

HypothesisTest wald_f_test(const Eigen::MatrixXd& contrast, const Eigen::VectorXd& delta,
                           const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov,
                           std::size_t n, std::size_t p) {
  const auto r = contrast.rows();
  if (r == 0 || contrast.cols() != beta.size()) {
    throw ContrastError("contrast matrix must have one column per coefficient (" +
                        std::to_string(beta.size()) + ")");
  }
  if (delta.size() != r) throw ContrastError("delta must have one entry per contrast row");
  if (vcov.rows() != beta.size() || vcov.cols() != beta.size()) {
    throw ContrastError("covariance dimension does not match coefficients");
  }
  if (n <= p) throw InsufficientDataError("F test needs n > p");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(contrast);
  if (lu.rank() < r) throw ContrastError("contrast matrix is not of full row rank");

  const Eigen::VectorXd diff = contrast * beta - delta;
  const Eigen::MatrixXd middle = contrast * vcov * contrast.transpose();
  Eigen::VectorXd solved;
  try {
    solved = detail::spd_solve(middle, diff);
  } catch (const RankDeficiencyError&) {
    throw ContrastError("M V M^T is singular for this contrast");
  }

  HypothesisTest test;
  test.contrast = contrast;
  test.delta = delta;
  test.df1 = static_cast<int>(r);
  test.df2 = static_cast<int>(n - p);
  test.f = static_cast<double>(n) / static_cast<double>(r) * diff.dot(solved);
  test.p_value = f_upper_tail(test.f, test.df1, test.df2);
  return test;
}

std::vector<CoefficientRow> coefficient_table(const std::vector<std::string>& names,
                                              const Eigen::VectorXd& beta,
                                              const Eigen::MatrixXd& naive,
                                              const Eigen::MatrixXd& sandwich,
                                              std::size_t n, std::size_t p) {
  const double nd = static_cast<double>(n);
  const double df = static_cast<double>(n) - static_cast<double>(p);
  std::vector<CoefficientRow> rows;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    CoefficientRow row;
    row.name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                          : "b" + std::to_string(j);
    row.estimate = beta(j);
    row.naive_se = std::sqrt(naive(j, j) / nd);
    row.adjusted_se = std::sqrt(sandwich(j, j) / nd);
    row.adjusted_z = row.adjusted_se > 0.0 ? row.estimate / row.adjusted_se : 0.0;
    row.p_value = df > 0.0 ? 2.0 * t_lower_tail(-std::abs(row.adjusted_z), df) : 1.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vecgee
