#pragma once

// Working correlation models for the components of one response vector and
// the working covariance W = Sigma^{1/2} R Sigma^{1/2} they induce.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vecgee/dataset.hpp"

namespace vecgee {

enum class DependenceKind { independence, fixed, unstructured, odds_ratio };

std::string_view to_string(DependenceKind kind);
DependenceKind parse_dependence(std::string_view name);

struct WorkingDependence {
  DependenceKind kind = DependenceKind::independence;
  Eigen::MatrixXd fixed;  // only for DependenceKind::fixed

  static WorkingDependence independence() { return {}; }
  static WorkingDependence unstructured() { return {DependenceKind::unstructured, {}}; }
  static WorkingDependence odds_ratio() { return {DependenceKind::odds_ratio, {}}; }
  static WorkingDependence fixed_matrix(Eigen::MatrixXd r) {
    return {DependenceKind::fixed, std::move(r)};
  }
};

/// Off-diagonal clamp applied to estimated correlations.
inline constexpr double kCorrelationClamp = 0.99;
/// Eigenvalue floor used when repairing an indefinite correlation matrix.
inline constexpr double kEigenFloor = 1e-6;
/// Bracket for the log odds ratio search.
inline constexpr double kGammaBound = 30.0;

/// Throws ConfigurationError unless r is a symmetric, unit-diagonal,
/// positive-definite matrix with off-diagonals in (-1, 1).
void validate_correlation(const Eigen::MatrixXd& r);

/// Floors eigenvalues at kEigenFloor and rescales back to unit diagonal.
/// Matrices already above the floor are returned unchanged.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& r);

/// W_kk' = sigma_k sigma_k' R_kk'. Throws DegenerateVarianceError on a
/// nonpositive variance.
Eigen::MatrixXd assemble_working_covariance(const Eigen::VectorXd& variances,
                                            const Eigen::MatrixXd& r);

/// Joint success probability of two binary variables with margins mu_l, mu_r
/// and log odds ratio gamma: the root of
///   p (1 - mu_l - mu_r + p) = (mu_l - p)(mu_r - p) e^gamma
/// lying in the Frechet interval (max(0, mu_l + mu_r - 1), min(mu_l, mu_r)).
double solve_p11(double gamma, double mu_l, double mu_r);

/// Correlation between the two binaries implied by solve_p11.
double odds_ratio_correlation(double gamma, double mu_l, double mu_r);

/// Moment estimate of an unstructured correlation matrix from standardized
/// residuals e_ik = (y_ik - mu_ik) / sigma_ik. Each off-diagonal averages over
/// observations where both components are present, is clamped to +-0.99, and
/// the result is repaired to positive definite.
Eigen::MatrixXd estimate_unstructured(const Eigen::MatrixXd& standardized,
                                      const ObservedMask& observed);

struct GammaEstimate {
  double gamma = 0.0;
  bool saturated = false;  // empirical co-occurrence outside the attainable range
};

/// Solves mean_i p11(gamma; mu_i1, mu_i2) = mean_i y_i1 y_i2 for gamma in
/// [-30, 30]. Responses may be binary or proportions in [0, 1].
GammaEstimate estimate_gamma(std::span<const double> y1, std::span<const double> y2,
                             std::span<const double> mu1, std::span<const double> mu2);

struct PairwiseGamma {
  Eigen::MatrixXd gamma;  // K x K symmetric, zero diagonal
  std::vector<std::pair<std::size_t, std::size_t>> saturated;
};

/// estimate_gamma for every unordered component pair, using observations
/// where both components are present.
PairwiseGamma estimate_pairwise_gamma(const Eigen::MatrixXd& responses,
                                      const Eigen::MatrixXd& fitted,
                                      const ObservedMask& observed);

}  // namespace vecgee
