#pragma once

// Model-based and sandwich covariance estimators, Wald-type F tests, the
// per-coefficient summary table, joint confidence regions for coefficient
// pairs, and the plug-in adjustment of externally fitted marginal models.
//
// Every covariance here is on the asymptotic scale of sqrt(n)(beta_hat - beta);
// the covariance of beta_hat itself is the matrix divided by n.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vecgee/marginal.hpp"

namespace vecgee {

struct VarianceEstimate {
  Eigen::MatrixXd naive;
  Eigen::MatrixXd sandwich;
  Eigen::MatrixXd bread;
  Eigen::MatrixXd meat;
  std::size_t n = 0;
};

enum class VarianceChoice { naive, sandwich };

std::string_view to_string(VarianceChoice choice);
VarianceChoice parse_variance_choice(std::string_view name);

/// n * bread^{-1}. Throws RankDeficiencyError for a singular bread.
Eigen::MatrixXd naive_vcov(const Eigen::MatrixXd& bread_sum, std::size_t n,
                           std::span<const std::string> slot_names = {});

/// n * bread^{-1} meat bread^{-1}, symmetrized.
Eigen::MatrixXd sandwich_vcov(const Eigen::MatrixXd& bread_sum, const Eigen::MatrixXd& meat_sum,
                              std::size_t n, std::span<const std::string> slot_names = {});

struct HypothesisTest {
  Eigen::MatrixXd contrast;  // M, r x p
  Eigen::VectorXd delta;
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
};

/// F = (n / r) (M b - delta)^T (M V M^T)^{-1} (M b - delta), referred to the
/// F distribution on (r, n - p) degrees of freedom. Throws ContrastError when
/// M is not of full row rank or M V M^T is singular.
HypothesisTest wald_f_test(const Eigen::MatrixXd& contrast, const Eigen::VectorXd& delta,
                           const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov,
                           std::size_t n, std::size_t p);

/// Upper tail of F(df1, df2).
double f_upper_tail(double f, double df1, double df2);
/// Upper quantile: F such that the upper tail equals alpha.
double f_critical(double alpha, double df1, double df2);
/// P(T <= t) for Student t on df degrees of freedom.
double t_lower_tail(double t, double df);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double naive_se = 0.0;
  double adjusted_se = 0.0;
  double adjusted_z = 0.0;
  double p_value = 1.0;  // two-sided, t on n - p df
};

std::vector<CoefficientRow> coefficient_table(const std::vector<std::string>& names,
                                              const Eigen::VectorXd& beta,
                                              const Eigen::MatrixXd& naive,
                                              const Eigen::MatrixXd& sandwich,
                                              std::size_t n, std::size_t p);

struct RegionGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  int nx = 200;
  int ny = 200;

  double x(int ix) const { return x_min + (x_max - x_min) * ix / (nx - 1); }
  double y(int iy) const { return y_min + (y_max - y_min) * iy / (ny - 1); }
};

/// Rectangle centred on the estimate, wide enough to hold the level region
/// under either covariance with a 25% margin.
RegionGrid default_region_grid(std::size_t first, std::size_t second, double level,
                               const Eigen::VectorXd& beta,
                               const std::vector<Eigen::MatrixXd>& vcovs, std::size_t n,
                               std::size_t p, int resolution = 200);

struct ConfidenceRegion {
  double level = 0.95;
  RegionGrid grid;
  std::vector<std::uint8_t> inside;  // ny x nx, row iy
  std::vector<std::vector<Eigen::Vector2d>> boundary;  // closed polylines
  bool touches_edge = false;

  bool contains(int ix, int iy) const {
    return inside[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid.nx) +
                  static_cast<std::size_t>(ix)] != 0;
  }
};

/// Grid points delta where the joint F test of (beta_first, beta_second) = delta
/// does not reject at 1 - level, plus the marching-squares boundary.
ConfidenceRegion confidence_region(std::size_t first, std::size_t second, double level,
                                   const RegionGrid& grid, const Eigen::VectorXd& beta,
                                   const Eigen::MatrixXd& vcov, std::size_t n, std::size_t p);

/// One observation of an externally fitted model: observed components, their
/// responses and fitted means, design rows, and the fitted working covariance.
struct ExternalObservation {
  std::string id;
  std::vector<std::size_t> components;
  Eigen::VectorXd response;
  Eigen::VectorXd mean;
  Eigen::MatrixXd design;
  Eigen::MatrixXd working;
};

struct ExternalFit {
  std::vector<std::string> component_names;
  std::vector<LinkFamily> links;  // per component
  std::vector<std::string> slot_names;
  std::vector<ExternalObservation> observations;
};

/// Sandwich adjustment of a fit produced elsewhere: D_i from the supplied
/// means through the link derivative, S_i from the responses, W_i as given.
/// No refitting of beta.
VarianceEstimate adjust_external_fit(const ExternalFit& fit);

}  // namespace vecgee
