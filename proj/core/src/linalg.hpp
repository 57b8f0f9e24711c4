#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace vecgee::detail {

/// Relative pivot threshold below which a symmetric system is declared rank
/// deficient.
inline constexpr double kRankThreshold = 1e-12;

/// Solves a * x = rhs for symmetric positive-definite a. Falls back once to a
/// 1e-10 relative diagonal jitter when the Cholesky factorization fails, and
/// throws RankDeficiencyError naming the dependent slots when a is singular.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                          std::span<const std::string> slot_names = {});

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace vecgee::detail
