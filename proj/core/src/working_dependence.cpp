#include "vecgee/working_dependence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vecgee/errors.hpp"

namespace vecgee {

std::string_view to_string(DependenceKind kind) {
  switch (kind) {
    case DependenceKind::independence: return "independence";
    case DependenceKind::fixed: return "fixed";
    case DependenceKind::unstructured: return "unstructured";
    case DependenceKind::odds_ratio: return "odds_ratio";
  }
  return "?";
}

DependenceKind parse_dependence(std::string_view name) {
  if (name == "independence") return DependenceKind::independence;
  if (name == "fixed") return DependenceKind::fixed;
  if (name == "unstructured" || name == "unspecified") return DependenceKind::unstructured;
  if (name == "odds_ratio") return DependenceKind::odds_ratio;
  throw ConfigurationError("unknown working dependence '" + std::string(name) + "'");
}

void validate_correlation(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols() || r.rows() == 0) {
    throw ConfigurationError("correlation matrix must be square and nonempty");
  }
  for (Eigen::Index a = 0; a < r.rows(); ++a) {
    if (r(a, a) != 1.0) throw ConfigurationError("correlation diagonal must be 1");
    for (Eigen::Index b = 0; b < a; ++b) {
      if (r(a, b) != r(b, a)) throw ConfigurationError("correlation matrix not symmetric");
      if (!(std::abs(r(a, b)) < 1.0)) {
        throw ConfigurationError("correlation off-diagonal outside (-1, 1)");
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw ConfigurationError("correlation matrix is not positive definite");
  }
}

Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  if (eig.eigenvalues().minCoeff() >= kEigenFloor) return r;
  const Eigen::VectorXd floored = eig.eigenvalues().cwiseMax(kEigenFloor);
  Eigen::MatrixXd m = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd s = m.diagonal().cwiseSqrt().cwiseInverse();
  m = s.asDiagonal() * m * s.asDiagonal();
  m = 0.5 * (m + m.transpose());
  m.diagonal().setOnes();
  return m;
}

Eigen::MatrixXd assemble_working_covariance(const Eigen::VectorXd& variances,
                                            const Eigen::MatrixXd& r) {
  if (r.rows() != variances.size() || r.cols() != variances.size()) {
    throw ConfigurationError("correlation and variance dimensions differ");
  }
  for (Eigen::Index k = 0; k < variances.size(); ++k) {
    if (!(variances(k) > 0.0) || !std::isfinite(variances(k))) {
      throw DegenerateVarianceError("working variance of component " +
                                    std::to_string(k) + " is not positive");
    }
  }
  const Eigen::VectorXd sd = variances.cwiseSqrt();
  Eigen::MatrixXd w = sd.asDiagonal() * r * sd.asDiagonal();
  w.diagonal() = variances;
  return w;
}

double solve_p11(double gamma, double mu_l, double mu_r) {
  if (!(mu_l > 0.0 && mu_l < 1.0 && mu_r > 0.0 && mu_r < 1.0)) {
    throw DomainError("odds-ratio margins must lie in (0, 1)");
  }
  if (!std::isfinite(gamma)) throw DomainError("log odds ratio is not finite");
  if (gamma == 0.0) return mu_l * mu_r;

  const double lo = std::max(0.0, mu_l + mu_r - 1.0);
  const double hi = std::min(mu_l, mu_r);

  // (1 - e^g) p^2 + (1 - mu_l - mu_r + e^g (mu_l + mu_r)) p - e^g mu_l mu_r = 0
  const double eg = std::exp(gamma);
  const double a = -std::expm1(gamma);
  const double b = 1.0 - mu_l - mu_r + eg * (mu_l + mu_r);
  const double c = -eg * mu_l * mu_r;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));

  double roots[2];
  int count = 0;
  if (q != 0.0) roots[count++] = c / q;
  if (a != 0.0) roots[count++] = q / a;

  double best = 0.0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int j = 0; j < count; ++j) {
    const double d = roots[j] < lo ? lo - roots[j] : (roots[j] > hi ? roots[j] - hi : 0.0);
    if (d < best_distance) {
      best_distance = d;
      best = roots[j];
    }
  }
  if (best_distance > 1e-9) {
    throw NumericalError("p11 equation has no root in the Frechet interval");
  }
  return std::clamp(best, lo, hi);
}

double odds_ratio_correlation(double gamma, double mu_l, double mu_r) {
  const double p11 = solve_p11(gamma, mu_l, mu_r);
  return (p11 - mu_l * mu_r) /
         std::sqrt(mu_l * (1.0 - mu_l) * mu_r * (1.0 - mu_r));
}

Eigen::MatrixXd estimate_unstructured(const Eigen::MatrixXd& standardized,
                                      const ObservedMask& observed) {
  const Eigen::Index k_count = standardized.cols();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(k_count, k_count);
  for (Eigen::Index a = 0; a < k_count; ++a) {
    for (Eigen::Index b = 0; b < a; ++b) {
      double sum = 0.0;
      std::size_t pairs = 0;
      for (Eigen::Index i = 0; i < standardized.rows(); ++i) {
        if (observed(i, a) && observed(i, b)) {
          sum += standardized(i, a) * standardized(i, b);
          ++pairs;
        }
      }
      if (pairs == 0) {
        throw InsufficientDataError("components " + std::to_string(b) + " and " +
                                    std::to_string(a) + " are never observed together");
      }
      const double rho = std::clamp(sum / static_cast<double>(pairs),
                                    -kCorrelationClamp, kCorrelationClamp);
      r(a, b) = rho;
      r(b, a) = rho;
    }
  }
  return repair_correlation(r);
}

GammaEstimate estimate_gamma(std::span<const double> y1, std::span<const double> y2,
                             std::span<const double> mu1, std::span<const double> mu2) {
  const std::size_t n = y1.size();
  if (n == 0 || y2.size() != n || mu1.size() != n || mu2.size() != n) {
    throw InsufficientDataError("odds-ratio estimation needs matched, nonempty pairs");
  }
  double target = 0.0;
  for (std::size_t i = 0; i < n; ++i) target += y1[i] * y2[i];
  target /= static_cast<double>(n);

  auto excess = [&](double gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += solve_p11(gamma, mu1[i], mu2[i]);
    return s / static_cast<double>(n) - target;
  };

  if (excess(kGammaBound) <= 0.0) return {kGammaBound, true};
  if (excess(-kGammaBound) >= 0.0) return {-kGammaBound, true};

  double lo = -kGammaBound;
  double hi = kGammaBound;
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = excess(mid);
    if (std::abs(f) <= 1e-12) break;
    if (f > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-13) break;
  }
  return {mid, false};
}

PairwiseGamma estimate_pairwise_gamma(const Eigen::MatrixXd& responses,
                                      const Eigen::MatrixXd& fitted,
                                      const ObservedMask& observed) {
  const Eigen::Index k_count = responses.cols();
  PairwiseGamma out;
  out.gamma = Eigen::MatrixXd::Zero(k_count, k_count);
  std::vector<double> y1, y2, m1, m2;
  for (Eigen::Index a = 0; a < k_count; ++a) {
    for (Eigen::Index b = a + 1; b < k_count; ++b) {
      y1.clear(); y2.clear(); m1.clear(); m2.clear();
      for (Eigen::Index i = 0; i < responses.rows(); ++i) {
        if (!(observed(i, a) && observed(i, b))) continue;
        y1.push_back(responses(i, a));
        y2.push_back(responses(i, b));
        m1.push_back(fitted(i, a));
        m2.push_back(fitted(i, b));
      }
      if (y1.empty()) {
        throw InsufficientDataError("components " + std::to_string(a) + " and " +
                                    std::to_string(b) + " are never observed together");
      }
      const auto est = estimate_gamma(y1, y2, m1, m2);
      out.gamma(a, b) = est.gamma;
      out.gamma(b, a) = est.gamma;
      if (est.saturated) {
        out.saturated.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      }
    }
  }
  return out;
}

}  // namespace vecgee
