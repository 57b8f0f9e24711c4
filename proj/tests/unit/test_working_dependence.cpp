#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vecgee/errors.hpp"
#include "vecgee/working_dependence.hpp"

using namespace vecgee;

namespace {

std::vector<double> grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

}  // namespace

TEST_SUITE("working-dependence") {
  TEST_CASE("p11 at gamma = 0 is the product of the margins") {
    CHECK(solve_p11(0.0, 0.3, 0.6) == 0.3 * 0.6);
    CHECK(odds_ratio_correlation(0.0, 0.3, 0.6) == 0.0);
  }

  TEST_CASE("p11 reproduces the cross-product ratio") {
    for (double g : grid(-6, 6, 13)) {
      for (double a : {0.05, 0.3, 0.5, 0.8}) {
        for (double b : {0.1, 0.45, 0.9}) {
          const double p = solve_p11(g, a, b);
          if (g == 0.0) continue;
          CHECK(oracle::log_odds_ratio(p, a, b) == doctest::Approx(g).epsilon(1e-8));
        }
      }
    }
  }

  TEST_CASE("p11 stays near the Frechet bounds for extreme gamma") {
    CHECK(solve_p11(30.0, 0.3, 0.6) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(solve_p11(-30.0, 0.3, 0.6) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(solve_p11(-30.0, 0.7, 0.6) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK_THROWS_AS(solve_p11(1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(solve_p11(std::nan(""), 0.2, 0.5), DomainError);
  }

  TEST_CASE("odds-ratio correlation has the sign of gamma") {
    for (double g : {-3.0, -0.5, 0.5, 3.0}) {
      const double r = odds_ratio_correlation(g, 0.4, 0.7);
      CHECK(r * g > 0.0);
      CHECK(std::abs(r) < 1.0);
    }
  }

  TEST_CASE("gamma estimate recovers the generating odds ratio from an exact table") {
    // Four observations weighted to reproduce the 2x2 cell probabilities
    // exactly: a population with margins (a, b) and log odds ratio gamma.
    const double gamma = 1.3;
    const double a = 0.35;
    const double b = 0.6;
    const double p11 = oracle::p11_bisection(gamma, a, b);
    const int scale = 200000;
    const int n11 = static_cast<int>(std::lround(p11 * scale));
    const int n10 = static_cast<int>(std::lround((a - p11) * scale));
    const int n01 = static_cast<int>(std::lround((b - p11) * scale));
    const int n00 = scale - n11 - n10 - n01;
    std::vector<double> y1, y2;
    auto push = [&](int count, double v1, double v2) {
      for (int i = 0; i < count; ++i) {
        y1.push_back(v1);
        y2.push_back(v2);
      }
    };
    push(n11, 1, 1);
    push(n10, 1, 0);
    push(n01, 0, 1);
    push(n00, 0, 0);
    const std::vector<double> m1(y1.size(), oracle::mean(y1));
    const std::vector<double> m2(y2.size(), oracle::mean(y2));
    const auto est = estimate_gamma(y1, y2, m1, m2);
    CHECK_FALSE(est.saturated);
    CHECK(est.gamma == doctest::Approx(gamma).epsilon(1e-3));
  }

  TEST_CASE("gamma saturates when co-occurrence is unattainable") {
    const std::vector<double> y1 = {1, 1, 0, 0};
    const std::vector<double> y2 = {1, 1, 0, 0};
    const std::vector<double> mu(4, 0.5);
    const auto up = estimate_gamma(y1, y2, mu, mu);
    CHECK(up.saturated);
    CHECK(up.gamma == kGammaBound);
    const std::vector<double> y3 = {0, 0, 1, 1};
    const auto down = estimate_gamma(y1, y3, mu, mu);
    CHECK(down.saturated);
    CHECK(down.gamma == -kGammaBound);
  }

  TEST_CASE("unstructured estimate matches pairwise averages") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    Eigen::MatrixXd e(200, 3);
    ObservedMask obs = ObservedMask::Constant(200, 3, true);
    for (Eigen::Index i = 0; i < 200; ++i) {
      const double s = z(gen);
      e(i, 0) = 0.6 * s + 0.5 * z(gen);
      e(i, 1) = 0.6 * s + 0.5 * z(gen);
      e(i, 2) = z(gen);
      if (i % 7 == 0) obs(i, 2) = false;
    }
    const Eigen::MatrixXd r = estimate_unstructured(e, obs);
    double s01 = 0.0, s02 = 0.0;
    int n02 = 0;
    for (Eigen::Index i = 0; i < 200; ++i) {
      s01 += e(i, 0) * e(i, 1);
      if (obs(i, 2)) {
        s02 += e(i, 0) * e(i, 2);
        ++n02;
      }
    }
    CHECK(r(0, 1) == doctest::Approx(s01 / 200).epsilon(1e-12));
    CHECK(r(0, 2) == doctest::Approx(s02 / n02).epsilon(1e-12));
    CHECK(r(1, 0) == r(0, 1));
    CHECK(r.diagonal().isOnes());
  }

  TEST_CASE("unstructured estimate clamps and repairs") {
    Eigen::MatrixXd e(4, 2);
    e << 2, 2, -2, -2, 1.5, 1.5, -1.5, -1.5;
    const ObservedMask obs = ObservedMask::Constant(4, 2, true);
    const Eigen::MatrixXd r = estimate_unstructured(e, obs);
    CHECK(r(0, 1) == doctest::Approx(kCorrelationClamp));

    ObservedMask none = obs;
    none.col(1).setConstant(false);
    CHECK_THROWS_AS(estimate_unstructured(e, none), InsufficientDataError);
  }

  TEST_CASE("repair restores positive definiteness with unit diagonal") {
    Eigen::Matrix3d bad;
    bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    const Eigen::MatrixXd fixed = repair_correlation(bad);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fixed);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    for (int k = 0; k < 3; ++k) CHECK(fixed(k, k) == doctest::Approx(1.0));
    Eigen::Matrix2d good;
    good << 1, 0.3, 0.3, 1;
    CHECK(repair_correlation(good) == Eigen::MatrixXd(good));
  }

  TEST_CASE("working covariance assembly") {
    Eigen::Vector2d var(4.0, 9.0);
    Eigen::Matrix2d r;
    r << 1, 0.5, 0.5, 1;
    const Eigen::MatrixXd w = assemble_working_covariance(var, r);
    CHECK(w(0, 0) == doctest::Approx(4.0));
    CHECK(w(0, 1) == doctest::Approx(3.0));
    CHECK(w(1, 1) == doctest::Approx(9.0));
    CHECK_THROWS_AS(assemble_working_covariance(Eigen::Vector2d(1.0, 0.0), r),
                    DegenerateVarianceError);
  }

  TEST_CASE("correlation validation and names") {
    Eigen::Matrix2d r;
    r << 1, 1.2, 1.2, 1;
    CHECK_THROWS_AS(validate_correlation(r), ConfigurationError);
    CHECK(parse_dependence("unspecified") == DependenceKind::unstructured);
    CHECK(parse_dependence(to_string(DependenceKind::odds_ratio)) == DependenceKind::odds_ratio);
    CHECK_THROWS_AS(parse_dependence("ar1"), ConfigurationError);
  }
}
