#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vecgee/errors.hpp"
#include "vecgee/simulation.hpp"

using namespace vecgee;

TEST_SUITE("sim-harness") {
  TEST_CASE("matrix norm error is the maximum absolute column sum") {
    Eigen::Matrix2d a;
    a << 1, 2, 3, 4;
    CHECK(matrix_norm_error(a, Eigen::Matrix2d::Zero()) == 6.0);
    Eigen::Matrix2d b;
    b << 1, -3, 2, 1;
    CHECK(matrix_norm_error(b, Eigen::Matrix2d::Zero()) == 4.0);
    CHECK(matrix_norm_error(a, a) == 0.0);
    Eigen::Matrix2d c;
    c << 2, 0, 0, 3;
    Eigen::Matrix2d d;
    d << 0, 1, -3, 3;
    CHECK(matrix_norm_error(c, d) == 5.0);
    CHECK_THROWS_AS(matrix_norm_error(a, Eigen::Matrix3d::Zero()), ConfigurationError);
  }

  TEST_CASE("type I error rate and its Monte Carlo standard error") {
    const auto r = type_i_error(50, 1000);
    CHECK(r.rate == 0.05);
    CHECK(r.se == doctest::Approx(std::sqrt(0.05 * 0.95 / 1000)));
    CHECK(r.se == doctest::Approx(0.0069).epsilon(0.01));
    CHECK(type_i_error(113, 1000).rate == doctest::Approx(0.113));
    CHECK(type_i_error(0, 0).rate == 0.0);
    CHECK_THROWS_AS(type_i_error(3, 2), ConfigurationError);
  }

  TEST_CASE("synthetic age pool") {
    const auto pool = synthetic_age_pool();
    CHECK(pool.size() == kBurnPoolSize);
    CHECK(pool.front() == doctest::Approx(0.1));
    CHECK(pool.back() == doctest::Approx(90.0));
  }

  TEST_CASE("burn generator reproduces its marginal means") {
    const BurnParameters b;
    CHECK(oracle::expit(b.y2_intercept + b.y2_age * 30.0) == doctest::Approx(0.0779).epsilon(1e-3));
    const auto pool = synthetic_age_pool();
    const auto data = generate_burn_dataset(100000, 5, pool);
    REQUIRE(data.size() == 100000);
    double mean_age = 0.0;
    double mean_mu2 = 0.0;
    double mean_var2 = 0.0;
    for (double a : pool) {
      const double mu = oracle::expit(b.y2_intercept + b.y2_age * a);
      mean_age += a;
      mean_mu2 += mu;
      mean_var2 += mu * (1 - mu);
    }
    mean_age /= pool.size();
    mean_mu2 /= pool.size();
    mean_var2 /= pool.size();
    std::vector<double> y1;
    std::vector<double> y2;
    std::vector<double> resid;
    for (Eigen::Index i = 0; i < 100000; ++i) {
      y1.push_back(data.responses(i, 0));
      y2.push_back(data.responses(i, 1));
      resid.push_back(data.responses(i, 0) - b.y1_intercept - b.y1_age * data.covariates(i, 0));
      REQUIRE((y2.back() == 0.0 || y2.back() == 1.0));
    }
    CHECK(oracle::mean(y2) == doctest::Approx(mean_mu2).epsilon(0.03));
    CHECK(oracle::mean(y1) == doctest::Approx(b.y1_intercept + b.y1_age * mean_age).epsilon(0.005));
    CHECK(oracle::variance(resid) ==
          doctest::Approx(b.y1_sd * b.y1_sd + 25.0 * mean_var2).epsilon(0.03));
    CHECK(oracle::covariance(resid, y2) == doctest::Approx(5.0 * mean_var2).epsilon(0.05));
  }

  TEST_CASE("burn generator without the link term leaves components uncorrelated") {
    const auto data = generate_burn_dataset(50000, 6, synthetic_age_pool(), 0.0);
    std::vector<double> y1;
    std::vector<double> y2;
    for (Eigen::Index i = 0; i < 50000; ++i) {
      y1.push_back(data.responses(i, 0) - 0.0039 * data.covariates(i, 0));
      y2.push_back(data.responses(i, 1));
    }
    CHECK(std::abs(oracle::covariance(y1, y2)) < 0.01);
  }

  TEST_CASE("sorbinil generator layout and support") {
    const auto data = generate_sorbinil_dataset(3);
    REQUIRE(data.size() == 41);
    int groups[2][2] = {{0, 0}, {0, 0}};
    for (Eigen::Index i = 0; i < 41; ++i) {
      ++groups[static_cast<int>(data.covariates(i, 0))][static_cast<int>(data.covariates(i, 1))];
      for (Eigen::Index k = 0; k < 2; ++k) {
        const double v = data.responses(i, k);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v * 8 == std::round(v * 8));
      }
    }
    CHECK(groups[1][1] == 6);
    CHECK(groups[1][0] == 14);
    CHECK(groups[0][1] == 14);
    CHECK(groups[0][0] == 7);
  }

  TEST_CASE("sorbinil generator means and eye exchangeability") {
    std::vector<double> placebo;
    std::vector<double> treated_left;
    std::vector<double> treated_right;
    for (std::uint64_t r = 0; r < 400; ++r) {
      auto rng = SplitMix64::substream(9, r);
      const auto data = generate_sorbinil_dataset(rng, 0.0, {});
      for (Eigen::Index i = 0; i < 41; ++i) {
        for (Eigen::Index k = 0; k < 2; ++k) {
          if (data.covariates(i, k) == 0.0) placebo.push_back(data.responses(i, k));
        }
        if (data.covariates(i, 0) == 1.0) treated_left.push_back(data.responses(i, 0));
        if (data.covariates(i, 1) == 1.0) treated_right.push_back(data.responses(i, 1));
      }
    }
    CHECK(oracle::mean(placebo) == doctest::Approx(0.5752).epsilon(0.01));
    const double treated = oracle::expit(0.303 - 0.444);
    CHECK(oracle::mean(treated_left) == doctest::Approx(treated).epsilon(0.02));
    CHECK(oracle::mean(treated_right) == doctest::Approx(treated).epsilon(0.02));
  }

  TEST_CASE("subject effects induce positive within-subject correlation") {
    std::vector<double> l;
    std::vector<double> r;
    for (std::uint64_t s = 0; s < 200; ++s) {
      auto rng = SplitMix64::substream(10, s);
      const auto data = generate_sorbinil_dataset(rng, 1.0, {});
      for (Eigen::Index i = 0; i < 6; ++i) {
        l.push_back(data.responses(i, 0));
        r.push_back(data.responses(i, 1));
      }
    }
    CHECK(oracle::covariance(l, r) > 0.0);
  }

  TEST_CASE("simulation configs parse, validate and default their working models") {
    const auto c = parse_simulation_config({{"design", "sorbinil"}, {"replicates", 10}});
    CHECK(c.working_models().size() == 3);
    const auto b = parse_simulation_config({{"design", "burn"}, {"working", "unstructured"}});
    CHECK(b.working_models() == std::vector<DependenceKind>{DependenceKind::unstructured});
    CHECK_THROWS_AS(parse_simulation_config({{"replicates", 10}}), ConfigurationError);
    CHECK_THROWS_AS(parse_simulation_config({{"design", "burn"}, {"replicates", 0}}),
                    ConfigurationError);
    CHECK_THROWS_AS(parse_simulation_config({{"design", "burn"}, {"sample_size", 10}}),
                    ConfigurationError);
    CHECK_THROWS_AS(parse_simulation_config({{"design", "other"}}), ConfigurationError);
    CHECK_THROWS_AS(parse_simulation_config({{"design", "burn"}, {"true_vcov", {{1, 0}, {0, 1}}}}),
                    ConfigurationError);
  }

  TEST_CASE("a single replicate yields a complete report") {
    SimulationConfig c;
    c.design = SimulationDesign::burn;
    c.replicates = 1;
    const auto report = run_monte_carlo(c);
    REQUIRE(report.working.size() == 1);
    const auto& w = report.working[0];
    CHECK(w.fitted + w.failures == 1);
    CHECK(report.df1 == 4);
    CHECK(report.df2 == 196);
    CHECK(w.truth.isZero());
    for (const auto& q : w.quantities) CHECK(q.adjusted_sd == 0.0);
    CHECK(report_csv(report).find("independence,failures,") != std::string::npos);
  }

  TEST_CASE("rejection counts grow with the nominal level") {
    SimulationConfig c;
    c.design = SimulationDesign::sorbinil;
    c.replicates = 60;
    c.seed = 4;
    const auto report = run_monte_carlo(c);
    for (const auto& w : report.working) {
      CHECK(w.fitted + w.failures == 60);
      for (std::size_t l = 1; l < kNominalLevels.size(); ++l) {
        CHECK(w.adjusted_type_i[l].rejections >= w.adjusted_type_i[l - 1].rejections);
        CHECK(w.unadjusted_type_i[l].rejections >= w.unadjusted_type_i[l - 1].rejections);
      }
    }
  }

  TEST_CASE("supplied true covariance replaces the empirical truth") {
    SimulationConfig c;
    c.replicates = 5;
    c.true_vcov = Eigen::MatrixXd::Identity(4, 4) * 2.0;
    const auto report = run_monte_carlo(c);
    CHECK(report.working[0].truth.isApprox(*c.true_vcov));
    CHECK(report.working[0].quantities[0].truth == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("reports are identical for any thread count") {
    SimulationConfig c;
    c.design = SimulationDesign::sorbinil;
    c.replicates = 24;
    c.seed = 77;
    c.threads = 1;
    const auto one = run_monte_carlo(c);
    c.threads = 5;
    const auto five = run_monte_carlo(c);
    CHECK(report_csv(one) == report_csv(five));
    CHECK(report_json(one).dump() == report_json(five).dump());
  }
}
