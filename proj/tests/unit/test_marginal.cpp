#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vecgee/errors.hpp"
#include "vecgee/marginal.hpp"

using namespace vecgee;

TEST_SUITE("marginal") {
  TEST_CASE("logit mean matches expit and is clamped") {
    CHECK(mean_value(LinkFamily::logit, 0.303) == doctest::Approx(oracle::expit(0.303)).epsilon(1e-15));
    CHECK(mean_value(LinkFamily::logit, 0.303) == doctest::Approx(0.5752).epsilon(1e-4));
    CHECK(mean_value(LinkFamily::logit, 800.0) == 1.0 - kMeanClamp);
    CHECK(mean_value(LinkFamily::logit, -800.0) == kMeanClamp);
    CHECK(mean_value(LinkFamily::identity, -2.5) == -2.5);
    CHECK(mean_value(LinkFamily::log, 1.0) == doctest::Approx(std::exp(1.0)));
  }

  TEST_CASE("derivative agrees with central differences") {
    for (auto link : {LinkFamily::identity, LinkFamily::logit, LinkFamily::log}) {
      for (double eta = -4.0; eta <= 4.0; eta += 0.37) {
        const double h = 1e-6;
        const double fd = (mean_value(link, eta + h) - mean_value(link, eta - h)) / (2 * h);
        CHECK(mean_derivative(link, eta) == doctest::Approx(fd).epsilon(1e-7));
        CHECK(mean_derivative_from_mean(link, mean_value(link, eta)) ==
              doctest::Approx(mean_derivative(link, eta)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("logit mean is monotone in eta") {
    double prev = 0.0;
    for (double eta = -20.0; eta <= 20.0; eta += 0.25) {
      const double mu = mean_value(LinkFamily::logit, eta);
      CHECK(mu >= prev);
      prev = mu;
    }
  }

  TEST_CASE("variance families") {
    CHECK(variance_value(VarianceFamily::constant, 12.0) == 1.0);
    CHECK(variance_value(VarianceFamily::bernoulli, 0.25) == doctest::Approx(0.1875));
    CHECK(variance_value(VarianceFamily::proportion, 0.5) == doctest::Approx(0.25));
    CHECK(variance_value(VarianceFamily::poisson, 3.0) == 3.0);
    CHECK(variance_value(VarianceFamily::gamma, 3.0) == 9.0);
    CHECK_THROWS_AS(variance_value(VarianceFamily::bernoulli, 1.0), DomainError);
    CHECK_THROWS_AS(variance_value(VarianceFamily::poisson, 0.0), DomainError);
    CHECK_THROWS_AS(mean_value(LinkFamily::logit, std::nan("")), DomainError);
  }

  TEST_CASE("names round trip") {
    for (auto link : {LinkFamily::identity, LinkFamily::logit, LinkFamily::log}) {
      CHECK(parse_link(to_string(link)) == link);
    }
    for (auto v : {VarianceFamily::constant, VarianceFamily::bernoulli, VarianceFamily::proportion,
                   VarianceFamily::poisson, VarianceFamily::gamma}) {
      CHECK(parse_variance(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_link("probit"), ConfigurationError);
  }

  TEST_CASE("slot layout follows first appearance and sharing") {
    using fixtures::component;
    using fixtures::term;
    const VectorGlmModel model({
        component("l", LinkFamily::logit, VarianceFamily::proportion, DispersionMode::estimated, 1,
                  {term("b0"), term("b1", "tl"), term("b2", "tr")}),
        component("r", LinkFamily::logit, VarianceFamily::proportion, DispersionMode::estimated, 1,
                  {term("b0"), term("b1", "tr"), term("b2", "tl")}),
    });
    CHECK(model.coefficients() == 3);
    CHECK(model.coefficient_names() == std::vector<std::string>{"b0", "b1", "b2"});
    CHECK(model.slots_of(1) == std::vector<std::size_t>{0, 1, 2});
    CHECK(model.dispersion_groups() == 1);
    CHECK(model.covariate_columns() == std::vector<std::string>{"tl", "tr"});

    const std::vector<std::string> names = {"tl", "tr"};
    const std::vector<double> values = {1.0, 0.0};
    const CovariateRecord rec{names, values};
    const Eigen::RowVectorXd left = design_row(model, rec, 0);
    const Eigen::RowVectorXd right = design_row(model, rec, 1);
    CHECK(left == Eigen::RowVector3d(1, 1, 0));
    CHECK(right == Eigen::RowVector3d(1, 0, 1));
  }

  TEST_CASE("indicator terms") {
    using fixtures::component;
    const VectorGlmModel model({
        component("y", LinkFamily::identity, VarianceFamily::constant, DispersionMode::estimated, 1,
                  {fixtures::term("b0"), FormulaTerm{"b1", "group", 2.0}}),
    });
    const std::vector<std::string> names = {"group"};
    std::vector<double> values = {2.0};
    CHECK(design_row(model, CovariateRecord{names, values}, 0)(1) == 1.0);
    values[0] = 3.0;
    CHECK(design_row(model, CovariateRecord{names, values}, 0)(1) == 0.0);
    const std::vector<std::string> other = {"age"};
    CHECK_THROWS_AS(design_row(model, CovariateRecord{other, values}, 0), ConfigurationError);
  }

  TEST_CASE("invalid models are rejected") {
    using fixtures::component;
    using fixtures::term;
    CHECK_THROWS_AS(VectorGlmModel({}), ConfigurationError);
    CHECK_THROWS_AS(VectorGlmModel({component("y", LinkFamily::logit, VarianceFamily::bernoulli,
                                              DispersionMode::estimated, 1, {term("b")})}),
                    ConfigurationError);
    CHECK_THROWS_AS(
        VectorGlmModel({component("a", LinkFamily::identity, VarianceFamily::constant,
                                  DispersionMode::estimated, 1, {term("a0")}),
                        component("b", LinkFamily::logit, VarianceFamily::bernoulli,
                                  DispersionMode::fixed_at_one, 1, {term("b0")})}),
        ConfigurationError);
  }
}
