#pragma once

#include <random>
#include <string>
#include <vector>

#include "vecgee/dataset.hpp"
#include "vecgee/marginal.hpp"

namespace fixtures {

inline vecgee::FormulaTerm term(std::string coefficient, std::string covariate = "intercept") {
  return {std::move(coefficient), std::move(covariate), std::nullopt};
}

inline vecgee::ComponentSpec component(std::string name, vecgee::LinkFamily link,
                                       vecgee::VarianceFamily variance,
                                       vecgee::DispersionMode dispersion, int group,
                                       std::vector<vecgee::FormulaTerm> terms) {
  return {name, name, {link, variance, dispersion, group}, std::move(terms)};
}

/// Gaussian y1 on (1, x1) and binary y2 on (1, x2) with correlated noise.
struct MixedInstance {
  vecgee::VectorGlmModel model;
  vecgee::Dataset data;
};

inline MixedInstance mixed_instance(std::uint64_t seed, std::size_t n = 50) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), 2);
  vecgee::CovariateTable x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double x1 = z(gen);
    const double x2 = z(gen);
    const double shared = z(gen);
    y(i, 0) = 1.0 + 0.5 * x1 + shared + 0.5 * z(gen);
    const double p = 1.0 / (1.0 + std::exp(-(-0.3 + 0.8 * x2 + 0.7 * shared)));
    y(i, 1) = u(gen) < p ? 1.0 : 0.0;
    x(i, 0) = x1;
    x(i, 1) = x2;
  }
  using namespace vecgee;
  VectorGlmModel model({
      component("y1", LinkFamily::identity, VarianceFamily::constant, DispersionMode::estimated, 1,
                {term("a0"), term("a1", "x1")}),
      component("y2", LinkFamily::logit, VarianceFamily::bernoulli, DispersionMode::fixed_at_one,
                2, {term("c0"), term("c1", "x2")}),
  });
  return {std::move(model), make_dataset({"y1", "y2"}, y, {"x1", "x2"}, x)};
}

}  // namespace fixtures
