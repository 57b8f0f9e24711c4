#include "vecgee/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vecgee/errors.hpp"

namespace vecgee {

namespace {

double expit(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

void require_finite(double eta) {
  if (!std::isfinite(eta)) {
    throw DomainError("linear predictor is not finite");
  }
}

}  // namespace

double mean_value(LinkFamily link, double eta) {
  require_finite(eta);
  switch (link) {
    case LinkFamily::identity:
      return eta;
    case LinkFamily::logit:
      return std::clamp(expit(eta), kMeanClamp, 1.0 - kMeanClamp);
    case LinkFamily::log: {
      const double mu = std::exp(eta);
      if (!std::isfinite(mu)) throw DomainError("log-link mean overflows");
      return mu;
    }
  }
  throw DomainError("unknown link");
}

double mean_derivative(LinkFamily link, double eta) {
  require_finite(eta);
  switch (link) {
    case LinkFamily::identity:
      return 1.0;
    case LinkFamily::logit: {
      const double mu = mean_value(link, eta);
      return mu * (1.0 - mu);
    }
    case LinkFamily::log:
      return mean_value(link, eta);
  }
  throw DomainError("unknown link");
}

double mean_derivative_from_mean(LinkFamily link, double mu) {
  if (!std::isfinite(mu)) throw DomainError("fitted mean is not finite");
  switch (link) {
    case LinkFamily::identity:
      return 1.0;
    case LinkFamily::logit: {
      if (mu <= 0.0 || mu >= 1.0) {
        throw DomainError("logit mean outside (0, 1)");
      }
      const double m = std::clamp(mu, kMeanClamp, 1.0 - kMeanClamp);
      return m * (1.0 - m);
    }
    case LinkFamily::log:
      if (mu <= 0.0) throw DomainError("log-link mean must be positive");
      return mu;
  }
  throw DomainError("unknown link");
}

double variance_value(VarianceFamily family, double mu) {
  if (!std::isfinite(mu)) throw DomainError("mean is not finite");
  switch (family) {
    case VarianceFamily::constant:
      return 1.0;
    case VarianceFamily::bernoulli:
    case VarianceFamily::proportion:
      if (mu <= 0.0 || mu >= 1.0) {
        throw DomainError("mean " + std::to_string(mu) + " outside (0, 1)");
      }
      return mu * (1.0 - mu);
    case VarianceFamily::poisson:
      if (mu <= 0.0) throw DomainError("poisson mean must be positive");
      return mu;
    case VarianceFamily::gamma:
      if (mu <= 0.0) throw DomainError("gamma mean must be positive");
      return mu * mu;
  }
  throw DomainError("unknown variance family");
}

std::string_view to_string(LinkFamily link) {
  switch (link) {
    case LinkFamily::identity: return "identity";
    case LinkFamily::logit: return "logit";
    case LinkFamily::log: return "log";
  }
  return "?";
}

std::string_view to_string(VarianceFamily family) {
  switch (family) {
    case VarianceFamily::constant: return "constant";
    case VarianceFamily::bernoulli: return "bernoulli";
    case VarianceFamily::proportion: return "proportion";
    case VarianceFamily::poisson: return "poisson";
    case VarianceFamily::gamma: return "gamma";
  }
  return "?";
}

LinkFamily parse_link(std::string_view name) {
  if (name == "identity") return LinkFamily::identity;
  if (name == "logit") return LinkFamily::logit;
  if (name == "log") return LinkFamily::log;
  throw ConfigurationError("unknown link '" + std::string(name) + "'");
}

VarianceFamily parse_variance(std::string_view name) {
  if (name == "constant" || name == "gaussian") return VarianceFamily::constant;
  if (name == "bernoulli" || name == "binomial") return VarianceFamily::bernoulli;
  if (name == "proportion") return VarianceFamily::proportion;
  if (name == "poisson") return VarianceFamily::poisson;
  if (name == "gamma") return VarianceFamily::gamma;
  throw ConfigurationError("unknown variance family '" + std::string(name) + "'");
}

std::optional<double> CovariateRecord::find(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return values[j];
  }
  return std::nullopt;
}

VectorGlmModel::VectorGlmModel(std::vector<ComponentSpec> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw ConfigurationError("model needs at least one component");
  }
  slots_.resize(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    if (c.terms.empty()) {
      throw ConfigurationError("component '" + c.name + "' has no formula terms");
    }
    if (c.marginal.variance == VarianceFamily::bernoulli &&
        c.marginal.dispersion == DispersionMode::estimated) {
      throw ConfigurationError("component '" + c.name +
                               "': bernoulli variance requires dispersion fixed at 1");
    }
    std::set<std::size_t> used;
    for (const auto& t : c.terms) {
      if (t.coefficient.empty() || t.covariate.empty()) {
        throw ConfigurationError("component '" + c.name +
                                 "' has a term without coefficient or covariate");
      }
      auto it = std::find(names_.begin(), names_.end(), t.coefficient);
      if (it == names_.end()) {
        names_.push_back(t.coefficient);
        used.insert(names_.size() - 1);
      } else {
        used.insert(static_cast<std::size_t>(it - names_.begin()));
      }
    }
    slots_[k].assign(used.begin(), used.end());

    const int label = c.marginal.dispersion_group;
    auto g = std::find(group_labels_.begin(), group_labels_.end(), label);
    const bool estimated = c.marginal.dispersion == DispersionMode::estimated;
    if (g == group_labels_.end()) {
      group_labels_.push_back(label);
      group_estimated_.push_back(estimated);
      group_index_.push_back(group_labels_.size() - 1);
    } else {
      const auto idx = static_cast<std::size_t>(g - group_labels_.begin());
      if (group_estimated_[idx] != estimated) {
        throw ConfigurationError("dispersion group " + std::to_string(label) +
                                 " mixes fixed and estimated components");
      }
      group_index_.push_back(idx);
    }
  }
}

std::vector<std::string> VectorGlmModel::covariate_columns() const {
  std::set<std::string> cols;
  for (const auto& c : components_) {
    for (const auto& t : c.terms) {
      if (t.covariate != kInterceptColumn) cols.insert(t.covariate);
    }
  }
  return {cols.begin(), cols.end()};
}

std::optional<std::size_t> VectorGlmModel::slot_of(std::string_view coefficient) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == coefficient) return j;
  }
  return std::nullopt;
}

Eigen::RowVectorXd design_row(const VectorGlmModel& model,
                              const CovariateRecord& covariates, std::size_t k) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(
      static_cast<Eigen::Index>(model.coefficients()));
  for (const auto& term : model.component(k).terms) {
    double value = 1.0;
    if (term.covariate != kInterceptColumn) {
      const auto found = covariates.find(term.covariate);
      if (!found) {
        throw ConfigurationError("covariate column '" + term.covariate +
                                 "' is missing");
      }
      value = *found;
    }
    if (term.equals) value = (value == *term.equals) ? 1.0 : 0.0;
    row(static_cast<Eigen::Index>(*model.slot_of(term.coefficient))) += value;
  }
  return row;
}

}  // namespace vecgee
