#pragma once

// Marginal mean and variance models for each component of a vector response,
// and the layout of the shared global coefficient vector.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vecgee {

/// Smallest distance a logit mean is allowed to get to 0 or 1.
inline constexpr double kMeanClamp = 1e-10;

enum class LinkFamily { identity, logit, log };

enum class VarianceFamily { constant, bernoulli, proportion, poisson, gamma };

enum class DispersionMode { fixed_at_one, estimated };

/// mu(eta). Logit means are clamped to [kMeanClamp, 1 - kMeanClamp].
double mean_value(LinkFamily link, double eta);

/// d mu / d eta, always > 0. For logit this is mu(1 - mu) at the clamped mean.
double mean_derivative(LinkFamily link, double eta);

/// d mu / d eta expressed through the mean rather than the linear predictor.
/// Used when only fitted means are available (plug-in adjustment).
double mean_derivative_from_mean(LinkFamily link, double mu);

/// V(mu). Throws DomainError when mu lies outside the family's domain.
double variance_value(VarianceFamily family, double mu);

std::string_view to_string(LinkFamily link);
std::string_view to_string(VarianceFamily family);
LinkFamily parse_link(std::string_view name);
VarianceFamily parse_variance(std::string_view name);

struct MarginalSpec {
  LinkFamily link = LinkFamily::identity;
  VarianceFamily variance = VarianceFamily::constant;
  DispersionMode dispersion = DispersionMode::estimated;
  int dispersion_group = 0;
};

/// One additive term of a component's linear predictor. The term contributes
/// `covariate` (or 1 for the intercept) to the slot named `coefficient`; with
/// `equals` set it contributes the indicator I(covariate == *equals) instead.
struct FormulaTerm {
  std::string coefficient;
  std::string covariate;
  std::optional<double> equals;
};

inline constexpr std::string_view kInterceptColumn = "intercept";

struct ComponentSpec {
  std::string name;
  std::string response;  // response column in the data
  MarginalSpec marginal;
  std::vector<FormulaTerm> terms;
};

/// Read-only view of one observation's covariates.
struct CovariateRecord {
  std::span<const std::string> names;
  std::span<const double> values;

  std::optional<double> find(std::string_view name) const;
};

/// K marginal GLMs over one global coefficient vector. Coefficient names fix
/// the slot layout in order of first appearance; components naming the same
/// coefficient share its slot.
class VectorGlmModel {
 public:
  explicit VectorGlmModel(std::vector<ComponentSpec> components);

  std::size_t components() const noexcept { return components_.size(); }
  std::size_t coefficients() const noexcept { return names_.size(); }

  const ComponentSpec& component(std::size_t k) const { return components_.at(k); }
  const MarginalSpec& marginal(std::size_t k) const { return components_.at(k).marginal; }
  const std::vector<std::string>& coefficient_names() const noexcept { return names_; }

  /// Slots touched by component k, ascending.
  const std::vector<std::size_t>& slots_of(std::size_t k) const { return slots_.at(k); }

  /// Covariate columns referenced by any term (intercept excluded), sorted.
  std::vector<std::string> covariate_columns() const;

  std::optional<std::size_t> slot_of(std::string_view coefficient) const;

  /// Dense dispersion-group index for component k; groups are numbered in
  /// order of first appearance of their labels.
  std::size_t group_of(std::size_t k) const { return group_index_.at(k); }
  std::size_t dispersion_groups() const noexcept { return group_labels_.size(); }
  int group_label(std::size_t g) const { return group_labels_.at(g); }
  bool group_estimated(std::size_t g) const { return group_estimated_.at(g); }

 private:
  std::vector<ComponentSpec> components_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> slots_;
  std::vector<std::size_t> group_index_;
  std::vector<int> group_labels_;
  std::vector<bool> group_estimated_;
};

/// Row of length p mapping covariates into the global coefficient space for
/// component k. Throws ConfigurationError when a referenced column is absent.
Eigen::RowVectorXd design_row(const VectorGlmModel& model,
                              const CovariateRecord& covariates, std::size_t k);

}  // namespace vecgee
