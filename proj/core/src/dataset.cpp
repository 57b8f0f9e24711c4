#include "vecgee/dataset.hpp"

#include <cmath>

#include "vecgee/errors.hpp"

namespace vecgee {

CovariateRecord Dataset::record(std::size_t i) const {
  const double* row = covariates.data() + i * static_cast<std::size_t>(covariates.cols());
  return {covariate_names,
          std::span<const double>(row, static_cast<std::size_t>(covariates.cols()))};
}

void Dataset::validate() const {
  if (response_names.size() != static_cast<std::size_t>(responses.cols())) {
    throw ConfigurationError("response names do not match response columns");
  }
  if (observed.rows() != responses.rows() || observed.cols() != responses.cols()) {
    throw ConfigurationError("missingness mask shape does not match responses");
  }
  if (covariates.rows() != responses.rows() ||
      covariate_names.size() != static_cast<std::size_t>(covariates.cols())) {
    throw ConfigurationError("covariate table shape does not match responses");
  }
  for (Eigen::Index i = 0; i < observed.rows(); ++i) {
    if (!observed.row(i).any()) {
      throw ConfigurationError("observation " + std::to_string(i) +
                               " has no observed response component");
    }
  }
}

Dataset make_dataset(std::vector<std::string> response_names,
                     const Eigen::MatrixXd& responses,
                     std::vector<std::string> covariate_names,
                     const CovariateTable& covariates) {
  Dataset d;
  d.response_names = std::move(response_names);
  d.responses = responses;
  d.observed = responses.array().isFinite();
  d.covariate_names = std::move(covariate_names);
  d.covariates = covariates;
  d.validate();
  return d;
}

Dataset permute_rows(const Dataset& data, const std::vector<std::size_t>& order) {
  Dataset out = data;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto src = static_cast<Eigen::Index>(order[j]);
    const auto dst = static_cast<Eigen::Index>(j);
    out.responses.row(dst) = data.responses.row(src);
    out.observed.row(dst) = data.observed.row(src);
    out.covariates.row(dst) = data.covariates.row(src);
  }
  return out;
}

}  // namespace vecgee
