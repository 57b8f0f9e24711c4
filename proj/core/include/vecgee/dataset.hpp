#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vecgee/marginal.hpp"

namespace vecgee {

/// observed(i, k) is true when component k of observation i is present.
using ObservedMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-major so that one observation's covariates are contiguous.
using CovariateTable =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n vector responses with a missingness mask, plus complete covariates.
/// Response columns follow the component order of the model they feed.
struct Dataset {
  std::vector<std::string> response_names;
  Eigen::MatrixXd responses;  // n x K; unobserved cells hold NaN
  ObservedMask observed;      // n x K
  std::vector<std::string> covariate_names;
  CovariateTable covariates;  // n x C

  std::size_t size() const noexcept { return static_cast<std::size_t>(responses.rows()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(responses.cols()); }

  CovariateRecord record(std::size_t i) const;

  /// Throws ConfigurationError when shapes disagree or an observation has no
  /// observed component.
  void validate() const;
};

/// Builds a dataset from dense columns; NaN responses are treated as missing.
Dataset make_dataset(std::vector<std::string> response_names,
                     const Eigen::MatrixXd& responses,
                     std::vector<std::string> covariate_names,
                     const CovariateTable& covariates);

/// Copy of `data` with rows reordered so that row j is data row order[j].
Dataset permute_rows(const Dataset& data, const std::vector<std::size_t>& order);

}  // namespace vecgee
