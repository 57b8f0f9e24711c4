#include <cmath>
#include <string>

#include "linalg.hpp"
#include "vecgee/errors.hpp"
#include "vecgee/inference.hpp"

namespace vecgee {

VarianceEstimate adjust_external_fit(const ExternalFit& fit) {
  const auto p = static_cast<Eigen::Index>(fit.slot_names.size());
  const std::size_t k_total = fit.component_names.size();
  if (p == 0) throw IngestionError("external fit has no coefficient columns");
  if (fit.links.size() != k_total) throw IngestionError("one link per component is required");
  if (fit.observations.empty()) throw IngestionError("external fit has no observations");

  Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (const auto& obs : fit.observations) {
    const auto m = static_cast<Eigen::Index>(obs.components.size());
    if (m == 0) throw IngestionError("observation '" + obs.id + "' has no components");
    if (obs.response.size() != m || obs.mean.size() != m || obs.design.rows() != m ||
        obs.design.cols() != p || obs.working.rows() != m || obs.working.cols() != m) {
      throw IngestionError("observation '" + obs.id + "' has inconsistent dimensions");
    }
    Eigen::MatrixXd d(m, p);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto k = obs.components[static_cast<std::size_t>(r)];
      if (k >= k_total) throw IngestionError("observation '" + obs.id + "' names an unknown component");
      if (!std::isfinite(obs.mean(r)) || !std::isfinite(obs.response(r))) {
        throw IngestionError("observation '" + obs.id + "' has a non-finite mean or response");
      }
      d.row(r) = mean_derivative_from_mean(fit.links[k], obs.mean(r)) * obs.design.row(r);
    }
    const Eigen::VectorXd s = obs.response - obs.mean;
    Eigen::LLT<Eigen::MatrixXd> llt(obs.working);
    if (llt.info() != Eigen::Success) {
      throw DegenerateVarianceError("working covariance of observation '" + obs.id +
                                    "' is not positive definite");
    }
    const Eigen::MatrixXd winv_d = llt.solve(d);
    const Eigen::VectorXd u = winv_d.transpose() * s;
    bread.noalias() += d.transpose() * winv_d;
    meat.noalias() += u * u.transpose();
  }

  VarianceEstimate out;
  out.n = fit.observations.size();
  out.bread = detail::symmetrize(bread);
  out.meat = detail::symmetrize(meat);
  out.naive = naive_vcov(out.bread, out.n, fit.slot_names);
  out.sandwich = sandwich_vcov(out.bread, out.meat, out.n, fit.slot_names);
  return out;
}

}  // namespace vecgee
