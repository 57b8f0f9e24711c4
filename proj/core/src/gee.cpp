#include "vecgee/gee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"
#include "vecgee/errors.hpp"
#include "vecgee/inference.hpp"

namespace vecgee {

void FitOptions::validate() const {
  if (max_iterations < 1) throw ConfigurationError("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigurationError("tolerance must be positive");
  if (!(ee_tolerance > 0.0)) throw ConfigurationError("ee_tolerance must be positive");
}

namespace {

ObservationTerms build_terms(const VectorGlmModel& model, std::vector<std::size_t> components,
                             Eigen::MatrixXd design, Eigen::VectorXd response,
                             const Eigen::VectorXd& beta) {
  ObservationTerms t;
  const auto m = static_cast<Eigen::Index>(components.size());
  const Eigen::VectorXd eta = design * beta;
  t.mean.resize(m);
  Eigen::VectorXd dmu(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const LinkFamily link = model.marginal(components[static_cast<std::size_t>(a)]).link;
    t.mean(a) = mean_value(link, eta(a));
    dmu(a) = mean_derivative(link, eta(a));
  }
  t.residual = response - t.mean;
  t.derivative = dmu.asDiagonal() * design;
  t.components = std::move(components);
  t.design = std::move(design);
  t.response = std::move(response);
  return t;
}

// Design rows of every observed cell, computed once per fit.
class ModelFrame {
 public:
  ModelFrame(const VectorGlmModel& model, const Dataset& data) : model_(model), data_(data) {
    const auto p = static_cast<Eigen::Index>(model.coefficients());
    components_.resize(data.size());
    design_.resize(data.size());
    response_.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto rec = data.record(i);
      auto& comps = components_[i];
      for (std::size_t k = 0; k < data.components(); ++k) {
        if (data.observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) {
          comps.push_back(k);
        }
      }
      const auto m = static_cast<Eigen::Index>(comps.size());
      design_[i].resize(m, p);
      response_[i].resize(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto k = comps[static_cast<std::size_t>(a)];
        design_[i].row(a) = design_row(model, rec, k);
        response_[i](a) = data.responses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
    }
  }

  std::size_t size() const { return design_.size(); }

  ObservationTerms terms(std::size_t i, const Eigen::VectorXd& beta) const {
    return build_terms(model_, components_[i], design_[i], response_[i], beta);
  }

  std::vector<bool> active_slots() const {
    std::vector<bool> active(model_.coefficients(), false);
    for (const auto& x : design_) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if ((x.col(j).array() != 0.0).any()) active[static_cast<std::size_t>(j)] = true;
      }
    }
    return active;
  }

 private:
  const VectorGlmModel& model_;
  const Dataset& data_;
  std::vector<std::vector<std::size_t>> components_;
  std::vector<Eigen::MatrixXd> design_;
  std::vector<Eigen::VectorXd> response_;
};

void check_model_matches(const VectorGlmModel& model, const Dataset& data) {
  if (data.size() == 0) throw ConfigurationError("dataset is empty");
  if (data.components() != model.components()) {
    throw ConfigurationError("dataset has " + std::to_string(data.components()) +
                             " response components, model expects " +
                             std::to_string(model.components()));
  }
  data.validate();
}

void check_dependence(const VectorGlmModel& model, const WorkingDependence& dep) {
  const auto k_count = static_cast<Eigen::Index>(model.components());
  if (dep.kind == DependenceKind::fixed) {
    if (dep.fixed.rows() != k_count || dep.fixed.cols() != k_count) {
      throw ConfigurationError("fixed working correlation must be K x K");
    }
    validate_correlation(dep.fixed);
  }
  if (dep.kind == DependenceKind::odds_ratio) {
    for (std::size_t k = 0; k < model.components(); ++k) {
      const auto v = model.marginal(k).variance;
      if (v != VarianceFamily::bernoulli && v != VarianceFamily::proportion) {
        throw ConfigurationError("odds-ratio dependence needs binary or proportion "
                                 "components; '" + model.component(k).name + "' is " +
                                 std::string(to_string(v)));
      }
    }
  }
}

// Everything evaluated at one value of beta.
struct FitState {
  std::vector<ObservationTerms> terms;
  std::vector<double> phi;
  DependenceEstimate dependence;
  std::vector<Eigen::MatrixXd> working;
  Eigen::MatrixXd bread;
  Eigen::VectorXd score;
  Eigen::MatrixXd meat;
};

Eigen::MatrixXd full_matrix(const std::vector<ObservationTerms>& terms, std::size_t k_count,
                            bool means) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(terms.size()),
                                                static_cast<Eigen::Index>(k_count),
                                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    for (std::size_t a = 0; a < t.components.size(); ++a) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.components[a])) =
          means ? t.mean(static_cast<Eigen::Index>(a)) : t.residual(static_cast<Eigen::Index>(a));
    }
  }
  return m;
}

class Solver {
 public:
  Solver(const VectorGlmModel& model, const Dataset& data)
      : model_(model), data_(data), frame_(model, data), active_(frame_.active_slots()) {
    for (std::size_t j = 0; j < active_.size(); ++j) {
      if (active_[j]) {
        active_index_.push_back(j);
        active_names_.push_back(model.coefficient_names()[j]);
      } else {
        inactive_.push_back(j);
      }
    }
    if (active_index_.empty()) {
      throw ConfigurationError("no coefficient is touched by any observed response");
    }
  }

  const std::vector<bool>& active() const { return active_; }
  const std::vector<std::size_t>& inactive() const { return inactive_; }
  std::size_t free_slots() const { return active_index_.size(); }

  FitState evaluate(const Eigen::VectorXd& beta, const WorkingDependence& working,
                    bool estimate_nuisance, bool with_meat) const {
    FitState s;
    s.terms.reserve(frame_.size());
    for (std::size_t i = 0; i < frame_.size(); ++i) s.terms.push_back(frame_.terms(i, beta));

    const std::size_t k_count = model_.components();
    if (estimate_nuisance) {
      const Eigen::MatrixXd resid = full_matrix(s.terms, k_count, false);
      const Eigen::MatrixXd mu = full_matrix(s.terms, k_count, true);
      Eigen::MatrixXd pearson = resid;
      for (Eigen::Index i = 0; i < resid.rows(); ++i) {
        for (Eigen::Index k = 0; k < resid.cols(); ++k) {
          if (!data_.observed(i, k)) continue;
          pearson(i, k) = resid(i, k) /
                          std::sqrt(variance_value(model_.marginal(static_cast<std::size_t>(k)).variance, mu(i, k)));
        }
      }
      s.phi = estimate_dispersion(model_, pearson, data_.observed, active_);
      s.dependence = estimate_dependence(working, pearson, mu, s.phi);
    } else {
      s.phi.assign(model_.dispersion_groups(), 1.0);
      s.dependence.kind = DependenceKind::independence;
      s.dependence.correlation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k_count),
                                                           static_cast<Eigen::Index>(k_count));
    }

    const auto p = static_cast<Eigen::Index>(free_slots());
    s.bread = Eigen::MatrixXd::Zero(p, p);
    s.score = Eigen::VectorXd::Zero(p);
    if (with_meat) s.meat = Eigen::MatrixXd::Zero(p, p);
    s.working.reserve(s.terms.size());
    for (const auto& t : s.terms) {
      Eigen::MatrixXd w = working_covariance(model_, t, s.phi, s.dependence);
      Eigen::LLT<Eigen::MatrixXd> llt(w);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("working covariance is not positive definite");
      }
      const Eigen::MatrixXd d = active_columns(t.derivative);
      const Eigen::MatrixXd winv_d = llt.solve(d);
      s.bread.noalias() += d.transpose() * winv_d;
      const Eigen::VectorXd u = winv_d.transpose() * t.residual;
      s.score += u;
      if (with_meat) s.meat.noalias() += u * u.transpose();
      s.working.push_back(std::move(w));
    }
    return s;
  }

  /// Runs `solve`, translating rank-deficiency slots from the active block
  /// back to global coefficient slots.
  template <typename F>
  auto global_slots(F&& solve) const {
    try {
      return solve();
    } catch (const RankDeficiencyError& e) {
      std::vector<std::size_t> slots;
      for (auto a : e.slots()) slots.push_back(active_index_.at(a));
      throw RankDeficiencyError(e.what(), std::move(slots));
    }
  }

  Eigen::VectorXd step(const FitState& s) const {
    return global_slots([&] { return detail::spd_solve(s.bread, s.score, active_names_); });
  }

  void apply(Eigen::VectorXd& beta, const Eigen::VectorXd& step) const {
    for (std::size_t a = 0; a < active_index_.size(); ++a) {
      beta(static_cast<Eigen::Index>(active_index_[a])) += step(static_cast<Eigen::Index>(a));
    }
  }

  Eigen::MatrixXd embed(const Eigen::MatrixXd& m) const {
    const auto p = static_cast<Eigen::Index>(model_.coefficients());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t a = 0; a < active_index_.size(); ++a) {
      for (std::size_t b = 0; b < active_index_.size(); ++b) {
        out(static_cast<Eigen::Index>(active_index_[a]), static_cast<Eigen::Index>(active_index_[b])) =
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
    return out;
  }

  const std::vector<std::string>& active_names() const { return active_names_; }

 private:
  Eigen::MatrixXd active_columns(const Eigen::MatrixXd& d) const {
    if (inactive_.empty()) return d;
    Eigen::MatrixXd out(d.rows(), static_cast<Eigen::Index>(active_index_.size()));
    for (std::size_t a = 0; a < active_index_.size(); ++a) {
      out.col(static_cast<Eigen::Index>(a)) = d.col(static_cast<Eigen::Index>(active_index_[a]));
    }
    return out;
  }

  DependenceEstimate estimate_dependence(const WorkingDependence& working,
                                         const Eigen::MatrixXd& pearson,
                                         const Eigen::MatrixXd& mu,
                                         const std::vector<double>& phi) const {
    const auto k_count = static_cast<Eigen::Index>(model_.components());
    DependenceEstimate dep;
    dep.kind = working.kind;
    switch (working.kind) {
      case DependenceKind::independence:
        dep.correlation = Eigen::MatrixXd::Identity(k_count, k_count);
        break;
      case DependenceKind::fixed:
        dep.correlation = working.fixed;
        break;
      case DependenceKind::unstructured: {
        Eigen::MatrixXd e = pearson;
        for (Eigen::Index k = 0; k < k_count; ++k) {
          e.col(k) /= std::sqrt(phi[model_.group_of(static_cast<std::size_t>(k))]);
        }
        dep.correlation = estimate_unstructured(e, data_.observed);
        break;
      }
      case DependenceKind::odds_ratio: {
        auto pg = estimate_pairwise_gamma(data_.responses, mu, data_.observed);
        dep.gamma = std::move(pg.gamma);
        dep.saturated = std::move(pg.saturated);
        break;
      }
    }
    return dep;
  }

  const VectorGlmModel& model_;
  const Dataset& data_;
  ModelFrame frame_;
  std::vector<bool> active_;
  std::vector<std::size_t> active_index_;
  std::vector<std::size_t> inactive_;
  std::vector<std::string> active_names_;
};

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

ObservationTerms residual_and_derivative(const VectorGlmModel& model, const Dataset& data,
                                         std::size_t i, const Eigen::VectorXd& beta) {
  if (!beta.allFinite()) throw DomainError("coefficient vector is not finite");
  const auto rec = data.record(i);
  std::vector<std::size_t> comps;
  for (std::size_t k = 0; k < data.components(); ++k) {
    if (data.observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) comps.push_back(k);
  }
  const auto m = static_cast<Eigen::Index>(comps.size());
  Eigen::MatrixXd x(m, static_cast<Eigen::Index>(model.coefficients()));
  Eigen::VectorXd y(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    x.row(a) = design_row(model, rec, comps[static_cast<std::size_t>(a)]);
    y(a) = data.responses(static_cast<Eigen::Index>(i),
                          static_cast<Eigen::Index>(comps[static_cast<std::size_t>(a)]));
  }
  return build_terms(model, std::move(comps), std::move(x), std::move(y), beta);
}

Eigen::MatrixXd DependenceEstimate::correlation_for(const std::vector<std::size_t>& components,
                                                    const Eigen::VectorXd& means) const {
  const auto m = static_cast<Eigen::Index>(components.size());
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ka = static_cast<Eigen::Index>(components[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < a; ++b) {
      const auto kb = static_cast<Eigen::Index>(components[static_cast<std::size_t>(b)]);
      const double rho = kind == DependenceKind::odds_ratio
                             ? odds_ratio_correlation(gamma(ka, kb), means(a), means(b))
                             : correlation(ka, kb);
      r(a, b) = rho;
      r(b, a) = rho;
    }
  }
  if (kind == DependenceKind::odds_ratio && m > 2) r = repair_correlation(r);
  return r;
}

Eigen::MatrixXd working_covariance(const VectorGlmModel& model, const ObservationTerms& terms,
                                   const std::vector<double>& phi,
                                   const DependenceEstimate& dependence) {
  const auto m = static_cast<Eigen::Index>(terms.components.size());
  Eigen::VectorXd var(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto k = terms.components[static_cast<std::size_t>(a)];
    var(a) = phi[model.group_of(k)] * variance_value(model.marginal(k).variance, terms.mean(a));
  }
  if (dependence.kind == DependenceKind::independence) {
    for (Eigen::Index a = 0; a < m; ++a) {
      if (!(var(a) > 0.0)) {
        throw DegenerateVarianceError("working variance is not positive");
      }
    }
    return var.asDiagonal();
  }
  return assemble_working_covariance(var, dependence.correlation_for(terms.components, terms.mean));
}

Eigen::VectorXd fisher_scoring_step(const Eigen::VectorXd& beta, const VectorGlmModel& model,
                                    const Dataset& data,
                                    const std::vector<Eigen::MatrixXd>& working) {
  if (working.size() != data.size()) {
    throw ConfigurationError("need one working covariance per observation");
  }
  const auto p = static_cast<Eigen::Index>(model.coefficients());
  Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto t = residual_and_derivative(model, data, i, beta);
    Eigen::LLT<Eigen::MatrixXd> llt(working[i]);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("working covariance " + std::to_string(i) + " is not positive definite");
    }
    const Eigen::MatrixXd winv_d = llt.solve(t.derivative);
    bread.noalias() += t.derivative.transpose() * winv_d;
    score.noalias() += winv_d.transpose() * t.residual;
  }
  return beta + detail::spd_solve(bread, score, model.coefficient_names());
}

std::vector<double> estimate_dispersion(const VectorGlmModel& model,
                                        const Eigen::MatrixXd& pearson,
                                        const ObservedMask& observed,
                                        const std::vector<bool>& active_slots) {
  const std::size_t groups = model.dispersion_groups();
  std::vector<double> phi(groups, 1.0);
  for (std::size_t g = 0; g < groups; ++g) {
    if (!model.group_estimated(g)) continue;
    std::vector<bool> touched(model.coefficients(), false);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < model.components(); ++k) {
      if (model.group_of(k) != g) continue;
      for (auto j : model.slots_of(k)) {
        if (active_slots.empty() || active_slots[j]) touched[j] = true;
      }
      const auto kk = static_cast<Eigen::Index>(k);
      for (Eigen::Index i = 0; i < pearson.rows(); ++i) {
        if (!observed(i, kk)) continue;
        sum += pearson(i, kk) * pearson(i, kk);
        ++cells;
      }
    }
    if (cells == 0) continue;
    const auto params = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), true));
    if (cells <= params) {
      throw InsufficientDataError("dispersion group " + std::to_string(model.group_label(g)) +
                                  " has " + std::to_string(cells) + " observed cells for " +
                                  std::to_string(params) + " coefficients");
    }
    phi[g] = sum / static_cast<double>(cells - params);
  }
  return phi;
}

FitResult fit_gee(const VectorGlmModel& model, const Dataset& data, const FitOptions& options) {
  options.validate();
  check_model_matches(model, data);
  check_dependence(model, options.dependence);

  const Solver solver(model, data);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.coefficients()));

  // Start from the joint independence fit, i.e. stacked per-component GLMs.
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto s = solver.evaluate(beta, WorkingDependence::independence(), false, false);
    const Eigen::VectorXd step = solver.step(s);
    solver.apply(beta, step);
    if (!beta.allFinite()) throw NumericalError("independence start diverged");
    if (max_abs(step) < options.tolerance) break;
  }

  const auto n = data.size();
  FitResult result;
  double last_step = std::numeric_limits<double>::infinity();
  FitState state;
  for (int cycle = 0;; ++cycle) {
    state = solver.evaluate(beta, options.dependence, true, true);
    result.ee_residual_norm = max_abs(state.score) / static_cast<double>(n);
    if (last_step < options.tolerance && result.ee_residual_norm <= options.ee_tolerance) {
      result.converged = true;
      break;
    }
    if (cycle == options.max_iterations) break;
    const Eigen::VectorXd step = solver.step(state);
    solver.apply(beta, step);
    if (!beta.allFinite()) throw NumericalError("scoring iteration diverged");
    last_step = max_abs(step);
    result.iterations = cycle + 1;
  }

  result.coefficient_names = model.coefficient_names();
  result.beta = beta;
  for (std::size_t g = 0; g < model.dispersion_groups(); ++g) {
    result.dispersion_labels.push_back(model.group_label(g));
  }
  result.phi = state.phi;
  result.dependence = state.dependence;
  result.n = n;
  result.p = solver.free_slots();
  result.last_step = last_step;
  result.inactive_slots = solver.inactive();
  result.bread = solver.embed(state.bread);
  result.meat = solver.embed(state.meat);
  result.naive_vcov = solver.embed(
      solver.global_slots([&] { return naive_vcov(state.bread, n, solver.active_names()); }));
  result.sandwich_vcov = solver.embed(solver.global_slots(
      [&] { return sandwich_vcov(state.bread, state.meat, n, solver.active_names()); }));
  return result;
}

std::vector<FittedObservation> fitted_observations(const VectorGlmModel& model,
                                                   const Dataset& data,
                                                   const FitResult& fit) {
  std::vector<FittedObservation> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    FittedObservation o;
    o.terms = residual_and_derivative(model, data, i, fit.beta);
    o.working = working_covariance(model, o.terms, fit.phi, fit.dependence);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace vecgee
