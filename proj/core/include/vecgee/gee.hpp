#pragma once

// Generalized estimating equations for vector-valued responses:
//   0 = sum_i D_i^T W_i^{-1} S_i
// solved by Fisher scoring, alternating with moment estimates of the
// dispersion and working-dependence parameters. Missing components are
// handled by deleting the corresponding rows of S_i, D_i and W_i.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vecgee/dataset.hpp"
#include "vecgee/marginal.hpp"
#include "vecgee/working_dependence.hpp"

namespace vecgee {

struct FitOptions {
  int max_iterations = 50;
  double tolerance = 1e-8;         // on max |delta beta|
  double ee_tolerance = 1e-6;      // on ||sum D^T W^-1 S||_inf / n
  WorkingDependence dependence;

  void validate() const;
};

/// One observation's contribution restricted to its observed components.
struct ObservationTerms {
  std::vector<std::size_t> components;  // observed component indices
  Eigen::VectorXd response;
  Eigen::VectorXd mean;
  Eigen::VectorXd residual;    // S_i
  Eigen::MatrixXd design;      // rows of X_i, |observed| x p
  Eigen::MatrixXd derivative;  // D_i = diag(dmu/deta) X_i
};

ObservationTerms residual_and_derivative(const VectorGlmModel& model, const Dataset& data,
                                         std::size_t i, const Eigen::VectorXd& beta);

/// Estimated working dependence. `correlation` is the common K x K matrix for
/// independence / fixed / unstructured; odds-ratio models keep per-pair log
/// odds ratios in `gamma` and build R_i from each observation's means.
struct DependenceEstimate {
  DependenceKind kind = DependenceKind::independence;
  Eigen::MatrixXd correlation;
  Eigen::MatrixXd gamma;
  std::vector<std::pair<std::size_t, std::size_t>> saturated;

  /// R_i restricted to `components`, given the means on those components.
  Eigen::MatrixXd correlation_for(const std::vector<std::size_t>& components,
                                  const Eigen::VectorXd& means) const;
};

/// W_i for one observation: Sigma_i^{1/2} R_i Sigma_i^{1/2} with
/// sigma^2_ik = phi_{g(k)} V_k(mu_ik).
Eigen::MatrixXd working_covariance(const VectorGlmModel& model, const ObservationTerms& terms,
                                   const std::vector<double>& phi,
                                   const DependenceEstimate& dependence);

/// beta + (sum D^T W^-1 D)^{-1} (sum D^T W^-1 S). `working` holds W_i for each
/// observation on its observed components.
Eigen::VectorXd fisher_scoring_step(const Eigen::VectorXd& beta, const VectorGlmModel& model,
                                    const Dataset& data,
                                    const std::vector<Eigen::MatrixXd>& working);

/// Dispersion per dense group: sum of squared Pearson residuals over the
/// group's observed cells divided by (cells - free slots touched by the
/// group). Fixed groups and groups with no observed cells return 1.
std::vector<double> estimate_dispersion(const VectorGlmModel& model,
                                        const Eigen::MatrixXd& pearson,
                                        const ObservedMask& observed,
                                        const std::vector<bool>& active_slots = {});

struct FitResult {
  std::vector<std::string> coefficient_names;
  Eigen::VectorXd beta;
  std::vector<int> dispersion_labels;
  std::vector<double> phi;
  DependenceEstimate dependence;

  // Asymptotic (sqrt n) scale; divide by n for vcov(beta_hat).
  Eigen::MatrixXd naive_vcov;
  Eigen::MatrixXd sandwich_vcov;
  Eigen::MatrixXd bread;  // sum D^T W^-1 D
  Eigen::MatrixXd meat;   // sum D^T W^-1 S S^T W^-1 D

  std::size_t n = 0;
  std::size_t p = 0;  // free (estimable) slots
  int iterations = 0;
  bool converged = false;
  double ee_residual_norm = 0.0;
  double last_step = 0.0;
  std::vector<std::size_t> inactive_slots;  // slots no observed cell touches
};

FitResult fit_gee(const VectorGlmModel& model, const Dataset& data,
                  const FitOptions& options = {});

/// Per-observation quantities at a fitted solution (used to hand a fit to the
/// plug-in adjustment or to export it).
struct FittedObservation {
  ObservationTerms terms;
  Eigen::MatrixXd working;
};

std::vector<FittedObservation> fitted_observations(const VectorGlmModel& model,
                                                   const Dataset& data,
                                                   const FitResult& fit);

}  // namespace vecgee
