#pragma once

// Monte Carlo harness for the two simulation designs: a Gaussian/binary pair
// linked through a shared age covariate ("burn"), and paired eye scores with
// subject-level random effects ("sorbinil"). Each replicate draws from its own
// substream, so reports are bit-identical for any thread count.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vecgee/dataset.hpp"
#include "vecgee/marginal.hpp"
#include "vecgee/random.hpp"
#include "vecgee/working_dependence.hpp"

namespace vecgee {

enum class SimulationDesign { burn, sorbinil };

std::string_view to_string(SimulationDesign design);
SimulationDesign parse_design(std::string_view name);

struct BurnParameters {
  double y1_intercept = 6.6980;
  double y1_age = 0.0039;
  double y2_intercept = -4.0521;
  double y2_age = 0.0527;
  double y1_sd = 1.26;
};

struct SorbinilParameters {
  double intercept = 0.303;
  double sorbinil = -0.444;
  int trials = 8;
};

inline constexpr std::size_t kBurnPoolSize = 981;

/// 981 ages evenly spaced on [0.1, 90].
std::vector<double> synthetic_age_pool();

struct SimulationConfig {
  SimulationDesign design = SimulationDesign::burn;
  std::size_t replicates = 1000;
  std::size_t sample_size = 200;  // burn only; sorbinil is fixed at 41
  std::uint64_t seed = 1;
  double gamma_link = 5.0;        // burn: weight of (Y2 - mu2) in the mean of Y1
  double random_effect_sd = 0.2;  // sorbinil: sd of each subject effect
  std::vector<DependenceKind> working;  // empty: design default
  std::vector<double> age_pool;         // empty: synthetic_age_pool()
  std::optional<Eigen::MatrixXd> true_vcov;  // replaces the empirical truth
  unsigned threads = 1;

  void validate() const;
  std::vector<DependenceKind> working_models() const;
};

SimulationConfig parse_simulation_config(const nlohmann::json& doc);
nlohmann::json to_json(const SimulationConfig& config);

/// Columns: responses "y1" (Gaussian) and "y2" (binary); covariate "age".
Dataset generate_burn_dataset(std::size_t n, std::uint64_t seed,
                              const std::vector<double>& age_pool, double gamma_link = 5.0,
                              const BurnParameters& params = {});
Dataset generate_burn_dataset(std::size_t n, SplitMix64& rng,
                              const std::vector<double>& age_pool, double gamma_link,
                              const BurnParameters& params);

/// 41 subjects in the trial's treatment layout; scores divided by 4. Columns
/// as in sorbinil_dataset().
Dataset generate_sorbinil_dataset(std::uint64_t seed, double random_effect_sd = 0.2,
                                  const SorbinilParameters& params = {});
Dataset generate_sorbinil_dataset(SplitMix64& rng, double random_effect_sd,
                                  const SorbinilParameters& params);

/// Gaussian identity (estimated dispersion) for y1 and logistic Bernoulli for
/// y2, each linear in age: slots b10, b11, b20, b21.
VectorGlmModel burn_model();
/// Logistic proportion margins with one shared dispersion.
/// Slots b0, b1: common intercept and sorbinil effect for both eyes.
VectorGlmModel sorbinil_symmetric_model();
/// Slots bL0, bL1, bR0, bR1.
VectorGlmModel sorbinil_four_parameter_model();
/// Slots b0, b1, b2 where b2 is the effect of treating the other eye.
VectorGlmModel sorbinil_interference_model();

/// Induced 1-norm of the difference: maximum absolute column sum.
double matrix_norm_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

struct RejectionRate {
  std::size_t rejections = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double se = 0.0;
};

RejectionRate type_i_error(std::size_t rejections, std::size_t trials);

inline constexpr std::array<double, 3> kNominalLevels = {0.01, 0.05, 0.10};

/// One report cell: mean and sd across replicates of an estimated quantity.
struct QuantitySummary {
  std::string quantity;  // e.g. "sd(b11)", "cor(b10,b20)", "norm(V)", "norm(Vinv)"
  double truth = 0.0;
  double adjusted_mean = 0.0;
  double adjusted_sd = 0.0;
  double unadjusted_mean = 0.0;
  double unadjusted_sd = 0.0;
};

struct ReplicateOutcome {
  bool ok = false;
  std::string failure;
  Eigen::VectorXd beta;
  Eigen::MatrixXd unadjusted;  // naive vcov, asymptotic scale
  Eigen::MatrixXd adjusted;    // sandwich vcov
  double p_unadjusted = 1.0;
  double p_adjusted = 1.0;
};

struct WorkingReport {
  DependenceKind working = DependenceKind::independence;
  std::size_t fitted = 0;
  std::size_t failures = 0;
  Eigen::MatrixXd truth;  // n * cov(beta_hat) or the supplied true_vcov
  std::vector<QuantitySummary> quantities;
  std::array<RejectionRate, 3> unadjusted_type_i{};
  std::array<RejectionRate, 3> adjusted_type_i{};
  std::vector<ReplicateOutcome> replicates;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<std::string> coefficient_names;
  std::size_t sample_size = 0;
  int df1 = 0;
  int df2 = 0;
  std::vector<WorkingReport> working;
};

SimulationReport run_monte_carlo(const SimulationConfig& config);

/// One row per report quantity and working model.
std::string report_csv(const SimulationReport& report);
nlohmann::json report_json(const SimulationReport& report);

}  // namespace vecgee
