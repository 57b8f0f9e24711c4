#pragma once

// CSV ingestion and export, the JSON analysis record written by `vecgee fit`,
// and the file format for handing a fit made elsewhere to the plug-in
// sandwich adjustment.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vecgee/dataset.hpp"
#include "vecgee/gee.hpp"
#include "vecgee/inference.hpp"

namespace vecgee {

struct CsvSchema {
  std::vector<std::string> responses;   // in component order
  std::vector<std::string> covariates;
  std::string missing_token = "NA";
};

/// Header-driven CSV loader. Missing tokens (and empty cells) in response
/// columns set the mask; covariates must be complete. Errors name the 1-based
/// line and the column.
Dataset load_csv_dataset(const std::filesystem::path& path, const CsvSchema& schema);
Dataset parse_csv_dataset(std::istream& in, const CsvSchema& schema,
                          const std::string& source = "<stream>");

/// Covariates first, then responses; unobserved cells written as the token.
void write_csv_dataset(const std::filesystem::path& path, const Dataset& data,
                       const std::string& missing_token = "NA");

struct CsvRow {
  std::size_t line = 0;  // 1-based
  std::vector<std::string> cells;
};

/// Quoted-field CSV reader shared by the loaders; blank lines are skipped.
std::vector<CsvRow> read_csv_rows(std::istream& in);

struct ConvergenceInfo {
  int iterations = 0;
  bool converged = false;
  double ee_residual_norm = 0.0;
  double last_step = 0.0;
};

struct NamedTest {
  std::string name;
  std::string variance;  // "naive" or "sandwich"
  HypothesisTest test;
};

struct DependenceSummary {
  std::string kind;
  std::vector<std::string> components;
  Eigen::MatrixXd correlation;  // empty for odds-ratio
  Eigen::MatrixXd gamma;        // empty unless odds-ratio
  std::vector<std::pair<std::size_t, std::size_t>> saturated;
};

/// Everything `vecgee fit` reports. Doubles survive a JSON round trip exactly.
struct AnalysisOutput {
  std::string data_source;
  std::vector<std::string> coefficient_names;
  Eigen::VectorXd beta;
  Eigen::MatrixXd naive_vcov;
  Eigen::MatrixXd sandwich_vcov;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<CoefficientRow> coefficients;
  bool has_estimates = true;  // false for an adjustment run without estimates
  std::vector<int> dispersion_labels;
  std::vector<double> dispersion;
  DependenceSummary dependence;
  ConvergenceInfo convergence;
  std::vector<std::size_t> inactive_slots;
  std::vector<NamedTest> tests;
  nlohmann::json model;  // the model spec that produced the fit

  std::size_t index_of(const std::string& coefficient) const;
  const Eigen::MatrixXd& vcov(VarianceChoice choice) const {
    return choice == VarianceChoice::naive ? naive_vcov : sandwich_vcov;
  }
};

AnalysisOutput make_analysis_output(const VectorGlmModel& model, const FitResult& fit,
                                    std::string data_source, nlohmann::json model_spec = {});

nlohmann::json to_json(const AnalysisOutput& output);
AnalysisOutput analysis_from_json(const nlohmann::json& doc);

/// Adds or replaces (by name and variance) a test record.
void record_test(AnalysisOutput& output, NamedTest test);

/// Coefficient table at 6 significant digits.
std::string analysis_csv(const AnalysisOutput& output);

AnalysisOutput read_analysis(const std::filesystem::path& path);
/// Writes `path` (JSON) and the CSV view next to it with extension .csv.
void write_analysis(const std::filesystem::path& path, const AnalysisOutput& output);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

// External fits. The means file has columns
//   obs_id, component, response, fitted_mean, <one column per coefficient>
// with one row per observed component; the working-covariance file has
//   obs_id, row, col, value
// where row and col are component names. Either triangle of each W_i may be
// given.

struct ExternalLinks {
  std::optional<LinkFamily> all;
  std::map<std::string, LinkFamily> by_component;

  LinkFamily for_component(const std::string& name) const;
};

/// Parses "logit" or "left=logit,right=identity".
ExternalLinks parse_external_links(const std::string& text);

ExternalFit load_external_fit(const std::filesystem::path& means, const std::filesystem::path& wcov,
                              const ExternalLinks& links);
ExternalFit parse_external_fit(std::istream& means, std::istream& wcov, const ExternalLinks& links);

/// Writes a fit in the external format, e.g. to check the adjustment path
/// against this library's own sandwich estimate.
void write_external_fit(const std::filesystem::path& means, const std::filesystem::path& wcov,
                        const VectorGlmModel& model, const Dataset& data, const FitResult& fit);

/// Coefficient estimates from a CSV with columns (coefficient, estimate).
std::map<std::string, double> load_estimates(const std::filesystem::path& path);

/// Analysis record for an adjusted external fit. With no estimates the table
/// carries standard errors only.
AnalysisOutput make_adjusted_output(const ExternalFit& fit, const VarianceEstimate& variance,
                                    const std::map<std::string, double>& estimates,
                                    std::string data_source);

}  // namespace vecgee
