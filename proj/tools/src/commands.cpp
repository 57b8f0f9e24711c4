#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vecgee/errors.hpp"
#include "vecgee/gee.hpp"
#include "vecgee/inference.hpp"
#include "vecgee/io.hpp"
#include "vecgee/model_spec.hpp"
#include "vecgee/simulation.hpp"
#include "vecgee/sorbinil_data.hpp"

namespace vecgee::cli {

namespace {

constexpr std::string_view kBuiltinPrefix = "builtin:";

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

Dataset load_data(const std::string& source, const ModelSpec& spec, const VectorGlmModel& model,
                  const std::string& missing_token) {
  if (source.starts_with(kBuiltinPrefix)) {
    const auto name = source.substr(kBuiltinPrefix.size());
    if (name != "sorbinil") throw ConfigurationError("unknown builtin dataset '" + name + "'");
    bool proportion = false;
    for (const auto& c : spec.components) {
      proportion = proportion || c.marginal.variance == VarianceFamily::proportion;
    }
    return align_to_model(sorbinil_dataset(proportion), model);
  }
  CsvSchema schema;
  for (std::size_t k = 0; k < model.components(); ++k) {
    schema.responses.push_back(model.component(k).response);
  }
  schema.covariates = model.covariate_columns();
  schema.missing_token = missing_token;
  return load_csv_dataset(source, schema);
}

void print_table(const AnalysisOutput& out, std::ostream& log) {
  log << "coefficient      estimate   naive_se  adjusted_se  adjusted_z   p_value\n";
  for (const auto& r : out.coefficients) {
    char line[160];
    if (out.has_estimates) {
      std::snprintf(line, sizeof line, "%-12s %12.5f %10.5f %12.5f %11.4f %9.3g\n", r.name.c_str(),
                    r.estimate, r.naive_se, r.adjusted_se, r.adjusted_z, r.p_value);
    } else {
      std::snprintf(line, sizeof line, "%-12s %12s %10.5f %12.5f %11s %9s\n", r.name.c_str(), "",
                    r.naive_se, r.adjusted_se, "", "");
    }
    log << line;
  }
}

struct Contrast {
  std::string name;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd delta;
};

Contrast parse_contrast(const nlohmann::json& doc, const AnalysisOutput& fit) {
  const auto p = static_cast<Eigen::Index>(fit.coefficient_names.size());
  Contrast c;
  try {
    c.name = doc.value("name", "contrast");
    if (doc.contains("matrix")) {
      const auto rows = doc.at("matrix").get<std::vector<std::vector<double>>>();
      c.matrix.resize(static_cast<Eigen::Index>(rows.size()), p);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != p) {
          throw ContrastError("contrast row " + std::to_string(r + 1) + " has " +
                              std::to_string(rows[r].size()) + " entries; the fit has " +
                              std::to_string(p) + " coefficients");
        }
        for (Eigen::Index j = 0; j < p; ++j) c.matrix(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<std::size_t>(j)];
      }
    } else if (doc.contains("rows")) {
      const auto& rows = doc.at("rows");
      c.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), p);
      Eigen::Index r = 0;
      for (const auto& row : rows) {
        for (const auto& [name, value] : row.items()) {
          std::size_t j = 0;
          try {
            j = fit.index_of(name);
          } catch (const ConfigurationError&) {
            throw ContrastError("contrast names unknown coefficient '" + name + "'");
          }
          c.matrix(r, static_cast<Eigen::Index>(j)) = value.get<double>();
        }
        ++r;
      }
    } else {
      throw ContrastError("contrast needs 'matrix' or 'rows'");
    }
    if (doc.contains("delta")) {
      const auto d = doc.at("delta").get<std::vector<double>>();
      c.delta = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    } else {
      c.delta = Eigen::VectorXd::Zero(c.matrix.rows());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContrastError(std::string("malformed contrast: ") + e.what());
  }
  return c;
}

std::vector<VarianceChoice> variance_list(const std::string& text) {
  if (text == "both") return {VarianceChoice::naive, VarianceChoice::sandwich};
  return {parse_variance_choice(text)};
}

std::string estimator_label(VarianceChoice v) {
  return v == VarianceChoice::naive ? "unadjusted" : "adjusted";
}

}  // namespace

void run_fit(const FitArgs& args, std::ostream& log) {
  const ModelSpec spec = load_model_spec(args.spec);
  const VectorGlmModel model = spec.model();
  const Dataset data = load_data(args.data, spec, model, args.missing_token);

  FitOptions options;
  if (args.working) {
    options.dependence = parse_working(nlohmann::json(*args.working));
  } else if (spec.working) {
    options.dependence = *spec.working;
  }
  const FitResult fit = fit_gee(model, data, options);
  if (!fit.converged) {
    throw NumericalError("fit did not converge in " + std::to_string(fit.iterations) +
                         " iterations (last step " + fmt("%.3g", fit.last_step) + ")");
  }
  const AnalysisOutput out = make_analysis_output(model, fit, args.data, to_json(spec));
  write_analysis(args.out, out);
  if (args.export_external) {
    const std::string prefix = args.export_external->string();
    write_external_fit(prefix + "_means.csv", prefix + "_wcov.csv", model, data, fit);
  }
  log << "n = " << fit.n << ", working = " << to_string(fit.dependence.kind)
      << ", iterations = " << fit.iterations << "\n";
  print_table(out, log);
  for (std::size_t g = 0; g < fit.phi.size(); ++g) {
    log << "dispersion[" << fit.dispersion_labels[g] << "] = " << fmt("%.6g", fit.phi[g]) << "\n";
  }
}

void run_test(const TestArgs& args, std::ostream& log) {
  AnalysisOutput fit = read_analysis(args.fit);
  const Contrast c = parse_contrast(read_json(args.contrast), fit);
  for (auto v : variance_list(args.variance)) {
    const auto test = wald_f_test(c.matrix, c.delta, fit.beta, fit.vcov(v), fit.n, fit.p);
    log << c.name << " (" << estimator_label(v) << "): F = " << fmt("%.4f", test.f) << " on ("
        << test.df1 << ", " << test.df2 << ") df, p = " << fmt("%.4g", test.p_value) << "\n";
    record_test(fit, {c.name, std::string(to_string(v)), test});
  }
  write_analysis(args.fit, fit);
}

void run_region(const RegionArgs& args, std::ostream& log, std::ostream& warn) {
  const AnalysisOutput fit = read_analysis(args.fit);
  const auto names = split(args.pair, ',');
  if (names.size() != 2) throw ConfigurationError("--pair needs two coefficient names, e.g. b11,b21");
  const auto first = fit.index_of(names[0]);
  const auto second = fit.index_of(names[1]);
  std::vector<double> levels;
  for (const auto& l : split(args.levels, ',')) {
    try {
      levels.push_back(std::stod(l));
    } catch (const std::exception&) {
      throw ConfigurationError("cannot parse level '" + l + "'");
    }
  }
  if (levels.empty()) throw ConfigurationError("--levels is empty");
  const auto variances = variance_list(args.variance);
  std::vector<Eigen::MatrixXd> vcovs;
  for (auto v : variances) vcovs.push_back(fit.vcov(v));
  const double widest = *std::max_element(levels.begin(), levels.end());
  const RegionGrid grid =
      default_region_grid(first, second, widest, fit.beta, vcovs, fit.n, fit.p, args.grid);

  std::ostringstream csv;
  csv << "level,estimator,x,y\n";
  for (double level : levels) {
    for (auto v : variances) {
      const auto region =
          confidence_region(first, second, level, grid, fit.beta, fit.vcov(v), fit.n, fit.p);
      if (region.touches_edge) {
        warn << "warning: " << estimator_label(v) << " region at level " << level
             << " reaches the grid edge\n";
      }
      for (const auto& line : region.boundary) {
        for (const auto& pt : line) {
          csv << fmt("%.10g", level) << ',' << estimator_label(v) << ',' << fmt("%.10g", pt.x())
              << ',' << fmt("%.10g", pt.y()) << '\n';
        }
      }
      log << estimator_label(v) << " " << level << ": " << region.boundary.size()
          << " polyline(s)\n";
    }
  }
  std::filesystem::path out = args.out ? *args.out : args.fit;
  if (!args.out) out.replace_filename(args.fit.stem().string() + "_region.csv");
  write_text(out, csv.str());
  log << "wrote " << out.string() << "\n";
}

void run_simulate(const SimulateArgs& args, std::ostream& log) {
  SimulationConfig config = parse_simulation_config(read_json(args.config));
  if (args.age_pool) {
    CsvSchema schema;
    schema.responses = {"age"};
    const Dataset pool = load_csv_dataset(*args.age_pool, schema);
    config.age_pool.assign(pool.responses.data(), pool.responses.data() + pool.responses.rows());
  }
  config.threads = args.threads;
  const SimulationReport report = run_monte_carlo(config);
  auto json_path = args.out;
  json_path.replace_extension(".json");
  if (json_path == args.out) json_path.replace_extension(".report.json");
  write_text(args.out, report_csv(report));
  write_text(json_path, report_json(report).dump(2) + "\n");
  for (const auto& w : report.working) {
    log << to_string(w.working) << ": " << w.fitted << " fitted, " << w.failures << " failed;";
    for (std::size_t l = 0; l < kNominalLevels.size(); ++l) {
      log << " " << fmt("%g", 100 * kNominalLevels[l]) << "%: "
          << fmt("%.1f", 100 * w.unadjusted_type_i[l].rate) << " / "
          << fmt("%.1f", 100 * w.adjusted_type_i[l].rate);
    }
    log << "  (unadjusted / adjusted)\n";
  }
}

void run_adjust(const AdjustArgs& args, std::ostream& log) {
  const ExternalFit fit = load_external_fit(args.means, args.wcov, parse_external_links(args.link));
  const VarianceEstimate variance = adjust_external_fit(fit);
  std::map<std::string, double> estimates;
  if (args.estimates) estimates = load_estimates(*args.estimates);
  const AnalysisOutput out =
      make_adjusted_output(fit, variance, estimates, args.means.string());
  write_analysis(args.out, out);
  log << "n = " << out.n << " observations, " << out.p << " coefficients\n";
  print_table(out, log);
}

unsigned threads_from_environment() {
  const char* env = std::getenv("VECGEE_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigurationError("VECGEE_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

int exit_code(const std::exception& error) {
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    switch (e->kind()) {
      case ErrorKind::configuration:
        return 2;
      case ErrorKind::numerical:
        return 3;
      case ErrorKind::io:
        return 4;
    }
  }
  return 3;
}

}  // namespace vecgee::cli
