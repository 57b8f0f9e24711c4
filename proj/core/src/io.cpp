#include "vecgee/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vecgee/errors.hpp"

namespace vecgee {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string where(const std::string& source, std::size_t line, const std::string& column) {
  return source + ":" + std::to_string(line) + " column '" + column + "'";
}

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, std::size_t> header_index(const CsvRow& header) {
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.cells.size(); ++c) {
    if (!index.emplace(header.cells[c], c).second) {
      throw IngestionError("duplicate column '" + header.cells[c] + "'");
    }
  }
  return index;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw ConfigurationError("ragged matrix in JSON");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json test_json(const NamedTest& t) {
  return {{"name", t.name},
          {"variance", t.variance},
          {"contrast", matrix_json(t.test.contrast)},
          {"delta", vector_json(t.test.delta)},
          {"f", t.test.f},
          {"df", {t.test.df1, t.test.df2}},
          {"p_value", t.test.p_value}};
}

NamedTest test_from_json(const nlohmann::json& j) {
  NamedTest t;
  t.name = j.at("name").get<std::string>();
  t.variance = j.at("variance").get<std::string>();
  t.test.contrast = matrix_from_json(j.at("contrast"));
  t.test.delta = vector_from_json(j.at("delta"));
  t.test.f = j.at("f").get<double>();
  t.test.df1 = j.at("df").at(0).get<int>();
  t.test.df2 = j.at("df").at(1).get<int>();
  t.test.p_value = j.at("p_value").get<double>();
  return t;
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path.string() + "'");
  return in;
}

}  // namespace

std::vector<CsvRow> read_csv_rows(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start_line = line_no;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0;; ++i) {
      if (i == line.size()) {
        if (quoted) {
          // Quoted field spanning a line break.
          std::string more;
          if (!std::getline(in, more)) throw IngestionError("unterminated quote at line " + std::to_string(start_line));
          ++line_no;
          cell += '\n';
          line += '\n' + more;
          continue;
        }
        break;
      }
      const char ch = line[i];
      if (quoted) {
        if (ch == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cell += ch;
        }
      } else if (ch == '"') {
        quoted = true;
        was_quoted = true;
      } else if (ch == ',') {
        cells.push_back(was_quoted ? cell : trim(cell));
        cell.clear();
        was_quoted = false;
      } else {
        cell += ch;
      }
    }
    cells.push_back(was_quoted ? cell : trim(cell));
    if (cells.size() == 1 && cells[0].empty()) continue;
    rows.push_back({start_line, std::move(cells)});
  }
  return rows;
}

Dataset parse_csv_dataset(std::istream& in, const CsvSchema& schema, const std::string& source) {
  if (schema.responses.empty()) throw ConfigurationError("CSV schema declares no response columns");
  const auto rows = read_csv_rows(in);
  if (rows.empty()) throw IngestionError(source + ": no header row");
  const auto index = header_index(rows.front());
  auto column = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw IngestionError(source + ": column '" + name + "' not found");
    return it->second;
  };
  std::vector<std::size_t> rcols;
  std::vector<std::size_t> ccols;
  for (const auto& r : schema.responses) rcols.push_back(column(r));
  for (const auto& c : schema.covariates) ccols.push_back(column(c));

  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  Dataset data;
  data.response_names = schema.responses;
  data.covariate_names = schema.covariates;
  data.responses.resize(n, static_cast<Eigen::Index>(rcols.size()));
  data.observed.resize(n, static_cast<Eigen::Index>(rcols.size()));
  data.covariates.resize(n, static_cast<Eigen::Index>(ccols.size()));
  const std::size_t width = rows.front().cells.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i) + 1];
    if (row.cells.size() != width) {
      throw IngestionError(source + ":" + std::to_string(row.line) + ": expected " +
                           std::to_string(width) + " fields, found " +
                           std::to_string(row.cells.size()));
    }
    bool any = false;
    for (std::size_t k = 0; k < rcols.size(); ++k) {
      const auto& text = row.cells[rcols[k]];
      const auto kk = static_cast<Eigen::Index>(k);
      if (text.empty() || text == schema.missing_token) {
        data.responses(i, kk) = std::numeric_limits<double>::quiet_NaN();
        data.observed(i, kk) = false;
        continue;
      }
      const auto v = parse_double(text);
      if (!v || !std::isfinite(*v)) {
        throw IngestionError(where(source, row.line, schema.responses[k]) + ": cannot parse '" +
                             text + "'");
      }
      data.responses(i, kk) = *v;
      data.observed(i, kk) = true;
      any = true;
    }
    if (!any) {
      throw IngestionError(source + ":" + std::to_string(row.line) +
                           ": every response is missing");
    }
    for (std::size_t c = 0; c < ccols.size(); ++c) {
      const auto& text = row.cells[ccols[c]];
      const auto v = parse_double(text);
      if (!v || !std::isfinite(*v)) {
        throw IngestionError(where(source, row.line, schema.covariates[c]) + ": cannot parse '" +
                             text + "'");
      }
      data.covariates(i, static_cast<Eigen::Index>(c)) = *v;
    }
  }
  data.validate();
  return data;
}

Dataset load_csv_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
  auto in = open_input(path, "data file");
  return parse_csv_dataset(in, schema, path.string());
}

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data,
                       const std::string& missing_token) {
  std::ostringstream out;
  bool first = true;
  for (const auto& name : data.covariate_names) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  for (const auto& name : data.response_names) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.responses.rows(); ++i) {
    first = true;
    for (Eigen::Index c = 0; c < data.covariates.cols(); ++c) {
      out << (first ? "" : ",") << format17(data.covariates(i, c));
      first = false;
    }
    for (Eigen::Index k = 0; k < data.responses.cols(); ++k) {
      out << (first ? "" : ",");
      if (data.observed(i, k)) {
        out << format17(data.responses(i, k));
      } else {
        out << missing_token;
      }
      first = false;
    }
    out << '\n';
  }
  write_text(path, out.str());
}

std::size_t AnalysisOutput::index_of(const std::string& coefficient) const {
  for (std::size_t j = 0; j < coefficient_names.size(); ++j) {
    if (coefficient_names[j] == coefficient) return j;
  }
  throw ConfigurationError("unknown coefficient '" + coefficient + "'");
}

AnalysisOutput make_analysis_output(const VectorGlmModel& model, const FitResult& fit,
                                    std::string data_source, nlohmann::json model_spec) {
  AnalysisOutput out;
  out.data_source = std::move(data_source);
  out.coefficient_names = fit.coefficient_names;
  out.beta = fit.beta;
  out.naive_vcov = fit.naive_vcov;
  out.sandwich_vcov = fit.sandwich_vcov;
  out.n = fit.n;
  out.p = fit.p;
  out.coefficients = coefficient_table(fit.coefficient_names, fit.beta, fit.naive_vcov,
                                       fit.sandwich_vcov, fit.n, fit.p);
  out.dispersion_labels = fit.dispersion_labels;
  out.dispersion = fit.phi;
  out.dependence.kind = std::string(to_string(fit.dependence.kind));
  for (std::size_t k = 0; k < model.components(); ++k) {
    out.dependence.components.push_back(model.component(k).name);
  }
  if (fit.dependence.kind == DependenceKind::odds_ratio) {
    out.dependence.gamma = fit.dependence.gamma;
  } else {
    out.dependence.correlation = fit.dependence.correlation;
  }
  out.dependence.saturated = fit.dependence.saturated;
  out.convergence = {fit.iterations, fit.converged, fit.ee_residual_norm, fit.last_step};
  out.inactive_slots = fit.inactive_slots;
  out.model = std::move(model_spec);
  return out;
}

nlohmann::json to_json(const AnalysisOutput& o) {
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& r : o.coefficients) {
    nlohmann::json row = {{"name", r.name}, {"naive_se", r.naive_se}, {"adjusted_se", r.adjusted_se}};
    if (o.has_estimates) {
      row["estimate"] = r.estimate;
      row["adjusted_z"] = r.adjusted_z;
      row["p_value"] = r.p_value;
    } else {
      row["estimate"] = nullptr;
      row["adjusted_z"] = nullptr;
      row["p_value"] = nullptr;
    }
    coefs.push_back(row);
  }
  nlohmann::json dispersion = nlohmann::json::array();
  for (std::size_t g = 0; g < o.dispersion.size(); ++g) {
    dispersion.push_back({{"group", g < o.dispersion_labels.size() ? o.dispersion_labels[g] : 0},
                          {"phi", o.dispersion[g]}});
  }
  nlohmann::json saturated = nlohmann::json::array();
  for (const auto& [a, b] : o.dependence.saturated) saturated.push_back({a, b});
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : o.tests) tests.push_back(test_json(t));

  nlohmann::json j;
  j["data"] = o.data_source;
  j["n"] = o.n;
  j["p"] = o.p;
  j["coefficient_names"] = o.coefficient_names;
  j["beta"] = o.has_estimates ? vector_json(o.beta) : nlohmann::json(nullptr);
  j["vcov"] = {{"naive", matrix_json(o.naive_vcov)}, {"sandwich", matrix_json(o.sandwich_vcov)}};
  j["coefficients"] = coefs;
  j["dispersion"] = dispersion;
  j["dependence"] = {{"kind", o.dependence.kind},
                     {"components", o.dependence.components},
                     {"correlation", matrix_json(o.dependence.correlation)},
                     {"gamma", matrix_json(o.dependence.gamma)},
                     {"saturated", saturated}};
  j["convergence"] = {{"iterations", o.convergence.iterations},
                      {"converged", o.convergence.converged},
                      {"ee_residual_norm", o.convergence.ee_residual_norm},
                      {"last_step", o.convergence.last_step}};
  j["inactive_slots"] = o.inactive_slots;
  j["tests"] = tests;
  if (!o.model.is_null()) j["model"] = o.model;
  return j;
}

AnalysisOutput analysis_from_json(const nlohmann::json& j) {
  AnalysisOutput o;
  try {
    o.data_source = j.at("data").get<std::string>();
    o.n = j.at("n").get<std::size_t>();
    o.p = j.at("p").get<std::size_t>();
    o.coefficient_names = j.at("coefficient_names").get<std::vector<std::string>>();
    o.has_estimates = !j.at("beta").is_null();
    o.beta = o.has_estimates ? vector_from_json(j.at("beta"))
                             : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(o.coefficient_names.size()));
    o.naive_vcov = matrix_from_json(j.at("vcov").at("naive"));
    o.sandwich_vcov = matrix_from_json(j.at("vcov").at("sandwich"));
    for (const auto& r : j.at("coefficients")) {
      CoefficientRow row;
      row.name = r.at("name").get<std::string>();
      row.naive_se = r.at("naive_se").get<double>();
      row.adjusted_se = r.at("adjusted_se").get<double>();
      if (o.has_estimates) {
        row.estimate = r.at("estimate").get<double>();
        row.adjusted_z = r.at("adjusted_z").get<double>();
        row.p_value = r.at("p_value").get<double>();
      }
      o.coefficients.push_back(std::move(row));
    }
    for (const auto& d : j.at("dispersion")) {
      o.dispersion_labels.push_back(d.at("group").get<int>());
      o.dispersion.push_back(d.at("phi").get<double>());
    }
    const auto& dep = j.at("dependence");
    o.dependence.kind = dep.at("kind").get<std::string>();
    o.dependence.components = dep.at("components").get<std::vector<std::string>>();
    o.dependence.correlation = matrix_from_json(dep.at("correlation"));
    o.dependence.gamma = matrix_from_json(dep.at("gamma"));
    for (const auto& s : dep.at("saturated")) {
      o.dependence.saturated.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
    }
    const auto& conv = j.at("convergence");
    o.convergence.iterations = conv.at("iterations").get<int>();
    o.convergence.converged = conv.at("converged").get<bool>();
    o.convergence.ee_residual_norm = conv.at("ee_residual_norm").get<double>();
    o.convergence.last_step = conv.at("last_step").get<double>();
    o.inactive_slots = j.at("inactive_slots").get<std::vector<std::size_t>>();
    for (const auto& t : j.at("tests")) o.tests.push_back(test_from_json(t));
    if (j.contains("model")) o.model = j.at("model");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed fit record: ") + e.what());
  }
  const auto p = static_cast<Eigen::Index>(o.coefficient_names.size());
  if (o.beta.size() != p || o.naive_vcov.rows() != p || o.naive_vcov.cols() != p ||
      o.sandwich_vcov.rows() != p || o.sandwich_vcov.cols() != p) {
    throw ConfigurationError("malformed fit record: dimensions disagree");
  }
  return o;
}

void record_test(AnalysisOutput& output, NamedTest test) {
  for (auto& t : output.tests) {
    if (t.name == test.name && t.variance == test.variance) {
      t = std::move(test);
      return;
    }
  }
  output.tests.push_back(std::move(test));
}

std::string analysis_csv(const AnalysisOutput& o) {
  std::ostringstream out;
  out << "coefficient,estimate,naive_se,adjusted_se,adjusted_z,p_value\n";
  for (const auto& r : o.coefficients) {
    out << r.name << ',';
    if (o.has_estimates) {
      out << format6(r.estimate) << ',' << format6(r.naive_se) << ',' << format6(r.adjusted_se)
          << ',' << format6(r.adjusted_z) << ',' << format6(r.p_value) << '\n';
    } else {
      out << ',' << format6(r.naive_se) << ',' << format6(r.adjusted_se) << ",,\n";
    }
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_input(path, "JSON file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

AnalysisOutput read_analysis(const std::filesystem::path& path) {
  return analysis_from_json(read_json(path));
}

void write_analysis(const std::filesystem::path& path, const AnalysisOutput& output) {
  auto csv = path;
  csv.replace_extension(".csv");
  auto json_path = path;
  if (csv == path) json_path.replace_extension(".json");
  write_text(json_path, to_json(output).dump(2) + "\n");
  write_text(csv, analysis_csv(output));
}

LinkFamily ExternalLinks::for_component(const std::string& name) const {
  const auto it = by_component.find(name);
  if (it != by_component.end()) return it->second;
  if (all) return *all;
  throw ConfigurationError("no link given for component '" + name + "'");
}

ExternalLinks parse_external_links(const std::string& text) {
  ExternalLinks links;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      links.all = parse_link(item);
    } else {
      links.by_component[trim(item.substr(0, eq))] = parse_link(trim(item.substr(eq + 1)));
    }
  }
  return links;
}

ExternalFit parse_external_fit(std::istream& means, std::istream& wcov, const ExternalLinks& links) {
  const auto mrows = read_csv_rows(means);
  if (mrows.empty()) throw IngestionError("means file is empty");
  const auto& header = mrows.front().cells;
  const std::vector<std::string> fixed = {"obs_id", "component", "response", "fitted_mean"};
  if (header.size() <= fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw IngestionError("means file header must start with obs_id,component,response,fitted_mean "
                         "followed by one column per coefficient");
  }
  ExternalFit fit;
  fit.slot_names.assign(header.begin() + 4, header.end());
  const auto p = static_cast<Eigen::Index>(fit.slot_names.size());

  struct Pending {
    std::vector<std::size_t> components;
    std::vector<double> response;
    std::vector<double> mean;
    std::vector<Eigen::RowVectorXd> design;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> pending;
  auto number = [](const CsvRow& row, std::size_t c, const std::string& column, const char* file) {
    const auto v = parse_double(row.cells[c]);
    if (!v || !std::isfinite(*v)) {
      throw IngestionError(std::string(file) + ":" + std::to_string(row.line) + " column '" +
                           column + "': cannot parse '" + row.cells[c] + "'");
    }
    return *v;
  };
  for (std::size_t r = 1; r < mrows.size(); ++r) {
    const auto& row = mrows[r];
    if (row.cells.size() != header.size()) {
      throw IngestionError("means:" + std::to_string(row.line) + ": expected " +
                           std::to_string(header.size()) + " fields");
    }
    const auto& id = row.cells[0];
    const auto& comp = row.cells[1];
    auto it = std::find(fit.component_names.begin(), fit.component_names.end(), comp);
    std::size_t k = static_cast<std::size_t>(it - fit.component_names.begin());
    if (it == fit.component_names.end()) fit.component_names.push_back(comp);
    auto [pos, inserted] = pending.try_emplace(id);
    if (inserted) order.push_back(id);
    auto& obs = pos->second;
    if (std::find(obs.components.begin(), obs.components.end(), k) != obs.components.end()) {
      throw IngestionError("observation '" + id + "' lists component '" + comp + "' twice");
    }
    obs.components.push_back(k);
    obs.response.push_back(number(row, 2, "response", "means"));
    obs.mean.push_back(number(row, 3, "fitted_mean", "means"));
    Eigen::RowVectorXd x(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      x(j) = number(row, static_cast<std::size_t>(j) + 4, fit.slot_names[static_cast<std::size_t>(j)], "means");
    }
    obs.design.push_back(x);
  }
  for (const auto& name : fit.component_names) fit.links.push_back(links.for_component(name));

  std::map<std::string, std::size_t> obs_index;
  for (const auto& id : order) {
    auto& src = pending.at(id);
    ExternalObservation obs;
    obs.id = id;
    const auto m = static_cast<Eigen::Index>(src.components.size());
    obs.components = src.components;
    obs.response = Eigen::Map<Eigen::VectorXd>(src.response.data(), m);
    obs.mean = Eigen::Map<Eigen::VectorXd>(src.mean.data(), m);
    obs.design.resize(m, p);
    for (Eigen::Index r = 0; r < m; ++r) obs.design.row(r) = src.design[static_cast<std::size_t>(r)];
    obs.working = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
    obs_index[id] = fit.observations.size();
    fit.observations.push_back(std::move(obs));
  }

  const auto wrows = read_csv_rows(wcov);
  if (wrows.empty()) throw IngestionError("working covariance file is empty");
  const std::vector<std::string> wheader = {"obs_id", "row", "col", "value"};
  if (wrows.front().cells != wheader) {
    throw IngestionError("working covariance header must be obs_id,row,col,value");
  }
  auto position = [&](const ExternalObservation& obs, const std::string& comp, std::size_t line) {
    const auto it = std::find(fit.component_names.begin(), fit.component_names.end(), comp);
    if (it != fit.component_names.end()) {
      const auto k = static_cast<std::size_t>(it - fit.component_names.begin());
      const auto pos = std::find(obs.components.begin(), obs.components.end(), k);
      if (pos != obs.components.end()) return static_cast<Eigen::Index>(pos - obs.components.begin());
    }
    throw IngestionError("wcov:" + std::to_string(line) + ": component '" + comp +
                         "' is not observed for observation '" + obs.id + "'");
  };
  for (std::size_t r = 1; r < wrows.size(); ++r) {
    const auto& row = wrows[r];
    if (row.cells.size() != 4) {
      throw IngestionError("wcov:" + std::to_string(row.line) + ": expected 4 fields");
    }
    const auto it = obs_index.find(row.cells[0]);
    if (it == obs_index.end()) {
      throw IngestionError("wcov:" + std::to_string(row.line) + ": observation '" + row.cells[0] +
                           "' has no fitted means");
    }
    auto& obs = fit.observations[it->second];
    const auto a = position(obs, row.cells[1], row.line);
    const auto b = position(obs, row.cells[2], row.line);
    const double v = number(row, 3, "value", "wcov");
    for (const auto& [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
      const double prev = obs.working(i, j);
      if (!std::isnan(prev) && std::abs(prev - v) > 1e-12 * std::max(1.0, std::abs(v))) {
        throw IngestionError("wcov:" + std::to_string(row.line) + ": observation '" + obs.id +
                             "' has conflicting entries for (" + row.cells[1] + ", " +
                             row.cells[2] + ")");
      }
      obs.working(i, j) = v;
    }
  }
  for (const auto& obs : fit.observations) {
    if (obs.working.hasNaN()) {
      throw IngestionError("working covariance for observation '" + obs.id + "' is incomplete: " +
                           std::to_string(obs.components.size()) + " x " +
                           std::to_string(obs.components.size()) + " entries expected");
    }
  }
  return fit;
}

ExternalFit load_external_fit(const std::filesystem::path& means, const std::filesystem::path& wcov,
                              const ExternalLinks& links) {
  auto min = open_input(means, "means file");
  auto win = open_input(wcov, "working covariance file");
  return parse_external_fit(min, win, links);
}

void write_external_fit(const std::filesystem::path& means, const std::filesystem::path& wcov,
                        const VectorGlmModel& model, const Dataset& data, const FitResult& fit) {
  const auto fitted = fitted_observations(model, data, fit);
  std::ostringstream m;
  m << "obs_id,component,response,fitted_mean";
  for (const auto& name : fit.coefficient_names) m << ',' << name;
  m << '\n';
  std::ostringstream w;
  w << "obs_id,row,col,value\n";
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    const auto& t = fitted[i].terms;
    const std::string id = std::to_string(i + 1);
    for (std::size_t r = 0; r < t.components.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      m << id << ',' << model.component(t.components[r]).name << ',' << format17(t.response(ri))
        << ',' << format17(t.mean(ri));
      for (Eigen::Index j = 0; j < t.design.cols(); ++j) m << ',' << format17(t.design(ri, j));
      m << '\n';
      for (std::size_t c = r; c < t.components.size(); ++c) {
        w << id << ',' << model.component(t.components[r]).name << ','
          << model.component(t.components[c]).name << ','
          << format17(fitted[i].working(ri, static_cast<Eigen::Index>(c))) << '\n';
      }
    }
  }
  write_text(means, m.str());
  write_text(wcov, w.str());
}

std::map<std::string, double> load_estimates(const std::filesystem::path& path) {
  auto in = open_input(path, "estimates file");
  const auto rows = read_csv_rows(in);
  if (rows.empty() || rows.front().cells.size() < 2 || rows.front().cells[0] != "coefficient" ||
      rows.front().cells[1] != "estimate") {
    throw IngestionError(path.string() + ": header must be coefficient,estimate");
  }
  std::map<std::string, double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto v = row.cells.size() >= 2 ? parse_double(row.cells[1]) : std::nullopt;
    if (!v) {
      throw IngestionError(path.string() + ":" + std::to_string(row.line) +
                           " column 'estimate': cannot parse value");
    }
    out[row.cells[0]] = *v;
  }
  return out;
}

AnalysisOutput make_adjusted_output(const ExternalFit& fit, const VarianceEstimate& variance,
                                    const std::map<std::string, double>& estimates,
                                    std::string data_source) {
  AnalysisOutput out;
  out.data_source = std::move(data_source);
  out.coefficient_names = fit.slot_names;
  const auto p = static_cast<Eigen::Index>(fit.slot_names.size());
  out.beta = Eigen::VectorXd::Zero(p);
  out.has_estimates = !estimates.empty();
  if (out.has_estimates) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto it = estimates.find(fit.slot_names[static_cast<std::size_t>(j)]);
      if (it == estimates.end()) {
        throw IngestionError("no estimate given for coefficient '" +
                             fit.slot_names[static_cast<std::size_t>(j)] + "'");
      }
      out.beta(j) = it->second;
    }
  }
  out.naive_vcov = variance.naive;
  out.sandwich_vcov = variance.sandwich;
  out.n = variance.n;
  out.p = fit.slot_names.size();
  out.coefficients = coefficient_table(out.coefficient_names, out.beta, out.naive_vcov,
                                       out.sandwich_vcov, out.n, out.p);
  out.dependence.kind = "external";
  out.dependence.components = fit.component_names;
  out.convergence.converged = true;
  return out;
}

}  // namespace vecgee
