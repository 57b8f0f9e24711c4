#include "vecgee/simulation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "vecgee/errors.hpp"
#include "vecgee/gee.hpp"
#include "vecgee/inference.hpp"

namespace vecgee {

namespace {

constexpr std::size_t kSorbinilSubjects = 41;

// Treatment of (left, right) eyes for each subject in the trial layout.
std::array<std::pair<double, double>, kSorbinilSubjects> sorbinil_layout() {
  std::array<std::pair<double, double>, kSorbinilSubjects> out{};
  std::size_t i = 0;
  auto fill = [&](std::size_t count, double l, double r) {
    for (std::size_t c = 0; c < count; ++c) out[i++] = {l, r};
  };
  fill(6, 1, 1);
  fill(14, 1, 0);
  fill(14, 0, 1);
  fill(7, 0, 0);
  return out;
}

ComponentSpec component(std::string name, std::string response, LinkFamily link,
                        VarianceFamily variance, DispersionMode dispersion, int group,
                        std::vector<FormulaTerm> terms) {
  return {std::move(name), std::move(response), {link, variance, dispersion, group},
          std::move(terms)};
}

FormulaTerm term(std::string coefficient, std::string covariate) {
  return {std::move(coefficient), std::move(covariate), std::nullopt};
}

const std::string kIntercept{kInterceptColumn};

struct Hypothesis {
  Eigen::MatrixXd contrast;
  Eigen::VectorXd delta;
};

Hypothesis null_hypothesis(const SimulationConfig& config) {
  if (config.design == SimulationDesign::burn) {
    const BurnParameters b;
    Eigen::VectorXd delta(4);
    delta << b.y1_intercept, b.y1_age, b.y2_intercept, b.y2_age;
    return {Eigen::MatrixXd::Identity(4, 4), delta};
  }
  Eigen::MatrixXd m(2, 4);
  m << 1, 0, -1, 0, 0, 1, 0, -1;
  return {m, Eigen::VectorXd::Zero(2)};
}

VectorGlmModel design_model(SimulationDesign design) {
  return design == SimulationDesign::burn ? burn_model() : sorbinil_four_parameter_model();
}

Dataset generate(const SimulationConfig& config, const std::vector<double>& pool,
                 std::size_t replicate) {
  SplitMix64 rng = SplitMix64::substream(config.seed, replicate);
  if (config.design == SimulationDesign::burn) {
    return generate_burn_dataset(config.sample_size, rng, pool, config.gamma_link, {});
  }
  return generate_sorbinil_dataset(rng, config.random_effect_sd, {});
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::optional<Eigen::MatrixXd> spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

double correlation(const Eigen::MatrixXd& v, Eigen::Index a, Eigen::Index b) {
  const double denom = std::sqrt(v(a, a) * v(b, b));
  return denom > 0.0 ? v(a, b) / denom : 0.0;
}

void summarize(WorkingReport& report, const std::vector<std::string>& names,
               const std::optional<Eigen::MatrixXd>& supplied_truth, std::size_t n) {
  std::vector<const ReplicateOutcome*> ok;
  for (const auto& r : report.replicates) {
    if (r.ok) ok.push_back(&r);
  }
  report.fitted = ok.size();
  report.failures = report.replicates.size() - ok.size();
  const auto p = static_cast<Eigen::Index>(names.size());

  if (supplied_truth) {
    report.truth = *supplied_truth;
  } else {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto* r : ok) mean += r->beta;
    if (!ok.empty()) mean /= static_cast<double>(ok.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const auto* r : ok) {
      const Eigen::VectorXd d = r->beta - mean;
      cov += d * d.transpose();
    }
    const double denom = ok.size() > 1 ? static_cast<double>(ok.size() - 1) : 1.0;
    report.truth = static_cast<double>(n) * cov / denom;
  }

  auto add = [&](std::string quantity, double truth, auto&& extract) {
    std::vector<double> adj;
    std::vector<double> unadj;
    for (const auto* r : ok) {
      adj.push_back(extract(r->adjusted));
      unadj.push_back(extract(r->unadjusted));
    }
    const auto a = moments(adj);
    const auto u = moments(unadj);
    report.quantities.push_back({std::move(quantity), truth, a.mean, a.sd, u.mean, u.sd});
  };

  for (Eigen::Index j = 0; j < p; ++j) {
    add("sd(" + names[static_cast<std::size_t>(j)] + ")", std::sqrt(report.truth(j, j)),
        [j](const Eigen::MatrixXd& v) { return std::sqrt(v(j, j)); });
  }
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      add("cor(" + names[static_cast<std::size_t>(a)] + "," + names[static_cast<std::size_t>(b)] +
              ")",
          correlation(report.truth, a, b),
          [a, b](const Eigen::MatrixXd& v) { return correlation(v, a, b); });
    }
  }
  add("norm(V)", 0.0,
      [&](const Eigen::MatrixXd& v) { return matrix_norm_error(v, report.truth); });
  if (const auto truth_inv = spd_inverse(report.truth)) {
    add("norm(Vinv)", 0.0, [&](const Eigen::MatrixXd& v) {
      const auto inv = spd_inverse(v);
      return inv ? matrix_norm_error(*inv, *truth_inv) : std::nan("");
    });
  }

  for (std::size_t l = 0; l < kNominalLevels.size(); ++l) {
    std::size_t rej_u = 0;
    std::size_t rej_a = 0;
    for (const auto* r : ok) {
      rej_u += r->p_unadjusted < kNominalLevels[l] ? 1 : 0;
      rej_a += r->p_adjusted < kNominalLevels[l] ? 1 : 0;
    }
    report.unadjusted_type_i[l] = type_i_error(rej_u, ok.size());
    report.adjusted_type_i[l] = type_i_error(rej_a, ok.size());
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string_view to_string(SimulationDesign design) {
  return design == SimulationDesign::burn ? "burn" : "sorbinil";
}

SimulationDesign parse_design(std::string_view name) {
  if (name == "burn") return SimulationDesign::burn;
  if (name == "sorbinil") return SimulationDesign::sorbinil;
  throw ConfigurationError("unknown simulation design '" + std::string(name) + "'");
}

std::vector<double> synthetic_age_pool() {
  std::vector<double> pool(kBurnPoolSize);
  for (std::size_t i = 0; i < kBurnPoolSize; ++i) {
    pool[i] = 0.1 + (90.0 - 0.1) * static_cast<double>(i) / static_cast<double>(kBurnPoolSize - 1);
  }
  return pool;
}

void SimulationConfig::validate() const {
  if (replicates < 1) throw ConfigurationError("replicates must be at least 1");
  if (design == SimulationDesign::burn && sample_size < 50) {
    throw ConfigurationError("burn sample_size must be at least 50");
  }
  if (!(random_effect_sd >= 0.0)) throw ConfigurationError("random_effect_sd must be >= 0");
  if (!std::isfinite(gamma_link)) throw ConfigurationError("gamma_link must be finite");
  for (auto kind : working) {
    if (kind == DependenceKind::fixed) {
      throw ConfigurationError("fixed working correlation is not available in simulations");
    }
  }
  for (double age : age_pool) {
    if (!std::isfinite(age)) throw ConfigurationError("age pool contains a non-finite value");
  }
  if (true_vcov && (true_vcov->rows() != 4 || true_vcov->cols() != 4)) {
    throw ConfigurationError("true_vcov must be 4 x 4");
  }
}

std::vector<DependenceKind> SimulationConfig::working_models() const {
  if (!working.empty()) return working;
  if (design == SimulationDesign::burn) return {DependenceKind::independence};
  return {DependenceKind::independence, DependenceKind::unstructured, DependenceKind::odds_ratio};
}

SimulationConfig parse_simulation_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigurationError("simulation config must be a JSON object");
  SimulationConfig c;
  try {
    if (!doc.contains("design")) throw ConfigurationError("simulation config needs 'design'");
    c.design = parse_design(doc.at("design").get<std::string>());
    if (doc.contains("replicates")) c.replicates = doc.at("replicates").get<std::size_t>();
    if (doc.contains("sample_size")) c.sample_size = doc.at("sample_size").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("gamma_link")) c.gamma_link = doc.at("gamma_link").get<double>();
    if (doc.contains("random_effect_sd")) {
      c.random_effect_sd = doc.at("random_effect_sd").get<double>();
    }
    if (doc.contains("working")) {
      const auto& w = doc.at("working");
      if (w.is_string()) {
        c.working.push_back(parse_dependence(w.get<std::string>()));
      } else {
        for (const auto& item : w) c.working.push_back(parse_dependence(item.get<std::string>()));
      }
    }
    if (doc.contains("age_pool")) c.age_pool = doc.at("age_pool").get<std::vector<double>>();
    if (doc.contains("true_vcov")) {
      const auto rows = doc.at("true_vcov").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                        rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw ConfigurationError("true_vcov is ragged");
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
      }
      c.true_vcov = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const SimulationConfig& config) {
  nlohmann::json j;
  j["design"] = std::string(to_string(config.design));
  j["replicates"] = config.replicates;
  if (config.design == SimulationDesign::burn) {
    j["sample_size"] = config.sample_size;
    j["gamma_link"] = config.gamma_link;
    j["age_pool"] = config.age_pool.empty() ? "synthetic" : "supplied";
  } else {
    j["random_effect_sd"] = config.random_effect_sd;
  }
  j["seed"] = config.seed;
  nlohmann::json w = nlohmann::json::array();
  for (auto kind : config.working_models()) w.push_back(std::string(to_string(kind)));
  j["working"] = w;
  return j;
}

Dataset generate_burn_dataset(std::size_t n, std::uint64_t seed,
                              const std::vector<double>& age_pool, double gamma_link,
                              const BurnParameters& params) {
  SplitMix64 rng(seed);
  return generate_burn_dataset(n, rng, age_pool, gamma_link, params);
}

Dataset generate_burn_dataset(std::size_t n, SplitMix64& rng,
                              const std::vector<double>& age_pool, double gamma_link,
                              const BurnParameters& params) {
  const std::vector<double> fallback = age_pool.empty() ? synthetic_age_pool() : std::vector<double>{};
  const auto& pool = age_pool.empty() ? fallback : age_pool;
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd y(rows, 2);
  CovariateTable x(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double age = pool[rng.index(pool.size())];
    const double mu2 = mean_value(LinkFamily::logit, params.y2_intercept + params.y2_age * age);
    const double y2 = rng.bernoulli(mu2) ? 1.0 : 0.0;
    const double mean1 = params.y1_intercept + params.y1_age * age + gamma_link * (y2 - mu2);
    y(i, 0) = rng.normal(mean1, params.y1_sd);
    y(i, 1) = y2;
    x(i, 0) = age;
  }
  return make_dataset({"y1", "y2"}, y, {"age"}, x);
}

Dataset generate_sorbinil_dataset(std::uint64_t seed, double random_effect_sd,
                                  const SorbinilParameters& params) {
  SplitMix64 rng(seed);
  return generate_sorbinil_dataset(rng, random_effect_sd, params);
}

Dataset generate_sorbinil_dataset(SplitMix64& rng, double random_effect_sd,
                                  const SorbinilParameters& params) {
  const auto layout = sorbinil_layout();
  const auto rows = static_cast<Eigen::Index>(kSorbinilSubjects);
  const double scale = 0.5 / 4.0;
  Eigen::MatrixXd y(rows, 2);
  CovariateTable x(rows, 2);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto [left, right] = layout[static_cast<std::size_t>(i)];
    const double a0 = rng.normal(0.0, random_effect_sd);
    const double a1 = rng.normal(0.0, random_effect_sd);
    const double pl = mean_value(LinkFamily::logit, params.intercept + a0 + (params.sorbinil + a1) * left);
    const double pr = mean_value(LinkFamily::logit, params.intercept + a0 + (params.sorbinil + a1) * right);
    y(i, 0) = scale * rng.binomial(params.trials, pl);
    y(i, 1) = scale * rng.binomial(params.trials, pr);
    x(i, 0) = left;
    x(i, 1) = right;
  }
  return make_dataset({"left", "right"}, y, {"sorbinil_left", "sorbinil_right"}, x);
}

VectorGlmModel burn_model() {
  return VectorGlmModel({
      component("y1", "y1", LinkFamily::identity, VarianceFamily::constant,
                DispersionMode::estimated, 1, {term("b10", kIntercept), term("b11", "age")}),
      component("y2", "y2", LinkFamily::logit, VarianceFamily::bernoulli,
                DispersionMode::fixed_at_one, 2, {term("b20", kIntercept), term("b21", "age")}),
  });
}

VectorGlmModel sorbinil_symmetric_model() {
  return VectorGlmModel({
      component("left", "left", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1, {term("b0", kIntercept), term("b1", "sorbinil_left")}),
      component("right", "right", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1, {term("b0", kIntercept), term("b1", "sorbinil_right")}),
  });
}

VectorGlmModel sorbinil_four_parameter_model() {
  return VectorGlmModel({
      component("left", "left", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1, {term("bL0", kIntercept), term("bL1", "sorbinil_left")}),
      component("right", "right", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1, {term("bR0", kIntercept), term("bR1", "sorbinil_right")}),
  });
}

VectorGlmModel sorbinil_interference_model() {
  return VectorGlmModel({
      component("left", "left", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1,
                {term("b0", kIntercept), term("b1", "sorbinil_left"), term("b2", "sorbinil_right")}),
      component("right", "right", LinkFamily::logit, VarianceFamily::proportion,
                DispersionMode::estimated, 1,
                {term("b0", kIntercept), term("b1", "sorbinil_right"), term("b2", "sorbinil_left")}),
  });
}

double matrix_norm_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw ConfigurationError("matrix_norm_error: dimension mismatch");
  }
  if (estimate.size() == 0) return 0.0;
  return (estimate - truth).cwiseAbs().colwise().sum().maxCoeff();
}

RejectionRate type_i_error(std::size_t rejections, std::size_t trials) {
  if (rejections > trials) throw ConfigurationError("more rejections than trials");
  RejectionRate r;
  r.rejections = rejections;
  r.trials = trials;
  if (trials > 0) {
    r.rate = static_cast<double>(rejections) / static_cast<double>(trials);
    r.se = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(trials));
  }
  return r;
}

SimulationReport run_monte_carlo(const SimulationConfig& config) {
  config.validate();
  const auto workings = config.working_models();
  const VectorGlmModel model = design_model(config.design);
  const Hypothesis h0 = null_hypothesis(config);
  const std::vector<double> pool = config.age_pool.empty() ? synthetic_age_pool() : config.age_pool;
  const std::size_t n =
      config.design == SimulationDesign::burn ? config.sample_size : kSorbinilSubjects;

  SimulationReport report;
  report.config = config;
  report.coefficient_names = model.coefficient_names();
  report.sample_size = n;
  report.df1 = static_cast<int>(h0.contrast.rows());
  report.df2 = static_cast<int>(n - model.coefficients());
  report.working.resize(workings.size());
  for (std::size_t w = 0; w < workings.size(); ++w) {
    report.working[w].working = workings[w];
    report.working[w].replicates.resize(config.replicates);
  }

  auto run_one = [&](std::size_t r) {
    const Dataset data = generate(config, pool, r);
    for (std::size_t w = 0; w < workings.size(); ++w) {
      auto& out = report.working[w].replicates[r];
      FitOptions options;
      options.dependence.kind = workings[w];
      try {
        const FitResult fit = fit_gee(model, data, options);
        if (!fit.converged) {
          out.failure = "not converged";
          continue;
        }
        out.beta = fit.beta;
        out.unadjusted = fit.naive_vcov;
        out.adjusted = fit.sandwich_vcov;
        out.p_unadjusted =
            wald_f_test(h0.contrast, h0.delta, fit.beta, fit.naive_vcov, fit.n, fit.p).p_value;
        out.p_adjusted =
            wald_f_test(h0.contrast, h0.delta, fit.beta, fit.sandwich_vcov, fit.n, fit.p).p_value;
        out.ok = true;
      } catch (const NumericalError& e) {
        out.failure = e.what();
      } catch (const ContrastError& e) {
        out.failure = e.what();
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.replicates)));
  if (threads == 1) {
    for (std::size_t r = 0; r < config.replicates; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool_threads;
    for (unsigned t = 0; t < threads; ++t) {
      pool_threads.emplace_back([&] {
        for (;;) {
          const std::size_t r = next.fetch_add(1);
          if (r >= config.replicates) return;
          try {
            run_one(r);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(config.replicates);
            return;
          }
        }
      });
    }
    for (auto& t : pool_threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  for (auto& w : report.working) summarize(w, report.coefficient_names, config.true_vcov, n);
  return report;
}

std::string report_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "working,quantity,truth,adjusted_mean,adjusted_sd,unadjusted_mean,unadjusted_sd\n";
  for (const auto& w : report.working) {
    const std::string name(to_string(w.working));
    for (const auto& q : w.quantities) {
      out << name << ',' << q.quantity << ',' << format_number(q.truth) << ','
          << format_number(q.adjusted_mean) << ',' << format_number(q.adjusted_sd) << ','
          << format_number(q.unadjusted_mean) << ',' << format_number(q.unadjusted_sd) << '\n';
    }
    // Type I rows: truth is the nominal level, means are rejection rates and
    // sds their binomial Monte Carlo standard errors, all in percent.
    for (std::size_t l = 0; l < kNominalLevels.size(); ++l) {
      const auto& a = w.adjusted_type_i[l];
      const auto& u = w.unadjusted_type_i[l];
      out << name << ",type_i," << format_number(100.0 * kNominalLevels[l]) << ','
          << format_number(100.0 * a.rate) << ',' << format_number(100.0 * a.se) << ','
          << format_number(100.0 * u.rate) << ',' << format_number(100.0 * u.se) << '\n';
    }
    out << name << ",failures," << w.failures << ",,,,\n";
  }
  return out.str();
}

nlohmann::json report_json(const SimulationReport& report) {
  nlohmann::json j;
  j["config"] = to_json(report.config);
  j["coefficients"] = report.coefficient_names;
  j["sample_size"] = report.sample_size;
  j["df"] = {report.df1, report.df2};
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : report.working) {
    nlohmann::json jw;
    jw["working"] = std::string(to_string(w.working));
    jw["fitted"] = w.fitted;
    jw["failures"] = w.failures;
    nlohmann::json truth = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.truth.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < w.truth.cols(); ++c) row.push_back(w.truth(r, c));
      truth.push_back(row);
    }
    jw["truth"] = truth;
    nlohmann::json qs = nlohmann::json::array();
    for (const auto& q : w.quantities) {
      qs.push_back({{"quantity", q.quantity},
                    {"truth", q.truth},
                    {"adjusted", {{"mean", q.adjusted_mean}, {"sd", q.adjusted_sd}}},
                    {"unadjusted", {{"mean", q.unadjusted_mean}, {"sd", q.unadjusted_sd}}}});
    }
    jw["quantities"] = qs;
    nlohmann::json rates = nlohmann::json::array();
    for (std::size_t l = 0; l < kNominalLevels.size(); ++l) {
      auto cell = [](const RejectionRate& r) {
        return nlohmann::json{{"rejections", r.rejections}, {"rate", r.rate}, {"se", r.se}};
      };
      rates.push_back({{"level", kNominalLevels[l]},
                       {"adjusted", cell(w.adjusted_type_i[l])},
                       {"unadjusted", cell(w.unadjusted_type_i[l])}});
    }
    jw["type_i"] = rates;
    ws.push_back(jw);
  }
  j["working"] = ws;
  return j;
}

}  // namespace vecgee
