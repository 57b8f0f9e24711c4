#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "vecgee/errors.hpp"
#include "vecgee/gee.hpp"
#include "vecgee/io.hpp"
#include "vecgee/model_spec.hpp"
#include "vecgee/simulation.hpp"
#include "vecgee/sorbinil_data.hpp"

using namespace vecgee;

namespace {

CsvSchema two_by_one() {
  CsvSchema s;
  s.responses = {"y1", "y2"};
  s.covariates = {"x"};
  return s;
}

std::string message_of(const std::string& csv, const CsvSchema& schema) {
  std::istringstream in(csv);
  try {
    parse_csv_dataset(in, schema, "data.csv");
  } catch (const IngestionError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vecgee_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli-data") {
  TEST_CASE("sorbinil table layout and checksum") {
    const auto table = sorbinil_table();
    REQUIRE(table.size() == kSorbinilRows);
    CHECK(sorbinil_checksum() == 0xfe835a2c53a1d37eULL);
    std::size_t offset = 0;
    const bool flags[4][2] = {{true, true}, {true, false}, {false, true}, {false, false}};
    for (std::size_t g = 0; g < 4; ++g) {
      for (std::size_t r = 0; r < kSorbinilGroupSizes[g]; ++r) {
        const auto& row = table[offset + r];
        CHECK(row.sorbinil_left == flags[g][0]);
        CHECK(row.sorbinil_right == flags[g][1]);
        for (double v : {row.score_left, row.score_right}) {
          CHECK(v >= 0.0);
          CHECK(v <= 4.0);
          CHECK(v * 2 == std::round(v * 2));
        }
      }
      offset += kSorbinilGroupSizes[g];
    }
    const auto data = sorbinil_dataset();
    CHECK(data.responses(0, 0) == 0.5);
    CHECK(sorbinil_dataset(false).responses(0, 0) == 2.0);
  }

  TEST_CASE("CSV loader builds the missingness mask") {
    std::istringstream in("x,y2,y1\n1,0,2.5\n2,NA,3\n3,1,\n");
    const auto d = parse_csv_dataset(in, two_by_one());
    REQUIRE(d.size() == 3);
    CHECK(d.response_names == std::vector<std::string>{"y1", "y2"});
    CHECK(d.responses(0, 0) == 2.5);
    CHECK(d.observed(1, 0));
    CHECK_FALSE(d.observed(1, 1));
    CHECK(std::isnan(d.responses(1, 1)));
    CHECK_FALSE(d.observed(2, 0));
    CHECK(d.covariates(2, 0) == 3.0);
  }

  TEST_CASE("custom missing tokens") {
    auto schema = two_by_one();
    schema.missing_token = ".";
    std::istringstream in("y1,y2,x\n.,1,0\n");
    const auto d = parse_csv_dataset(in, schema);
    CHECK_FALSE(d.observed(0, 0));
  }

  TEST_CASE("parse errors name the line and column") {
    const auto msg = message_of("y1,y2,x\n1,0,1\n2,abc,1\n", two_by_one());
    CHECK(msg.find("data.csv:3") != std::string::npos);
    CHECK(msg.find("y2") != std::string::npos);
    CHECK(message_of("y1,y2,x\n1,0,NA\n", two_by_one()).find("x") != std::string::npos);
    CHECK(message_of("y1,x\n1,0\n", two_by_one()).find("'y2'") != std::string::npos);
    CHECK(message_of("y1,y2,x\n1,0\n", two_by_one()).find("data.csv:2") != std::string::npos);
  }

  TEST_CASE("rows with every response missing are rejected") {
    const auto msg = message_of("y1,y2,x\n1,0,1\nNA,NA,2\n", two_by_one());
    CHECK(msg.find("data.csv:3") != std::string::npos);
  }

  TEST_CASE("missing files are I/O errors") {
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent/file.csv", two_by_one()), IoError);
    CHECK_THROWS_AS(load_model_spec("/nonexistent/spec.json"), IoError);
  }

  TEST_CASE("exported sorbinil data reloads exactly") {
    const auto dir = scratch_dir("csv");
    const auto data = sorbinil_dataset();
    write_csv_dataset(dir / "s.csv", data);
    CsvSchema schema;
    schema.responses = data.response_names;
    schema.covariates = data.covariate_names;
    const auto back = load_csv_dataset(dir / "s.csv", schema);
    CHECK(back.responses == data.responses);
    CHECK(back.covariates == data.covariates);
    CHECK((back.observed == data.observed).all());
  }

  TEST_CASE("quoted CSV fields") {
    std::istringstream in("a,b\n\"x,y\",\"say \"\"hi\"\"\"\n\n3,4\n");
    const auto rows = read_csv_rows(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].cells[0] == "x,y");
    CHECK(rows[1].cells[1] == "say \"hi\"");
    CHECK(rows[2].line == 4);
  }

  TEST_CASE("model specs round-trip and reject bad layouts") {
    const nlohmann::json doc = {
        {"components",
         {{{"name", "y1"}, {"link", "identity"}, {"variance", "constant"},
           {"formula", {{{"coefficient", "a0"}}, {{"coefficient", "a1"}, {"covariate", "x"}}}}},
          {{"name", "y2"}, {"link", "logit"}, {"variance", "bernoulli"},
           {"formula", {{{"coefficient", "c0"}}, {{"coefficient", "c1"}, {"covariate", "g"}, {"equals", 2}}}}}}},
        {"working", "unstructured"}};
    const auto spec = parse_model_spec(doc);
    CHECK(spec.components[1].marginal.dispersion == DispersionMode::fixed_at_one);
    CHECK(spec.components[1].terms[1].equals == 2.0);
    CHECK(spec.working->kind == DependenceKind::unstructured);
    CHECK(to_json(parse_model_spec(to_json(spec))) == to_json(spec));
    CHECK_THROWS_AS(parse_model_spec({{"components", nlohmann::json::array()}}), ConfigurationError);
    CHECK_THROWS_AS(parse_model_spec({{"components", {{{"link", "logit"}}}}}), ConfigurationError);
    CHECK_THROWS_AS(parse_working("fixed"), ConfigurationError);
    CHECK(parse_working({{"fixed", {{1, 0.2}, {0.2, 1}}}}).fixed(0, 1) == 0.2);
  }

  TEST_CASE("analysis records survive a JSON round trip exactly") {
    const auto model = sorbinil_four_parameter_model();
    FitOptions o;
    o.dependence = WorkingDependence::unstructured();
    const auto fit = fit_gee(model, align_to_model(sorbinil_dataset(), model), o);
    auto out = make_analysis_output(model, fit, "builtin:sorbinil");
    Eigen::MatrixXd m(2, 4);
    m << 1, 0, -1, 0, 0, 1, 0, -1;
    record_test(out, {"symmetry", "sandwich",
                      wald_f_test(m, Eigen::VectorXd::Zero(2), fit.beta, fit.sandwich_vcov, fit.n, fit.p)});
    const auto text = to_json(out).dump();
    const auto back = analysis_from_json(nlohmann::json::parse(text));
    CHECK(back.beta == out.beta);
    CHECK(back.sandwich_vcov == out.sandwich_vcov);
    CHECK(back.naive_vcov == out.naive_vcov);
    CHECK(back.tests.size() == 1);
    CHECK(back.tests[0].test.f == out.tests[0].test.f);
    CHECK(to_json(back).dump() == text);
    CHECK(back.index_of("bR1") == 3);
    CHECK_THROWS_AS(back.index_of("zz"), ConfigurationError);
  }

  TEST_CASE("recording a test twice replaces it") {
    AnalysisOutput out;
    HypothesisTest t;
    t.f = 1.0;
    record_test(out, {"h", "naive", t});
    t.f = 2.0;
    record_test(out, {"h", "naive", t});
    record_test(out, {"h", "sandwich", t});
    REQUIRE(out.tests.size() == 2);
    CHECK(out.tests[0].test.f == 2.0);
  }
}
