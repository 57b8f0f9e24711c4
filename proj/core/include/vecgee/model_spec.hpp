#pragma once

// JSON model specifications:
//
//   {
//     "components": [
//       {"name": "left", "response": "left", "link": "logit",
//        "variance": "proportion", "dispersion": "estimated", "dispersion_group": 1,
//        "formula": [{"coefficient": "b0", "covariate": "intercept"},
//                    {"coefficient": "b1", "covariate": "trt", "equals": 1}]}
//     ],
//     "working": "unstructured"            // or {"fixed": [[1, 0.3], [0.3, 1]]}
//   }

#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecgee/dataset.hpp"
#include "vecgee/marginal.hpp"
#include "vecgee/working_dependence.hpp"

namespace vecgee {

struct ModelSpec {
  std::vector<ComponentSpec> components;
  std::optional<WorkingDependence> working;

  VectorGlmModel model() const { return VectorGlmModel(components); }
};

ModelSpec parse_model_spec(const nlohmann::json& doc);
ModelSpec load_model_spec(const std::filesystem::path& path);
nlohmann::json to_json(const ModelSpec& spec);

WorkingDependence parse_working(const nlohmann::json& value);
nlohmann::json to_json(const WorkingDependence& working);

/// Response columns reordered to the model's component order, covariates
/// restricted to the columns the model references.
Dataset align_to_model(const Dataset& data, const VectorGlmModel& model);

}  // namespace vecgee
