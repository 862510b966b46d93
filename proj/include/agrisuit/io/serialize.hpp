#ifndef AGRISUIT_IO_SERIALIZE_HPP
#define AGRISUIT_IO_SERIALIZE_HPP

#include "agrisuit/causal_forest.hpp"
#include "agrisuit/dml.hpp"
#include "agrisuit/learners/model_selection.hpp"

#include <json.hpp>

#include <string>

namespace agrisuit::io {

using json = nlohmann::json;

// Versioned JSON for every fitted model. Numbers use shortest round-trip
// formatting, so a reloaded model predicts bit-identically on the same
// platform.

json to_json(const learners::RegressionTree& tree);
learners::RegressionTree tree_from_json(const json& j);

json to_json(const learners::RandomForestRegressor& forest);
learners::RandomForestRegressor forest_from_json(const json& j);

json to_json(const learners::GradientBoostingModel& model);
learners::GradientBoostingModel boosting_from_json(const json& j);

json to_json(const learners::LogisticRegressionModel& model);
learners::LogisticRegressionModel logistic_from_json(const json& j);

json to_json(const learners::LassoModel& model);
learners::LassoModel lasso_from_json(const json& j);

json to_json(const causal::CausalForest& forest);
causal::CausalForest causal_forest_from_json(const json& j);

json to_json(const dml::CateModel& model);
dml::CateModel cate_model_from_json(const json& j);

json to_json(const causal::InterpretationTree& tree);

void save_cate_model(const std::string& path, const dml::CateModel& model);
dml::CateModel load_cate_model(const std::string& path);

void save_interpretation(const std::string& json_path,
                         const std::string& text_path,
                         const causal::InterpretationTree& tree);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

} // namespace agrisuit::io

#endif
