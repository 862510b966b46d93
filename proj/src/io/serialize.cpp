#include "agrisuit/io/serialize.hpp"

#include <fstream>

namespace agrisuit::io {

namespace {

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(vector_to_json(m.row(i).transpose()));
    }
    return out;
}

Matrix matrix_from_json(const json& j) {
    if (j.empty()) {
        return Matrix(0, 0);
    }
    Matrix m(static_cast<Eigen::Index>(j.size()),
             static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) =
            vector_from_json(j[i]).transpose();
    }
    return m;
}

json params_to_json(const learners::ParamSet& params) {
    json out = json::array();
    for (const auto& [name, value] : params) {
        out.push_back(json::array({name, value}));
    }
    return out;
}

learners::ParamSet params_from_json(const json& j) {
    learners::ParamSet params;
    for (const auto& entry : j) {
        params.emplace_back(entry[0].get<std::string>(), entry[1].get<double>());
    }
    return params;
}

void expect_format(const json& j, const std::string& format) {
    if (!j.contains("format") || j["format"] != format) {
        throw DataError("MissingArtifact", "expected a " + format + " document");
    }
}

} // namespace

json to_json(const learners::RegressionTree& tree) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), prediction = json::array(), n = json::array();
    for (const auto& node : tree.nodes()) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        prediction.push_back(node.prediction);
        n.push_back(node.n_samples);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
                {"right", right},     {"prediction", prediction}, {"n", n}};
}

learners::RegressionTree tree_from_json(const json& j) {
    learners::RegressionTree tree;
    auto& nodes = tree.mutable_nodes();
    std::size_t count = j["feature"].size();
    nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        nodes[i].feature = j["feature"][i].get<int>();
        nodes[i].threshold = j["threshold"][i].get<double>();
        nodes[i].left = j["left"][i].get<int>();
        nodes[i].right = j["right"][i].get<int>();
        nodes[i].prediction = j["prediction"][i].get<double>();
        nodes[i].n_samples = j["n"][i].get<int>();
    }
    return tree;
}

json to_json(const learners::RandomForestRegressor& forest) {
    json trees = json::array();
    for (const auto& tree : forest.trees()) {
        trees.push_back(to_json(tree));
    }
    const auto& spec = forest.spec();
    return json{{"format", "agrisuit.random_forest"},
                {"version", 1},
                {"spec",
                 {{"n_trees", spec.n_trees},
                  {"max_depth", spec.max_depth},
                  {"min_samples_leaf", spec.min_samples_leaf},
                  {"max_features", spec.max_features},
                  {"max_features_fraction", spec.max_features_fraction},
                  {"bootstrap", spec.bootstrap}}},
                {"seed", forest.seed()},
                {"trees", trees}};
}

learners::RandomForestRegressor forest_from_json(const json& j) {
    expect_format(j, "agrisuit.random_forest");
    learners::RandomForestRegressor forest;
    auto& spec = forest.mutable_spec();
    const auto& js = j["spec"];
    spec.n_trees = js["n_trees"].get<int>();
    spec.max_depth = js["max_depth"].get<int>();
    spec.min_samples_leaf = js["min_samples_leaf"].get<int>();
    spec.max_features = js["max_features"].get<int>();
    spec.max_features_fraction = js["max_features_fraction"].get<double>();
    spec.bootstrap = js["bootstrap"].get<bool>();
    forest.set_seed(j["seed"].get<std::uint64_t>());
    for (const auto& tree : j["trees"]) {
        forest.mutable_trees().push_back(tree_from_json(tree));
    }
    return forest;
}

json to_json(const learners::GradientBoostingModel& model) {
    json stages = json::array();
    for (const auto& tree : model.stages()) {
        stages.push_back(to_json(tree));
    }
    const auto& spec = model.spec();
    return json{{"format", "agrisuit.gradient_boosting"},
                {"version", 1},
                {"spec",
                 {{"n_stages", spec.n_stages},
                  {"learning_rate", spec.learning_rate},
                  {"max_depth", spec.max_depth},
                  {"min_samples_leaf", spec.min_samples_leaf},
                  {"loss", spec.loss == learners::BoostLoss::squared
                               ? "squared"
                               : "logistic"}}},
                {"init_value", model.init_value()},
                {"stages", stages}};
}

learners::GradientBoostingModel boosting_from_json(const json& j) {
    expect_format(j, "agrisuit.gradient_boosting");
    learners::GradientBoostingModel model;
    auto& spec = model.mutable_spec();
    const auto& js = j["spec"];
    spec.n_stages = js["n_stages"].get<int>();
    spec.learning_rate = js["learning_rate"].get<double>();
    spec.max_depth = js["max_depth"].get<int>();
    spec.min_samples_leaf = js["min_samples_leaf"].get<int>();
    spec.loss = js["loss"] == "squared" ? learners::BoostLoss::squared
                                        : learners::BoostLoss::logistic;
    model.set_init_value(j["init_value"].get<double>());
    for (const auto& tree : j["stages"]) {
        model.mutable_stages().push_back(tree_from_json(tree));
    }
    return model;
}

json to_json(const learners::LogisticRegressionModel& model) {
    return json{{"format", "agrisuit.logistic"},
                {"version", 1},
                {"weights", vector_to_json(model.weights())},
                {"intercept", model.intercept()},
                {"l2", model.l2_penalty()}};
}

learners::LogisticRegressionModel logistic_from_json(const json& j) {
    expect_format(j, "agrisuit.logistic");
    learners::LogisticRegressionModel model;
    model.set_parameters(vector_from_json(j["weights"]),
                         j["intercept"].get<double>(), j["l2"].get<double>());
    return model;
}

json to_json(const learners::LassoModel& model) {
    return json{{"format", "agrisuit.lasso"},
                {"version", 1},
                {"weights", vector_to_json(model.weights())},
                {"intercept", model.intercept()},
                {"l1", model.l1_penalty()}};
}

learners::LassoModel lasso_from_json(const json& j) {
    expect_format(j, "agrisuit.lasso");
    learners::LassoModel model;
    model.set_parameters(vector_from_json(j["weights"]),
                         j["intercept"].get<double>(), j["l1"].get<double>());
    return model;
}

json to_json(const causal::CausalForest& forest) {
    json trees = json::array();
    for (const auto& tree : forest.trees()) {
        json feature = json::array(), threshold = json::array(),
             left = json::array(), right = json::array(), tau = json::array(),
             n_estimation = json::array();
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            tau.push_back(node.tau);
            n_estimation.push_back(node.n_estimation);
        }
        trees.push_back(json{{"feature", feature},
                             {"threshold", threshold},
                             {"left", left},
                             {"right", right},
                             {"tau", tau},
                             {"n_estimation", n_estimation}});
    }
    const auto& spec = forest.spec();
    return json{{"format", "agrisuit.causal_forest"},
                {"version", 1},
                {"spec",
                 {{"n_trees", spec.n_trees},
                  {"subsample_fraction", spec.subsample_fraction},
                  {"min_samples_leaf", spec.min_samples_leaf},
                  {"max_depth", spec.max_depth},
                  {"max_features", spec.max_features},
                  {"max_features_fraction", spec.max_features_fraction},
                  {"min_residual_ssq", spec.min_residual_ssq}}},
                {"seed", forest.seed()},
                {"trees", trees}};
}

causal::CausalForest causal_forest_from_json(const json& j) {
    expect_format(j, "agrisuit.causal_forest");
    causal::CausalForest forest;
    auto& spec = forest.mutable_spec();
    const auto& js = j["spec"];
    spec.n_trees = js["n_trees"].get<int>();
    spec.subsample_fraction = js["subsample_fraction"].get<double>();
    spec.min_samples_leaf = js["min_samples_leaf"].get<int>();
    spec.max_depth = js["max_depth"].get<int>();
    spec.max_features = js["max_features"].get<int>();
    spec.max_features_fraction = js["max_features_fraction"].get<double>();
    spec.min_residual_ssq = js["min_residual_ssq"].get<double>();
    forest.set_seed(j["seed"].get<std::uint64_t>());
    for (const auto& jt : j["trees"]) {
        causal::CausalTree tree;
        std::size_t count = jt["feature"].size();
        tree.nodes.resize(count);
        tree.leaf_estimation_rows.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            tree.nodes[i].feature = jt["feature"][i].get<int>();
            tree.nodes[i].threshold = jt["threshold"][i].get<double>();
            tree.nodes[i].left = jt["left"][i].get<int>();
            tree.nodes[i].right = jt["right"][i].get<int>();
            tree.nodes[i].tau = jt["tau"][i].get<double>();
            tree.nodes[i].n_estimation = jt["n_estimation"][i].get<int>();
        }
        forest.mutable_trees().push_back(std::move(tree));
    }
    return forest;
}

namespace {

json first_stage_to_json(const dml::FirstStageReport& report) {
    return json{{"outcome_family", report.outcome_family},
                {"treatment_family", report.treatment_family},
                {"outcome_train_r2", report.outcome_train_r2},
                {"outcome_test_r2", report.outcome_test_r2},
                {"treatment_train_f1", report.treatment_train_f1},
                {"treatment_test_f1", report.treatment_test_f1},
                {"outcome_params", params_to_json(report.outcome_params)},
                {"treatment_params", params_to_json(report.treatment_params)}};
}

dml::FirstStageReport first_stage_from_json(const json& j) {
    dml::FirstStageReport report;
    report.outcome_family = j["outcome_family"].get<std::string>();
    report.treatment_family = j["treatment_family"].get<std::string>();
    report.outcome_train_r2 = j["outcome_train_r2"].get<double>();
    report.outcome_test_r2 = j["outcome_test_r2"].get<double>();
    report.treatment_train_f1 = j["treatment_train_f1"].get<double>();
    report.treatment_test_f1 = j["treatment_test_f1"].get<double>();
    report.outcome_params = params_from_json(j["outcome_params"]);
    report.treatment_params = params_from_json(j["treatment_params"]);
    return report;
}

} // namespace

json to_json(const dml::CateModel& model) {
    json out{
        {"format", "agrisuit.cate_model"},
        {"version", 1},
        {"kind", model.kind == dml::CateKind::linear ? "linear" : "causal_forest"},
        {"feature_names", model.feature_names},
        {"linear",
         {{"basis", model.linear.basis == dml::LinearBasis::intercept_only
                        ? "intercept_only"
                        : "linear_in_x"},
          {"coefficients", vector_to_json(model.linear.coefficients)},
          {"covariance", matrix_to_json(model.linear.covariance)},
          {"ate", model.linear.ate},
          {"ate_se", model.linear.ate_se},
          {"ate_ci", json::array({model.linear.ate_ci_low, model.linear.ate_ci_high})}}},
        {"ate", model.ate},
        {"ate_ci", json::array({model.ate_ci_low, model.ate_ci_high})},
        {"first_stage", first_stage_to_json(model.first_stage)},
        {"feature_min", vector_to_json(model.feature_min)},
        {"feature_max", vector_to_json(model.feature_max)},
        {"seed", model.seed}};
    if (model.forest) {
        out["forest"] = to_json(*model.forest);
    }
    return out;
}

dml::CateModel cate_model_from_json(const json& j) {
    expect_format(j, "agrisuit.cate_model");
    dml::CateModel model;
    model.kind = j["kind"] == "linear" ? dml::CateKind::linear
                                       : dml::CateKind::causal_forest;
    model.feature_names = j["feature_names"].get<std::vector<std::string>>();
    const auto& jl = j["linear"];
    model.linear.basis = jl["basis"] == "intercept_only"
                             ? dml::LinearBasis::intercept_only
                             : dml::LinearBasis::linear_in_x;
    model.linear.coefficients = vector_from_json(jl["coefficients"]);
    model.linear.covariance = matrix_from_json(jl["covariance"]);
    model.linear.ate = jl["ate"].get<double>();
    model.linear.ate_se = jl["ate_se"].get<double>();
    model.linear.ate_ci_low = jl["ate_ci"][0].get<double>();
    model.linear.ate_ci_high = jl["ate_ci"][1].get<double>();
    model.ate = j["ate"].get<double>();
    model.ate_ci_low = j["ate_ci"][0].get<double>();
    model.ate_ci_high = j["ate_ci"][1].get<double>();
    model.first_stage = first_stage_from_json(j["first_stage"]);
    model.feature_min = vector_from_json(j["feature_min"]);
    model.feature_max = vector_from_json(j["feature_max"]);
    model.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("forest")) {
        model.forest = std::make_shared<causal::CausalForest>(
            causal_forest_from_json(j["forest"]));
    }
    return model;
}

json to_json(const causal::InterpretationTree& tree) {
    json nodes = json::array();
    const auto& raw = tree.tree.nodes();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        json node{{"feature", raw[i].feature},
                  {"left", raw[i].left},
                  {"right", raw[i].right}};
        if (raw[i].feature >= 0) {
            node["feature_name"] =
                tree.feature_names[static_cast<std::size_t>(raw[i].feature)];
            node["threshold"] = raw[i].threshold;
        } else {
            const auto& stats = tree.stats[i];
            node["n"] = stats.n;
            node["cate_mean"] = stats.cate_mean;
            node["cate_std"] = stats.cate_std;
            node["ci95"] = json::array({stats.ci_low, stats.ci_high});
        }
        nodes.push_back(std::move(node));
    }
    return json{{"format", "agrisuit.interpretation_tree"},
                {"version", 1},
                {"max_depth", tree.max_depth},
                {"feature_names", tree.feature_names},
                {"nodes", nodes}};
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("MissingArtifact", "cannot open " + path);
    }
    out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("MissingArtifact", "cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& error) {
        throw DataError("MalformedNumber",
                        "invalid JSON in " + path + ": " + error.what());
    }
    return j;
}

void save_cate_model(const std::string& path, const dml::CateModel& model) {
    write_json_file(path, to_json(model));
}

dml::CateModel load_cate_model(const std::string& path) {
    return cate_model_from_json(read_json_file(path));
}

void save_interpretation(const std::string& json_path,
                         const std::string& text_path,
                         const causal::InterpretationTree& tree) {
    write_json_file(json_path, to_json(tree));
    std::ofstream out(text_path, std::ios::binary);
    if (!out) {
        throw DataError("MissingArtifact", "cannot open " + text_path);
    }
    out << tree.render_text();
}

} // namespace agrisuit::io
