#include "satthermo/trained_model.hpp"

#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

namespace satthermo {

using nlohmann::json;

std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::mlr: return "mlr";
        case ModelKind::nn: return "nn";
        case ModelKind::rf: return "rf";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
    if (s == "mlr") return ModelKind::mlr;
    if (s == "nn") return ModelKind::nn;
    if (s == "rf") return ModelKind::rf;
    return std::nullopt;
}

TrainedModel::TrainedModel(Params params, ModelMetadata meta)
    : params_(std::move(params)), meta_(std::move(meta)) {}

ModelKind TrainedModel::kind() const noexcept {
    return static_cast<ModelKind>(params_.index());
}

const std::vector<std::string>& TrainedModel::feature_names() const noexcept {
    return std::visit(
        [](const auto& p) -> const std::vector<std::string>& {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, NnModel>) {
                return p.feature_names();
            } else {
                return p.feature_names;
            }
        },
        params_);
}

double TrainedModel::predict(std::span<const double> row) const {
    return std::visit([&](const auto& p) { return p.predict(row); }, params_);
}

std::vector<double> TrainedModel::predict(const Dataset& ds) const {
    if (ds.feature_names() != feature_names()) {
        throw ShapeError(fmt::format("dataset features ({}) differ from model features ({})",
                                     fmt::join(ds.feature_names(), ", "),
                                     fmt::join(feature_names(), ", ")));
    }
    std::vector<double> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(ds.row(i));
    return out;
}

// --- serialization -------------------------------------------------------------

namespace {

json to_json(const MlrModel& m) {
    return {{"coefficients", m.coefficients}, {"intercept", m.intercept}};
}

json to_json(const NnHyperparams& hp) {
    return {{"hidden", hp.hidden},         {"optimizer", "adam"},
            {"learning_rate", hp.learning_rate}, {"beta1", hp.beta1},
            {"beta2", hp.beta2},           {"epsilon", hp.epsilon},
            {"batch_cap", hp.batch_cap},   {"epochs", hp.epochs},
            {"tolerance", hp.tolerance},   {"patience", hp.patience}};
}

json to_json(const NnModel& m) {
    json layers = json::array();
    for (const auto& l : m.layers()) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
    return {
        {"layer_sizes", m.layer_sizes()},
        {"hidden_activation", "relu"},
        {"output_activation", "identity"},
        {"input_mean", m.input_scaler().mean()},
        {"input_std", m.input_scaler().stddev()},
        {"target_mean", m.target_mean()},
        {"target_std", m.target_std()},
        {"layers", std::move(layers)},
        {"hyperparams", to_json(m.hyperparams)},
        {"training",
         {{"initial_mse", m.training.initial_mse},
          {"final_mse", m.training.final_mse},
          {"epochs_run", m.training.epochs_run},
          {"early_stopped", m.training.early_stopped}}},
    };
}

json to_json(const RfModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        std::vector<int> feature;
        std::vector<double> threshold;
        std::vector<double> value;
        std::vector<std::uint32_t> left;
        std::vector<std::uint32_t> right;
        for (const auto& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            value.push_back(n.value);
            left.push_back(n.left);
            right.push_back(n.right);
        }
        trees.push_back({{"feature", feature},
                         {"threshold", threshold},
                         {"value", value},
                         {"left", left},
                         {"right", right}});
    }
    return {{"hyperparams",
             {{"n_trees", m.hyperparams.n_trees},
              {"min_samples_leaf", m.hyperparams.min_samples_leaf},
              {"max_depth", m.hyperparams.max_depth},
              {"bootstrap", m.hyperparams.bootstrap},
              {"max_features", "all"}}},
            {"target_min", m.target_min},
            {"target_max", m.target_max},
            {"tree_seeds", m.tree_seeds},
            {"trees", std::move(trees)}};
}

[[noreturn]] void corrupt(std::string_view source, std::string_view what) {
    throw ParseError(fmt::format("{}: corrupted model file: {}", source, what));
}

std::vector<double> finite_array(const json& j, std::string_view source, std::string_view field) {
    auto v = j.get<std::vector<double>>();
    for (double x : v) {
        if (!std::isfinite(x)) corrupt(source, fmt::format("non-finite value in {}", field));
    }
    return v;
}

double finite(const json& j, std::string_view source, std::string_view field) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) corrupt(source, fmt::format("non-finite {}", field));
    return v;
}

MlrModel mlr_from_json(const json& p, std::vector<std::string> features, std::string_view source) {
    MlrModel m;
    m.feature_names = std::move(features);
    m.coefficients = finite_array(p.at("coefficients"), source, "coefficients");
    m.intercept = finite(p.at("intercept"), source, "intercept");
    if (m.coefficients.size() != m.feature_names.size()) corrupt(source, "coefficient count");
    return m;
}

NnModel nn_from_json(const json& p, std::vector<std::string> features, std::string_view source) {
    Standardizer scaler(std::move(features), finite_array(p.at("input_mean"), source, "input_mean"),
                        finite_array(p.at("input_std"), source, "input_std"));
    NnModel m(std::move(scaler), finite(p.at("target_mean"), source, "target_mean"),
              finite(p.at("target_std"), source, "target_std"),
              p.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& layers = p.at("layers");
    if (layers.size() != m.layers().size()) corrupt(source, "layer count");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto w = finite_array(layers[l].at("weights"), source, "weights");
        auto b = finite_array(layers[l].at("biases"), source, "biases");
        auto& layer = m.layers()[l];
        if (w.size() != layer.weights.size() || b.size() != layer.biases.size()) {
            corrupt(source, fmt::format("layer {} shape", l));
        }
        layer.weights = std::move(w);
        layer.biases = std::move(b);
    }
    const auto& hp = p.at("hyperparams");
    m.hyperparams.hidden = hp.at("hidden").get<std::vector<std::size_t>>();
    m.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
    m.hyperparams.beta1 = hp.at("beta1").get<double>();
    m.hyperparams.beta2 = hp.at("beta2").get<double>();
    m.hyperparams.epsilon = hp.at("epsilon").get<double>();
    m.hyperparams.batch_cap = hp.at("batch_cap").get<std::size_t>();
    m.hyperparams.epochs = hp.at("epochs").get<std::size_t>();
    m.hyperparams.tolerance = hp.at("tolerance").get<double>();
    m.hyperparams.patience = hp.at("patience").get<std::size_t>();
    const auto& t = p.at("training");
    m.training.initial_mse = t.at("initial_mse").get<double>();
    m.training.final_mse = t.at("final_mse").get<double>();
    m.training.epochs_run = t.at("epochs_run").get<std::size_t>();
    m.training.early_stopped = t.at("early_stopped").get<bool>();
    return m;
}

RfModel rf_from_json(const json& p, std::vector<std::string> features, std::string_view source) {
    RfModel m;
    m.feature_names = std::move(features);
    const auto& hp = p.at("hyperparams");
    m.hyperparams.n_trees = hp.at("n_trees").get<std::size_t>();
    m.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
    m.hyperparams.max_depth = hp.at("max_depth").get<std::size_t>();
    m.hyperparams.bootstrap = hp.at("bootstrap").get<bool>();
    m.target_min = finite(p.at("target_min"), source, "target_min");
    m.target_max = finite(p.at("target_max"), source, "target_max");
    m.tree_seeds = p.at("tree_seeds").get<std::vector<std::uint64_t>>();
    const auto& trees = p.at("trees");
    if (trees.size() != m.hyperparams.n_trees || m.tree_seeds.size() != trees.size()) {
        corrupt(source, "tree count");
    }
    const auto width = static_cast<int>(m.feature_names.size());
    for (const auto& t : trees) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = finite_array(t.at("threshold"), source, "threshold");
        const auto value = finite_array(t.at("value"), source, "value");
        const auto left = t.at("left").get<std::vector<std::uint32_t>>();
        const auto right = t.at("right").get<std::vector<std::uint32_t>>();
        const std::size_t n = feature.size();
        if (n == 0 || threshold.size() != n || value.size() != n || left.size() != n || right.size() != n) {
            corrupt(source, "tree arrays differ in length");
        }
        RegressionTree tree;
        tree.nodes.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto& node = tree.nodes[k];
            node.feature = feature[k] < 0 ? -1 : feature[k];
            node.threshold = threshold[k];
            node.value = value[k];
            node.left = left[k];
            node.right = right[k];
            if (!node.is_leaf()) {
                // Children always follow their parent in preorder, which rules out cycles.
                if (node.feature >= width || node.left <= k || node.right <= k || node.left >= n ||
                    node.right >= n) {
                    corrupt(source, "tree structure");
                }
            }
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

}  // namespace

std::string model_to_json(const TrainedModel& m) {
    const auto& meta = m.metadata();
    json doc = {
        {"schema_version", kModelSchemaVersion},
        {"kind", to_string(m.kind())},
        {"target_kind", to_string(meta.target_kind)},
        {"seed", meta.seed},
        {"features", m.feature_names()},
    };
    std::visit([&](const auto& p) { doc["params"] = to_json(p); }, m.params());
    doc["metadata"] = {
        {"split",
         {{"train_fraction", meta.split.train_fraction},
          {"seed", meta.split.seed},
          {"mode", to_string(meta.split.mode)}}},
        {"data_fingerprint", meta.data_fingerprint},
        {"n_train", meta.n_train},
    };
    return m.kind() == ModelKind::rf ? doc.dump() + "\n" : doc.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("{}: malformed model file: {}", source, e.what()));
    }
    try {
        if (!doc.is_object()) corrupt(source, "not a JSON object");
        const auto version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw VersionError(fmt::format("{}: unsupported model schema_version {} (expected {})",
                                           source, version, kModelSchemaVersion));
        }
        const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
        if (!kind) corrupt(source, "unknown kind");
        ModelMetadata meta;
        const auto target = parse_target_kind(doc.at("target_kind").get<std::string>());
        if (!target) corrupt(source, "unknown target_kind");
        meta.target_kind = *target;
        meta.seed = doc.at("seed").get<std::uint64_t>();
        const auto& md = doc.at("metadata");
        const auto& split = md.at("split");
        meta.split.train_fraction = split.at("train_fraction").get<double>();
        meta.split.seed = split.at("seed").get<std::uint64_t>();
        const auto mode = split.at("mode").get<std::string>();
        if (mode == "random") {
            meta.split.mode = SplitMode::random;
        } else if (mode == "temporal") {
            meta.split.mode = SplitMode::temporal;
        } else {
            corrupt(source, "unknown split mode");
        }
        meta.data_fingerprint = md.at("data_fingerprint").get<std::string>();
        meta.n_train = md.at("n_train").get<std::size_t>();

        auto features = doc.at("features").get<std::vector<std::string>>();
        if (features.empty()) corrupt(source, "no features");
        const auto& p = doc.at("params");
        switch (*kind) {
            case ModelKind::mlr: return TrainedModel(mlr_from_json(p, std::move(features), source), meta);
            case ModelKind::nn: return TrainedModel(nn_from_json(p, std::move(features), source), meta);
            case ModelKind::rf: return TrainedModel(rf_from_json(p, std::move(features), source), meta);
        }
        corrupt(source, "unknown kind");
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("{}: corrupted model file: {}", source, e.what()));
    } catch (const VersionError&) {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(fmt::format("{}: corrupted model file: {}", source, e.what()));
    }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    const auto text = model_to_json(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    out.flush();
    if (!out) throw IoError(fmt::format("write failure on '{}'", path.string()));
}

TrainedModel load_model(const std::filesystem::path& path) {
    return model_from_json(csv::read_file(path), path.string());
}

}  // namespace satthermo
