#pragma once

#include "satthermo/dataset.hpp"
#include "satthermo/mlr.hpp"
#include "satthermo/nn.hpp"
#include "satthermo/rf.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace satthermo {

enum class ModelKind { mlr, nn, rf };

std::string_view to_string(ModelKind k) noexcept;
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelMetadata {
    TargetKind target_kind = TargetKind::topsoil;
    std::uint64_t seed = 0;
    SplitSpec split;
    std::string data_fingerprint;
    std::size_t n_train = 0;

    friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

/// A fitted regressor of any kind plus how it was trained.
class TrainedModel {
public:
    using Params = std::variant<MlrModel, NnModel, RfModel>;

    TrainedModel(Params params, ModelMetadata meta);

    ModelKind kind() const noexcept;
    const Params& params() const noexcept { return params_; }
    const ModelMetadata& metadata() const noexcept { return meta_; }
    const std::vector<std::string>& feature_names() const noexcept;

    double predict(std::span<const double> row) const;
    /// Predictions for every row; feature names must match the model's.
    std::vector<double> predict(const Dataset& ds) const;

    friend bool operator==(const TrainedModel&, const TrainedModel&) = default;

private:
    Params params_;
    ModelMetadata meta_;
};

inline constexpr int kModelSchemaVersion = 1;

/// JSON document with schema_version, kind, target_kind, seed, features,
/// params and metadata. Doubles are written in shortest round-trip form.
std::string model_to_json(const TrainedModel& m);
/// Throws VersionError for an unknown schema_version and ParseError for
/// anything malformed or truncated.
TrainedModel model_from_json(std::string_view text, std::string_view source = "<memory>");

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace satthermo
