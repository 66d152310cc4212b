#include "satthermo/errors.hpp"

#include <fmt/format.h>

namespace satthermo {

SchemaError::SchemaError(std::string source, std::string column)
    : Error(fmt::format("{}: missing required column '{}'", source, column)),
      column_(std::move(column)) {}

RowRejectedError::RowRejectedError(std::string source, std::size_t line, std::string reason)
    : Error(fmt::format("{}:{}: {}", source, line, reason)), line_(line) {}

DegenerateFeatureError::DegenerateFeatureError(std::string feature)
    : Error(fmt::format("feature '{}' has zero variance", feature)),
      feature_(std::move(feature)) {}

DivergenceError::DivergenceError(std::size_t epoch)
    : Error(fmt::format("training diverged: non-finite loss at epoch {}", epoch)),
      epoch_(epoch) {}

}  // namespace satthermo
