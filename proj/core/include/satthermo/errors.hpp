#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace satthermo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SATTHERMO_DECLARE_ERROR(Name)            \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

SATTHERMO_DECLARE_ERROR(StepMismatchError);
SATTHERMO_DECLARE_ERROR(InsufficientDataError);
SATTHERMO_DECLARE_ERROR(IoError);
SATTHERMO_DECLARE_ERROR(EmptyDatasetError);
SATTHERMO_DECLARE_ERROR(TooFewRowsError);
SATTHERMO_DECLARE_ERROR(SingularSystemError);
SATTHERMO_DECLARE_ERROR(ShapeError);
SATTHERMO_DECLARE_ERROR(VersionError);
SATTHERMO_DECLARE_ERROR(ParseError);
SATTHERMO_DECLARE_ERROR(InvalidParameterError);
SATTHERMO_DECLARE_ERROR(UndefinedMetricError);
SATTHERMO_DECLARE_ERROR(DomainError);
SATTHERMO_DECLARE_ERROR(ConfigError);

#undef SATTHERMO_DECLARE_ERROR

/// A CSV header lacks a required column.
class SchemaError : public Error {
public:
    SchemaError(std::string source, std::string column);
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// A row was rejected while parsing in strict mode.
class RowRejectedError : public Error {
public:
    RowRejectedError(std::string source, std::size_t line, std::string reason);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A feature has zero variance, so it cannot be standardized.
class DegenerateFeatureError : public Error {
public:
    explicit DegenerateFeatureError(std::string feature);
    const std::string& feature() const noexcept { return feature_; }

private:
    std::string feature_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(std::size_t epoch);
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace satthermo
