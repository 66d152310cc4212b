#pragma once

#include "satthermo/ingestion.hpp"
#include "satthermo/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satthermo {

enum class TargetKind { topsoil, profile };

std::string_view to_string(TargetKind k) noexcept;
std::optional<TargetKind> parse_target_kind(std::string_view s);

/// Sampling step of targets, resampled meteorology and predictions.
inline constexpr Minutes kModelStep{30};

inline constexpr std::string_view kFeatureTemperature = "t_ambient_c";
inline constexpr std::string_view kFeatureHumidity = "rh_pct";
inline constexpr std::string_view kFeaturePrecip = "precip_mm";
inline constexpr std::string_view kFeatureWindSpeed = "wind_speed_ms";
inline constexpr std::string_view kFeatureWindDir = "wind_dir_deg";

/// (T, RH), in that column order.
std::vector<std::string> default_features();
/// (T, RH, P, WS, WD) for the feature-elimination experiment.
std::vector<std::string> all_features();

// --- targets -----------------------------------------------------------------

struct CoverageFloors {
    int topsoil_min_probes = 1;
    int profile_min_sensors = kSensorCount / 2;
};

struct TargetSeries {
    RegularSeries topsoil;
    RegularSeries profile;
};

/// Per 30-minute slot: topsoil is the mean of the 5 cm readings, profile the
/// mean of all sensors present, each subject to its coverage floor. Several
/// readings from one sensor within a slot are averaged first. Sums run over
/// sorted values so the result does not depend on probe labelling.
TargetSeries build_targets(std::span<const ProbeRecord> probes, CoverageFloors floors = {});

// --- meteorology ---------------------------------------------------------------

/// Named feature signals on one shared grid.
struct FeatureSeries {
    std::vector<std::string> names;
    std::vector<RegularSeries> series;

    const RegularSeries& get(std::string_view name) const;
    RegularSeries& get(std::string_view name);
};

/// Places every meteorological column on the grid of `step`.
FeatureSeries meteo_series(std::span<const MeteoRecord> records, Minutes step);

// --- dataset -------------------------------------------------------------------

/// Feature matrix (row-major) with one target column.
class Dataset {
public:
    Dataset() = default;
    Dataset(TargetKind kind, std::vector<std::string> feature_names);

    void add_row(Timestamp ts, std::span<const double> features, double target);

    TargetKind target_kind() const noexcept { return kind_; }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    std::size_t size() const noexcept { return timestamps_.size(); }
    bool empty() const noexcept { return timestamps_.empty(); }
    std::size_t n_features() const noexcept { return names_.size(); }

    Timestamp timestamp(std::size_t i) const { return timestamps_[i]; }
    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * names_.size(), names_.size()};
    }
    double feature(std::size_t i, std::size_t j) const { return features_[i * names_.size() + j]; }
    double& feature(std::size_t i, std::size_t j) { return features_[i * names_.size() + j]; }
    double target(std::size_t i) const { return targets_[i]; }

    const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
    const std::vector<double>& features() const noexcept { return features_; }
    const std::vector<double>& targets() const noexcept { return targets_; }
    std::vector<double> column(std::size_t j) const;
    std::optional<std::size_t> feature_index(std::string_view name) const;

    /// Rows at the given indices, in that order.
    Dataset subset(std::span<const std::size_t> indices) const;

    /// Stable hash over feature names, timestamps and values.
    std::string fingerprint() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    TargetKind kind_ = TargetKind::topsoil;
    std::vector<std::string> names_;
    std::vector<Timestamp> timestamps_;
    std::vector<double> features_;
    std::vector<double> targets_;
};

struct BuildReport {
    std::size_t candidates = 0;         // target grid slots examined
    std::size_t outside_drainage = 0;
    std::size_t missing_feature = 0;
    std::size_t missing_target = 0;
    std::size_t rows = 0;
};

struct BuildResult {
    Dataset dataset;
    BuildReport report;
};

/// Same join as build_dataset but an empty result is returned, not thrown.
BuildResult assemble_dataset(const FeatureSeries& features, const TargetSeries& targets,
                             std::span<const DrainageInterval> phases, TargetKind kind,
                             std::span<const std::string> feature_names);

/// Joins features with the chosen target over the target grid, keeping slots
/// inside drainage intervals with every field present. `features` must be on
/// the target step. Throws EmptyDatasetError when no row survives.
BuildResult build_dataset(const FeatureSeries& features, const TargetSeries& targets,
                          std::span<const DrainageInterval> phases, TargetKind kind,
                          std::span<const std::string> feature_names);
BuildResult build_dataset(const FeatureSeries& features, const TargetSeries& targets,
                          std::span<const DrainageInterval> phases, TargetKind kind);

/// True when every row timestamp lies inside some interval.
bool rows_within(const Dataset& ds, std::span<const DrainageInterval> phases);

/// Header: timestamp, one column per feature, target_c.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in, std::string source, TargetKind kind);
Dataset read_dataset_csv(const std::filesystem::path& path, TargetKind kind);

// --- split ---------------------------------------------------------------------

enum class SplitMode { random, temporal };

std::string_view to_string(SplitMode m) noexcept;

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    SplitMode mode = SplitMode::random;

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Random mode: indices 0..n-1 are shuffled with an mt19937_64 seeded by
/// derive_seed(seed, "split"); the first round(fraction*n) go to train.
/// Temporal mode: the first round(fraction*n) rows in order go to train.
/// Throws TooFewRowsError for n < 10 and InvalidParameterError for a fraction
/// outside (0, 1) or one that leaves a side empty.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct Split {
    Dataset train;
    Dataset test;
};

Split split(const Dataset& ds, const SplitSpec& spec);

// --- standardization -----------------------------------------------------------

/// Per-feature z-score with population standard deviation.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<std::string> names, std::vector<double> mean, std::vector<double> stddev);

    /// Throws DegenerateFeatureError for a zero-variance column.
    static Standardizer fit(const Dataset& train);

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& stddev() const noexcept { return stddev_; }
    std::size_t size() const noexcept { return mean_.size(); }

    std::vector<double> transform(std::span<const double> row) const;
    std::vector<double> inverse(std::span<const double> z) const;
    /// Copy of `ds` with every feature column standardized.
    Dataset transform(const Dataset& ds) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    std::vector<std::string> names_;
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

/// Mean and population standard deviation of a column.
struct Moments {
    double mean;
    double stddev;
};
Moments moments(std::span<const double> values);

}  // namespace satthermo
