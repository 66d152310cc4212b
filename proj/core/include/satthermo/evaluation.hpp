#pragma once

#include "satthermo/dataset.hpp"
#include "satthermo/trained_model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace satthermo {

/// 1 - SS_res / SS_tot, with SS_tot about the mean of `actual`.
/// Throws UndefinedMetricError when `actual` has zero variance.
double r2(std::span<const double> actual, std::span<const double> predicted);

double rmse(std::span<const double> actual, std::span<const double> predicted);

struct MetricReport {
    double r2_train = 0.0;
    double rmse_train = 0.0;
    double r2_test = 0.0;
    double rmse_test = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

MetricReport evaluate(const TrainedModel& model, const Dataset& train, const Dataset& test);

/// Header `split,n,r2,rmse`, one row for train and one for test.
void write_metrics_csv(std::ostream& out, const MetricReport& r);

struct ImportanceOptions {
    std::size_t repeats = 10;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
};

struct FeatureImportance {
    std::string feature;
    double mean = 0.0;
    double stddev = 0.0;           // population
    std::vector<double> raw;       // baseline R^2 minus shuffled R^2, one per repeat

    friend bool operator==(const FeatureImportance&, const FeatureImportance&) = default;
};

struct ImportanceReport {
    double baseline_r2 = 0.0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    std::vector<FeatureImportance> features;

    friend bool operator==(const ImportanceReport&, const ImportanceReport&) = default;
};

/// For feature j and repeat r, column j is shuffled with an mt19937_64 seeded by
/// derive_seed(seed, "importance", j, r) while other columns stay fixed, and the
/// drop in R^2 is recorded. Negative drops are kept as they are. Work units are
/// spread over `workers` threads; the report does not depend on that count.
ImportanceReport permutation_importance(const TrainedModel& model, const Dataset& data,
                                        const ImportanceOptions& opts = {});

/// Header `feature,repeat,delta_r2`.
void write_importance_raw_csv(std::ostream& out, const ImportanceReport& r);
/// Header `feature,mean_delta_r2,std_delta_r2`.
void write_importance_summary_csv(std::ostream& out, const ImportanceReport& r);

}  // namespace satthermo
