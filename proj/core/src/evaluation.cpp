#include "satthermo/evaluation.hpp"

#include "satthermo/csv.hpp"
#include "satthermo/errors.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

namespace satthermo {

namespace {

void check_lengths(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty() || actual.size() != predicted.size()) {
        throw ShapeError(fmt::format("metric needs equal nonzero lengths, got {} and {}",
                                     actual.size(), predicted.size()));
    }
}

}  // namespace

double r2(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (!(ss_tot > 0.0)) throw UndefinedMetricError("R^2 is undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double ss = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

MetricReport evaluate(const TrainedModel& model, const Dataset& train, const Dataset& test) {
    const auto p_train = model.predict(train);
    const auto p_test = model.predict(test);
    MetricReport r;
    r.n_train = train.size();
    r.n_test = test.size();
    r.r2_train = r2(train.targets(), p_train);
    r.rmse_train = rmse(train.targets(), p_train);
    r.r2_test = r2(test.targets(), p_test);
    r.rmse_test = rmse(test.targets(), p_test);
    return r;
}

void write_metrics_csv(std::ostream& out, const MetricReport& r) {
    out << "split,n,r2,rmse\n";
    out << "train," << r.n_train << ',' << csv::format_double(r.r2_train) << ','
        << csv::format_double(r.rmse_train) << '\n';
    out << "test," << r.n_test << ',' << csv::format_double(r.r2_test) << ','
        << csv::format_double(r.rmse_test) << '\n';
}

ImportanceReport permutation_importance(const TrainedModel& model, const Dataset& data,
                                        const ImportanceOptions& opts) {
    if (opts.repeats == 0) throw InvalidParameterError("importance repeats must be at least 1");
    if (data.empty()) throw EmptyDatasetError("importance needs a non-empty dataset");

    ImportanceReport report;
    report.repeats = opts.repeats;
    report.seed = opts.seed;
    report.baseline_r2 = r2(data.targets(), model.predict(data));

    const std::size_t p = data.n_features();
    report.features.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        report.features[j].feature = data.feature_names()[j];
        report.features[j].raw.assign(opts.repeats, 0.0);
    }

    auto run = [&](std::size_t unit) {
        const std::size_t j = unit / opts.repeats;
        const std::size_t r = unit % opts.repeats;
        Dataset shuffled = data;
        auto column = data.column(j);
        Rng rng(derive_seed(opts.seed, "importance", j, r));
        shuffle(std::span<double>(column), rng);
        for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled.feature(i, j) = column[i];
        report.features[j].raw[r] = report.baseline_r2 - r2(data.targets(), model.predict(shuffled));
    };

    const std::size_t units = p * opts.repeats;
    const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, units);
    if (workers == 1) {
        for (std::size_t u = 0; u < units; ++u) run(u);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t u = next++; u < units; u = next++) {
                        try {
                            run(u);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    for (auto& f : report.features) {
        const auto m = moments(f.raw);
        f.mean = m.mean;
        f.stddev = m.stddev;
    }
    return report;
}

void write_importance_raw_csv(std::ostream& out, const ImportanceReport& r) {
    out << "feature,repeat,delta_r2\n";
    for (const auto& f : r.features) {
        for (std::size_t k = 0; k < f.raw.size(); ++k) {
            out << f.feature << ',' << k << ',' << csv::format_double(f.raw[k]) << '\n';
        }
    }
}

void write_importance_summary_csv(std::ostream& out, const ImportanceReport& r) {
    out << "feature,mean_delta_r2,std_delta_r2\n";
    for (const auto& f : r.features) {
        out << f.feature << ',' << csv::format_double(f.mean) << ',' << csv::format_double(f.stddev)
            << '\n';
    }
}

}  // namespace satthermo
