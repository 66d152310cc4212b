#include "satthermo/errors.hpp"
#include "satthermo/evaluation.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace satthermo;
using testing_support::make_dataset;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }

Dataset eq2_with_spread(std::size_t n, double sd_t, double sd_rh, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds(TargetKind::topsoil, default_features());
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 2> x{20.0 + sd_t * standard_normal(rng), 60.0 + sd_rh * standard_normal(rng)};
        ds.add_row(testing_support::t0(), x, 0.88 * x[0] + 0.19 * x[1] - 8.05 + 1.7 * standard_normal(rng));
    }
    return ds;
}

}  // namespace

TEST(R2, SpecExamples) {
    EXPECT_EQ(r2(v({1, 2, 3}), v({1, 2, 3})), 1.0);
    EXPECT_EQ(r2(v({1, 2, 3}), v({2, 2, 2})), 0.0);
    EXPECT_DOUBLE_EQ(r2(v({0, 1, 2}), v({0, 1, 4})), -1.0);
    EXPECT_THROW(r2(v({3, 3, 3}), v({1, 2, 3})), UndefinedMetricError);
    EXPECT_THROW(r2(v({1, 2}), v({1})), ShapeError);
    EXPECT_THROW(r2(v({}), v({})), ShapeError);
}

TEST(Rmse, SpecExamples) {
    EXPECT_DOUBLE_EQ(rmse(v({0, 0}), v({1, -1})), 1.0);
    EXPECT_EQ(rmse(v({4, 5}), v({4, 5})), 0.0);
    EXPECT_DOUBLE_EQ(rmse(v({0, 0}), v({3, 4})), std::sqrt(12.5));
}

TEST(Metrics, PropertyTranslationAndScaling) {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(10 + uniform_below(rng, 50)), p(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = 10 * standard_normal(rng);
            p[i] = a[i] + standard_normal(rng);
        }
        const double c = 100 * standard_normal(rng);
        const double s = 0.1 + 5 * uniform01(rng);
        auto shift = [&](std::vector<double> x) { for (auto& e : x) e += c; return x; };
        auto scale = [&](std::vector<double> x) { for (auto& e : x) e *= s; return x; };
        EXPECT_NEAR(r2(shift(a), shift(p)), r2(a, p), 1e-9);
        EXPECT_NEAR(rmse(shift(a), shift(p)), rmse(a, p), 1e-9);
        EXPECT_NEAR(rmse(scale(a), scale(p)), s * rmse(a, p), 1e-9);
        EXPECT_LE(r2(a, p), 1.0);
        EXPECT_GE(rmse(a, p), 0.0);
    }
}

TEST(Evaluate, ReportAndCsv) {
    const auto ds = testing_support::eq2_dataset(100, 1.0);
    const auto parts = split(ds, {0.8, 42});
    const TrainedModel m(fit_mlr(parts.train), {});
    const auto r = evaluate(m, parts.train, parts.test);
    EXPECT_EQ(r.n_train, 80u);
    EXPECT_EQ(r.n_test, 20u);
    EXPECT_GT(r.r2_train, 0.9);
    std::ostringstream out;
    write_metrics_csv(out, r);
    EXPECT_EQ(out.str().rfind("split,n,r2,rmse\ntrain,80,", 0), 0u);
}

TEST(Importance, UnusedFeatureScoresExactlyZero) {
    const auto ds = eq2_with_spread(300, 6, 15, 2);
    MlrModel only_t{default_features(), {0.88, 0.0}, -8.05};
    const auto rep = permutation_importance(TrainedModel(only_t, {}), ds, {10, 42});
    ASSERT_EQ(rep.features.size(), 2u);
    EXPECT_EQ(rep.features[1].feature, "rh_pct");
    ASSERT_EQ(rep.features[1].raw.size(), 10u);
    for (double d : rep.features[1].raw) EXPECT_EQ(d, 0.0);
    EXPECT_EQ(rep.features[1].mean, 0.0);
    EXPECT_EQ(rep.features[1].stddev, 0.0);
}

TEST(Importance, TemperatureOutranksHumidity) {
    const TrainedModel eq2(MlrModel::topsoil_equation(), {});
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const auto rep = permutation_importance(eq2, eq2_with_spread(500, 6, 15, seed), {10, seed});
        EXPECT_GT(rep.features[0].mean, rep.features[1].mean) << seed;
    }
}

TEST(Importance, DeterministicAndWorkerIndependent) {
    const auto ds = eq2_with_spread(200, 6, 15, 3);
    const TrainedModel m(fit_rf(ds, 1, {10}), {});
    const auto a = permutation_importance(m, ds, {10, 42, 1});
    const auto b = permutation_importance(m, ds, {10, 42, 1});
    const auto c = permutation_importance(m, ds, {10, 42, 4});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    EXPECT_EQ(a.repeats, 10u);
    EXPECT_EQ(a.seed, 42u);
    for (const auto& f : a.features) EXPECT_EQ(f.raw.size(), 10u);
}

TEST(Importance, MatchesTheDefinition) {
    // Recompute one feature's raw values by hand from the documented seeding.
    const auto ds = eq2_with_spread(120, 6, 15, 4);
    const TrainedModel m(MlrModel::topsoil_equation(), {});
    const auto rep = permutation_importance(m, ds, {3, 9});
    const auto base = r2(ds.targets(), m.predict(ds));
    EXPECT_EQ(rep.baseline_r2, base);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < 3; ++r) {
            auto col = ds.column(j);
            Rng rng(derive_seed(9, "importance", j, r));
            shuffle(std::span<double>(col), rng);
            auto shuffled = ds;
            for (std::size_t i = 0; i < ds.size(); ++i) shuffled.feature(i, j) = col[i];
            // Shuffling permutes values only.
            auto x = ds.column(j), y = shuffled.column(j);
            std::sort(x.begin(), x.end());
            std::sort(y.begin(), y.end());
            EXPECT_EQ(x, y);
            const double d = base - r2(ds.targets(), m.predict(shuffled));
            EXPECT_EQ(rep.features[j].raw[r], d);
            mean += d;
        }
        EXPECT_NEAR(rep.features[j].mean, mean / 3.0, 1e-15);
    }
}

TEST(Importance, ZeroRepeatsRejected) {
    const TrainedModel m(MlrModel::topsoil_equation(), {});
    EXPECT_THROW(permutation_importance(m, eq2_with_spread(20, 6, 15, 1), {0, 42}), InvalidParameterError);
}

TEST(Importance, CsvHeaders) {
    const TrainedModel m(MlrModel::topsoil_equation(), {});
    const auto rep = permutation_importance(m, eq2_with_spread(50, 6, 15, 1), {2, 42});
    std::ostringstream raw, summary;
    write_importance_raw_csv(raw, rep);
    write_importance_summary_csv(summary, rep);
    EXPECT_EQ(raw.str().rfind("feature,repeat,delta_r2\n", 0), 0u);
    EXPECT_EQ(summary.str().rfind("feature,mean_delta_r2,std_delta_r2\n", 0), 0u);
    const auto text = raw.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
