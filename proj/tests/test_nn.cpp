#include "satthermo/errors.hpp"
#include "satthermo/evaluation.hpp"
#include "satthermo/nn.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace satthermo;
using testing_support::eq2_dataset;
using testing_support::make_dataset;

namespace {

NnModel blank_model(std::size_t inputs = 2) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < inputs; ++j) names.push_back("x" + std::to_string(j));
    Standardizer st(names, std::vector<double>(inputs, 0.0), std::vector<double>(inputs, 1.0));
    return NnModel(st, 0.0, 1.0, {inputs, 10, 5, 1});
}

void randomize(NnModel& m, Rng& rng, double scale = 1.0) {
    std::vector<double> p(m.parameter_count());
    for (auto& v : p) v = scale * standard_normal(rng);
    m.set_parameters(p);
}

// Independent forward pass that also reports the smallest |pre-activation| of any hidden unit.
double oracle_forward(const NnModel& m, std::span<const double> z, double* min_pre) {
    std::vector<double> a(z.begin(), z.end());
    const auto& layers = m.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        std::vector<double> out(L.outputs);
        for (std::size_t o = 0; o < L.outputs; ++o) {
            double s = L.biases[o];
            for (std::size_t i = 0; i < L.inputs; ++i) s += L.weights[o * L.inputs + i] * a[i];
            if (l + 1 < layers.size()) {
                if (min_pre) *min_pre = std::min(*min_pre, std::abs(s));
                s = std::max(0.0, s);
            }
            out[o] = s;
        }
        a = std::move(out);
    }
    return a[0];
}

double oracle_loss(const NnModel& m, const std::vector<double>& rows, const std::vector<double>& y) {
    const std::size_t p = rows.size() / y.size();
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = oracle_forward(m, std::span(rows).subspan(i * p, p), nullptr) - y[i];
        s += e * e;
    }
    return s / static_cast<double>(y.size());
}

}  // namespace

TEST(NnModel, ShapesMatchArchitecture) {
    auto m = blank_model();
    EXPECT_EQ(m.layer_sizes(), (std::vector<std::size_t>{2, 10, 5, 1}));
    EXPECT_EQ(m.parameter_count(), 2u * 10 + 10 + 10 * 5 + 5 + 5 * 1 + 1);
    std::vector<double> wrong(3);
    EXPECT_THROW(m.set_parameters(wrong), ShapeError);
    std::array<double, 3> too_wide{1, 2, 3};
    EXPECT_THROW(m.forward_standardized(too_wide), ShapeError);
}

TEST(NnModel, ZeroParametersPredictZero) {
    auto m = blank_model();
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        std::array<double, 2> z{10 * standard_normal(rng), 10 * standard_normal(rng)};
        EXPECT_EQ(m.forward_standardized(z), 0.0);
    }
    Standardizer st({"a", "b"}, {1.0, 2.0}, {3.0, 4.0});
    NnModel raw(st, 17.5, 2.0, {2, 10, 5, 1});
    std::array<double, 2> x{5.0, 6.0};
    EXPECT_EQ(raw.predict(x), 17.5);
}

TEST(NnModel, ForwardMatchesOracle) {
    Rng rng(2);
    auto m = blank_model();
    for (int trial = 0; trial < 50; ++trial) {
        randomize(m, rng);
        std::array<double, 2> z{standard_normal(rng), standard_normal(rng)};
        EXPECT_NEAR(m.forward_standardized(z), oracle_forward(m, z, nullptr), 1e-12);
    }
}

TEST(NnGradient, MatchesCentralDifferences) {
    Rng rng(3);
    auto m = blank_model();
    const std::size_t batch = 8;
    int checked = 0;
    while (checked < 20) {
        randomize(m, rng);
        std::vector<double> rows(batch * 2), y(batch);
        for (auto& v : rows) v = standard_normal(rng);
        for (auto& v : y) v = standard_normal(rng);
        double min_pre = INFINITY;
        for (std::size_t i = 0; i < batch; ++i) oracle_forward(m, std::span(rows).subspan(i * 2, 2), &min_pre);
        if (min_pre < 1e-3) continue;  // a kink too close for the finite difference
        ++checked;

        const auto g = nn_gradient(m, rows, y);
        EXPECT_NEAR(g.loss, oracle_loss(m, rows, y), 1e-12);
        const auto theta = m.parameters();
        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            auto plus = theta, minus = theta;
            plus[k] += h;
            minus[k] -= h;
            NnModel mp = m, mm = m;
            mp.set_parameters(plus);
            mm.set_parameters(minus);
            const double fd = (oracle_loss(mp, rows, y) - oracle_loss(mm, rows, y)) / (2 * h);
            const double denom = std::max({std::abs(fd), std::abs(g.gradient[k]), 1e-6});
            worst = std::max(worst, std::abs(fd - g.gradient[k]) / denom);
        }
        EXPECT_LE(worst, 1e-4);
    }
}

TEST(NnGradient, DeadUnitHasNoIncomingGradient) {
    Rng rng(4);
    auto m = blank_model();
    randomize(m, rng);
    // Unit 3 of the first hidden layer: zero weights and a negative bias keep it off.
    auto& first = m.layers()[0];
    first.weights[3 * 2 + 0] = 0.0;
    first.weights[3 * 2 + 1] = 0.0;
    first.biases[3] = -1.0;
    std::vector<double> rows(16), y(8);
    for (auto& v : rows) v = standard_normal(rng);
    for (auto& v : y) v = standard_normal(rng);
    const auto g = nn_gradient(m, rows, y);
    EXPECT_EQ(g.gradient[3 * 2 + 0], 0.0);
    EXPECT_EQ(g.gradient[3 * 2 + 1], 0.0);
    EXPECT_EQ(g.gradient[20 + 3], 0.0);  // its bias follows the 20 weights
}

TEST(FitNn, LearnsALinearMap) {
    const auto ds = eq2_dataset(600);
    const auto parts = split(ds, {0.8, 42});
    const auto m = fit_nn(parts.train, 42);
    std::vector<double> pred;
    for (std::size_t i = 0; i < parts.test.size(); ++i) pred.push_back(m.predict(parts.test.row(i)));
    EXPECT_GE(r2(parts.test.targets(), pred), 0.99);
    EXPECT_LE(m.training.final_mse, m.training.initial_mse);
    EXPECT_GT(m.training.epochs_run, 0u);
}

TEST(FitNn, DeterministicBySeed) {
    const auto ds = eq2_dataset(200, 1.0);
    NnHyperparams hp;
    hp.epochs = 200;
    const auto a = fit_nn(ds, 5, hp);
    const auto b = fit_nn(ds, 5, hp);
    const auto c = fit_nn(ds, 6, hp);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.parameters(), c.parameters());
}

TEST(FitNn, SeedsGiveSimilarAccuracy) {
    const auto ds = eq2_dataset(500, 1.0);
    const auto parts = split(ds, {0.8, 1});
    auto score = [&](std::uint64_t seed) {
        const auto m = fit_nn(parts.train, seed);
        std::vector<double> pred;
        for (std::size_t i = 0; i < parts.test.size(); ++i) pred.push_back(m.predict(parts.test.row(i)));
        return r2(parts.test.targets(), pred);
    };
    EXPECT_NEAR(score(1), score(2), 0.02);
}

TEST(FitNn, MiniBatchesBeyondTheCap) {
    const auto ds = eq2_dataset(300, 0.5);
    NnHyperparams hp;
    hp.batch_cap = 64;
    hp.epochs = 100;
    const auto m = fit_nn(ds, 3, hp);
    EXPECT_LE(m.training.final_mse, m.training.initial_mse);
    EXPECT_EQ(m, fit_nn(ds, 3, hp));
}

TEST(FitNn, Preconditions) {
    EXPECT_THROW(fit_nn(eq2_dataset(49), 1), TooFewRowsError);
    NnHyperparams hp;
    hp.learning_rate = 1e6;
    hp.epochs = 500;
    // A huge step either diverges (reported) or is rescued by keeping the best parameters.
    try {
        const auto m = fit_nn(eq2_dataset(100, 1.0), 1, hp);
        EXPECT_LE(m.training.final_mse, m.training.initial_mse);
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.epoch(), 0u);
    }
}
