#include "satthermo/mlr.hpp"

#include "satthermo/errors.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace satthermo {

double MlrModel::predict(std::span<const double> row) const {
    if (row.size() != coefficients.size()) {
        throw ShapeError(fmt::format("MLR expects {} features, got {}", coefficients.size(), row.size()));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) sum += coefficients[j] * row[j];
    return sum + intercept;
}

double MlrModel::coefficient(std::string_view feature) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        if (feature_names[j] == feature) return coefficients.at(j);
    }
    throw InvalidParameterError(fmt::format("model has no feature '{}'", feature));
}

MlrModel MlrModel::topsoil_equation() {
    return {default_features(), {0.88, 0.19}, -8.05};
}

MlrModel MlrModel::profile_equation() {
    return {default_features(), {0.88, 0.19}, -8.32};
}

double predict_mlr(const MlrModel& m, double t_ambient, double rh) {
    std::vector<double> row(m.feature_names.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (m.feature_names[j] == kFeatureTemperature) {
            row[j] = t_ambient;
        } else if (m.feature_names[j] == kFeatureHumidity) {
            row[j] = rh;
        } else {
            throw ShapeError(fmt::format("model uses feature '{}' beyond (T, RH)", m.feature_names[j]));
        }
    }
    return m.predict(row);
}

MlrModel fit_mlr(const Dataset& train) {
    const std::size_t n = train.size();
    const std::size_t p = train.n_features();
    if (n < p + 1) {
        throw TooFewRowsError(fmt::format("MLR with {} features needs at least {} rows, got {}", p, p + 1, n));
    }

    std::vector<double> mean(p);
    std::vector<double> sd(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto m = moments(train.column(j));
        if (!(m.stddev > 0.0)) {
            throw SingularSystemError(fmt::format(
                "design is rank-deficient: feature '{}' is constant", train.feature_names()[j]));
        }
        mean[j] = m.mean;
        sd[j] = m.stddev;
    }

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            x(r, static_cast<Eigen::Index>(j + 1)) = (train.feature(i, j) - mean[j]) / sd[j];
        }
        y(r) = train.target(i);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p + 1)) {
        throw SingularSystemError(
            fmt::format("design is rank-deficient (rank {} of {})", qr.rank(), p + 1));
    }
    const Eigen::VectorXd beta = qr.solve(y);

    MlrModel model;
    model.feature_names = train.feature_names();
    model.coefficients.resize(p);
    model.intercept = beta(0);
    for (std::size_t j = 0; j < p; ++j) {
        const double c = beta(static_cast<Eigen::Index>(j + 1)) / sd[j];
        model.coefficients[j] = c;
        model.intercept -= c * mean[j];
    }
    for (double c : model.coefficients) {
        if (!std::isfinite(c)) throw SingularSystemError("non-finite coefficient");
    }
    if (!std::isfinite(model.intercept)) throw SingularSystemError("non-finite intercept");
    return model;
}

}  // namespace satthermo
