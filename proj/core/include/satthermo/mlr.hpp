#pragma once

#include "satthermo/dataset.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satthermo {

/// Affine model in raw feature units: sum_j coefficients[j] * x[j] + intercept.
struct MlrModel {
    std::vector<std::string> feature_names;
    std::vector<double> coefficients;
    double intercept = 0.0;

    double predict(std::span<const double> row) const;
    /// Coefficient of a named feature; throws InvalidParameterError if absent.
    double coefficient(std::string_view feature) const;

    /// Topsoil (5 cm) equation: 0.19*RH + 0.88*T - 8.05.
    static MlrModel topsoil_equation();
    /// Profile-average equation: 0.19*RH + 0.88*T - 8.32.
    static MlrModel profile_equation();

    friend bool operator==(const MlrModel&, const MlrModel&) = default;
};

double predict_mlr(const MlrModel& m, double t_ambient, double rh);

/// Ordinary least squares. Features are z-scored, the system is solved by
/// column-pivoting Householder QR, and the coefficients are mapped back to raw
/// units so predictions are unchanged. Needs at least n_features + 1 rows;
/// throws SingularSystemError for a rank-deficient design.
MlrModel fit_mlr(const Dataset& train);

}  // namespace satthermo
