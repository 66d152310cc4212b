#pragma once

#include "satthermo/timeseries.hpp"

namespace satthermo {

/// Constants of the exponential viscosity law eta(T) = a * exp(b / (273 + T)).
struct ViscosityParams {
    double a = 1.98404e-6;  // Pa·s
    double b = 1825.85;     // kelvin-like units; the offset stays 273, not 273.15

    friend bool operator==(const ViscosityParams&, const ViscosityParams&) = default;
};

/// Dynamic viscosity of water in Pa·s at `temp_c` °C. Throws DomainError for
/// temp_c <= -273 and InvalidParameterError for non-positive constants.
double viscosity(double temp_c, const ViscosityParams& params = {});

/// Pointwise viscosity; missing slots stay missing.
RegularSeries viscosity_series(const RegularSeries& temps, const ViscosityParams& params = {});

}  // namespace satthermo
