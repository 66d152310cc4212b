#include "satthermo/physics.hpp"

#include "satthermo/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace satthermo {

double viscosity(double temp_c, const ViscosityParams& params) {
    if (!(params.a > 0.0) || !(params.b > 0.0)) {
        throw InvalidParameterError("viscosity constants must be positive");
    }
    if (!(temp_c > -273.0)) {
        throw DomainError(fmt::format("viscosity undefined at {} °C (needs T > -273)", temp_c));
    }
    return params.a * std::exp(params.b / (273.0 + temp_c));
}

RegularSeries viscosity_series(const RegularSeries& temps, const ViscosityParams& params) {
    RegularSeries out = temps;
    for (auto& v : out.values()) {
        if (v) v = viscosity(*v, params);
    }
    return out;
}

}  // namespace satthermo
