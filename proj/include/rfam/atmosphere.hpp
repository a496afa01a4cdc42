#pragma once

namespace rfam {

/** Local air properties at one altitude; all zero above the model ceiling. */
struct EnvironmentSample {
    double density = 0.0;        // kg/m^3
    double pressure = 0.0;       // Pa
    double speed_of_sound = 0.0; // m/s
};

inline constexpr double kSeaLevelPressure = 101325.0;  // Pa
inline constexpr double kSeaLevelDensity = 1.225;      // kg/m^3
inline constexpr double kAtmosphereCeiling = 120e3;    // m, vacuum above

// US Standard Atmosphere 1976: piecewise-linear temperature layers up to
// 86 km geometric altitude (with the geometric->geopotential conversion),
// an exponential tail from 86 to 120 km, vacuum above.  h is geometric
// altitude above the mean radius in metres; h < -500 throws.
EnvironmentSample atmosphere(double h);

} // namespace rfam
