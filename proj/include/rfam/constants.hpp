#pragma once

// Physical and astrodynamic constants shared across the toolkit.
// All internal computation is SI (kg, m, s, N, rad); config-file units
// (tonf, km, deg, %) are converted at the parsing boundary.

namespace rfam {

inline constexpr double kG0 = 9.80665;            // standard gravity, m/s^2
inline constexpr double kMu = 3.986004418e14;     // Earth GM, m^3/s^2
inline constexpr double kEarthRadius = 6378137.0; // mean equatorial radius, m
inline constexpr double kEarthOmega = 7.2921159e-5; // rotation rate, rad/s
inline constexpr double kTonf = 9806.65;          // tonne-force in N
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDeg = kPi / 180.0;       // degrees -> radians

} // namespace rfam
