#include "rfam/atmosphere.hpp"

#include <cmath>
#include <stdexcept>

namespace rfam {

namespace {

// 1976 US Standard Atmosphere constants.
constexpr double kRAir = 287.0528;       // J/(kg K), R*/M for dry air
constexpr double kGamma = 1.4;           // ratio of specific heats
constexpr double kGStd = 9.80665;        // m/s^2, used in the hydrostatic integral
constexpr double kEarthRadiusGp = 6356766.0; // m, radius of the geopotential conversion

// Layer bases in geopotential metres with lapse rate (K/m), base temperature
// (K) and base pressure (Pa).  Base pressures follow from integrating the
// hydrostatic equation layer by layer; the published values are kept to full
// precision so layer joins are continuous.
struct Layer {
    double h_base;   // geopotential m
    double lapse;    // K/m
    double t_base;   // K
    double p_base;   // Pa
};

constexpr Layer kLayers[] = {
    {0.0,     -6.5e-3, 288.15,  101325.0},
    {11000.0,  0.0,    216.65,  22632.06},
    {20000.0,  1.0e-3, 216.65,  5474.889},
    {32000.0,  2.8e-3, 228.65,  868.0187},
    {47000.0,  0.0,    270.65,  110.9063},
    {51000.0, -2.8e-3, 270.65,  66.93887},
    {71000.0, -2.0e-3, 214.65,  3.956420},
};
constexpr double kTopGeopotential = 84852.0; // m, edge of the layered model (86 km geometric)

// Exponential tail 86-120 km: pressure and density decay from the 86 km edge
// values with scale heights fitted to the published 120 km state
// (p = 2.5382e-3 Pa, rho = 2.222e-8 kg/m^3).
constexpr double kTailBase = 86000.0;    // geometric m
constexpr double kTailPressureScale = 6811.0;  // m
constexpr double kTailDensityScale = 5916.0;   // m

struct TP {
    double t, p;
};

TP layered(double h_geopotential) {
    int i = 0;
    constexpr int n = static_cast<int>(sizeof(kLayers) / sizeof(kLayers[0]));
    while (i + 1 < n && kLayers[i + 1].h_base <= h_geopotential) ++i;
    const Layer& L = kLayers[i];
    const double dh = h_geopotential - L.h_base;
    const double t = L.t_base + L.lapse * dh;
    double p;
    if (L.lapse == 0.0) {
        p = L.p_base * std::exp(-kGStd * dh / (kRAir * L.t_base));
    } else {
        p = L.p_base * std::pow(L.t_base / t, kGStd / (kRAir * L.lapse));
    }
    return {t, p};
}

} // namespace

EnvironmentSample atmosphere(double h) {
    if (h < -500.0)
        throw std::domain_error("altitude below the atmosphere model floor (-500 m)");
    if (h >= kAtmosphereCeiling) return {};

    EnvironmentSample s;
    if (h < kTailBase) {
        const double hg = kEarthRadiusGp * h / (kEarthRadiusGp + h);
        const TP tp = layered(std::min(hg, kTopGeopotential));
        s.pressure = tp.p;
        s.density = tp.p / (kRAir * tp.t);
        s.speed_of_sound = std::sqrt(kGamma * kRAir * tp.t);
    } else {
        const TP edge = layered(kTopGeopotential);
        const double rho_edge = edge.p / (kRAir * edge.t);
        const double dh = h - kTailBase;
        s.pressure = edge.p * std::exp(-dh / kTailPressureScale);
        s.density = rho_edge * std::exp(-dh / kTailDensityScale);
        // Temperature implied by p and rho keeps the sound speed self-consistent.
        s.speed_of_sound = std::sqrt(kGamma * s.pressure / s.density);
    }
    return s;
}

} // namespace rfam
