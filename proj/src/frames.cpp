#include "rfam/frames.hpp"

#include <cmath>
#include <stdexcept>

#include "rfam/constants.hpp"

namespace rfam {

namespace {

Eigen::Matrix3d rotation_about_pole(double angle) {
    Eigen::Matrix3d m;
    const double c = std::cos(angle), s = std::sin(angle);
    m << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return m;
}

const Eigen::Vector3d kOmegaVec(0.0, 0.0, kEarthOmega);

} // namespace

FrameState eci_to_ecef(const Eigen::Vector3d& r_eci, const Eigen::Vector3d& v_eci, double t) {
    const Eigen::Matrix3d R = rotation_about_pole(-kEarthOmega * t);
    FrameState out;
    out.r = R * r_eci;
    out.v = R * (v_eci - kOmegaVec.cross(r_eci));
    return out;
}

FrameState ecef_to_eci(const Eigen::Vector3d& r_ecef, const Eigen::Vector3d& v_ecef, double t) {
    const Eigen::Matrix3d R = rotation_about_pole(kEarthOmega * t);
    FrameState out;
    out.r = R * r_ecef;
    out.v = R * v_ecef + kOmegaVec.cross(out.r);
    return out;
}

OrbitalElements orbital_elements(const Eigen::Vector3d& r, const Eigen::Vector3d& v) {
    const double rn = r.norm();
    if (!(rn > 0.0)) throw std::domain_error("zero-radius state has no orbit");
    const double energy = 0.5 * v.squaredNorm() - kMu / rn;
    if (std::abs(energy) < 1e-12 * kMu / rn)
        throw std::domain_error("parabolic state: semi-major axis undefined");

    const Eigen::Vector3d h = r.cross(v);
    const double hn = h.norm();
    if (hn < 1e-9 * rn * v.norm() || hn == 0.0)
        throw std::domain_error("rectilinear state: orbit plane undefined");

    OrbitalElements el;
    el.semi_major_axis = -kMu / (2.0 * energy);
    const Eigen::Vector3d e_vec = (v.cross(h) - kMu * r / rn) / kMu;
    el.eccentricity = e_vec.norm();
    el.inclination = std::acos(std::clamp(h.z() / hn, -1.0, 1.0));
    return el;
}

Eigen::Vector3d site_position_ecef(const LaunchSite& site) {
    const double lat = site.latitude_deg * kDeg;
    const double lon = site.longitude_deg * kDeg;
    const double radius = kEarthRadius + site.altitude;
    return radius * Eigen::Vector3d(std::cos(lat) * std::cos(lon),
                                    std::cos(lat) * std::sin(lon), std::sin(lat));
}

FrameState site_state_eci(const LaunchSite& site, double t) {
    return ecef_to_eci(site_position_ecef(site), Eigen::Vector3d::Zero(), t);
}

} // namespace rfam
