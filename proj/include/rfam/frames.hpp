#pragma once

#include <Eigen/Dense>

#include "rfam/vehicle.hpp"

namespace rfam {

/** Position/velocity pair in one frame; which frame is by context. */
struct FrameState {
    Eigen::Vector3d r; // m
    Eigen::Vector3d v; // m/s
};

// Inertial and Earth-fixed frames share the polar axis and are aligned at
// t = 0; the Earth-fixed frame rotates eastward at the sidereal rate.
FrameState eci_to_ecef(const Eigen::Vector3d& r_eci, const Eigen::Vector3d& v_eci, double t);
FrameState ecef_to_eci(const Eigen::Vector3d& r_ecef, const Eigen::Vector3d& v_ecef, double t);

/** Keplerian shape/orientation subset sufficient for orbit targeting. */
struct OrbitalElements {
    double semi_major_axis; // m
    double eccentricity;
    double inclination;     // rad
};

// Elements from an inertial state: a from the vis-viva energy, e from the
// eccentricity vector, inclination from the angular-momentum tilt.  Throws
// for parabolic or rectilinear (zero angular momentum) states.
OrbitalElements orbital_elements(const Eigen::Vector3d& r, const Eigen::Vector3d& v);

// Earth-fixed position of a site on the spherical Earth model.
Eigen::Vector3d site_position_ecef(const LaunchSite& site);

// Inertial state of a site at time t (at rest in the rotating frame, so its
// inertial velocity is the Earth-rotation term).
FrameState site_state_eci(const LaunchSite& site, double t);

} // namespace rfam
