#pragma once

#include <Eigen/Dense>

#include "rfam/atmosphere.hpp"
#include "rfam/vehicle.hpp"

namespace rfam {

/** Point-mass flight state in the inertial frame. */
struct State {
    Eigen::Vector3d r = Eigen::Vector3d::Zero(); // m, inertial position
    Eigen::Vector3d v = Eigen::Vector3d::Zero(); // m/s, inertial velocity
    double m = 0.0;                              // kg
    double t = 0.0;                              // s since lift-off
};

/** Commanded thrust direction, with an optional magnitude for throttled burns. */
struct Control {
    Eigen::Vector3d u = Eigen::Vector3d::UnitX(); // unit thrust direction
    double throttle_thrust = -1.0;                // N; < 0 means full thrust
};

/** Time derivative of a State under the point-mass equations of motion. */
struct StateDerivative {
    Eigen::Vector3d r_dot;
    Eigen::Vector3d v_dot;
    double m_dot;
};

// Central inverse-square gravity, -mu r / |r|^3.
Eigen::Vector3d gravity_accel(const Eigen::Vector3d& r);

// Thrust at ambient pressure: T_SL at sea level rising to T_vac in vacuum,
// linear in (1 - p/p_SL) and clamped to [T_SL, T_vac].
double thrust_at_altitude(const StageSpec& stage, double h);

// Airspeed vector: inertial velocity minus the Earth-rotation carry velocity.
Eigen::Vector3d relative_velocity(const State& state);

// Drag deceleration opposing the relative wind; Mach taken as zero where the
// sampled speed of sound is zero (above the atmosphere).
Eigen::Vector3d drag_accel(const State& state, const DragModel& drag,
                           const EnvironmentSample& env);

// Point-mass equations of motion.  When burning, thrust magnitude follows the
// ambient pressure (or the commanded throttle when control.throttle_thrust is
// set) and propellant flows at the constant vacuum rate (throttle scales it);
// coasting zeroes both.
StateDerivative eom(const State& state, const Control& control, const StageSpec& stage,
                    const DragModel& drag, bool burning);

// Rocket-equation velocity gain Isp g0 ln(m0/mf).
double ideal_delta_v(double m0, double mf, double isp);

} // namespace rfam
