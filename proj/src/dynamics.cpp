#include "rfam/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "rfam/constants.hpp"

namespace rfam {

Eigen::Vector3d gravity_accel(const Eigen::Vector3d& r) {
    const double rn = r.norm();
    if (!(rn > 0.0)) throw std::domain_error("gravity undefined at the origin");
    return -kMu / (rn * rn * rn) * r;
}

double thrust_at_altitude(const StageSpec& stage, double h) {
    const EnvironmentSample env = atmosphere(h);
    const double t = stage.thrust_sea_level +
                     (stage.thrust_vacuum - stage.thrust_sea_level) *
                         (1.0 - env.pressure / kSeaLevelPressure);
    return std::clamp(t, stage.thrust_sea_level, stage.thrust_vacuum);
}

Eigen::Vector3d relative_velocity(const State& state) {
    const Eigen::Vector3d omega(0.0, 0.0, kEarthOmega);
    return state.v - omega.cross(state.r);
}

Eigen::Vector3d drag_accel(const State& state, const DragModel& drag,
                           const EnvironmentSample& env) {
    if (!(state.m > 0.0)) throw std::domain_error("drag undefined for non-positive mass");
    if (env.density <= 0.0) return Eigen::Vector3d::Zero();
    const Eigen::Vector3d v_rel = relative_velocity(state);
    const double speed = v_rel.norm();
    if (speed <= 0.0) return Eigen::Vector3d::Zero();
    const double mach = env.speed_of_sound > 0.0 ? speed / env.speed_of_sound : 0.0;
    const double cd = drag.cd_at(mach);
    return -0.5 * env.density * speed * cd * drag.reference_area / state.m * v_rel;
}

StateDerivative eom(const State& state, const Control& control, const StageSpec& stage,
                    const DragModel& drag, bool burning) {
    if (!(state.m > 0.0)) throw std::domain_error("equations of motion need positive mass");

    const double h = state.r.norm() - kEarthRadius;
    const EnvironmentSample env = atmosphere(std::max(h, -500.0));

    StateDerivative d;
    d.r_dot = state.v;
    d.v_dot = gravity_accel(state.r) + drag_accel(state, drag, env);
    d.m_dot = 0.0;
    if (burning) {
        double thrust;
        if (control.throttle_thrust >= 0.0) {
            thrust = control.throttle_thrust;
            d.m_dot = -thrust / (stage.specific_impulse * kG0);
        } else {
            thrust = thrust_at_altitude(stage, std::max(h, -500.0));
            // Constant propellant flow fixed by the vacuum rating; the force
            // produced still varies with ambient pressure.
            d.m_dot = -stage.mass_flow();
        }
        d.v_dot += thrust / state.m * control.u;
    }
    return d;
}

double ideal_delta_v(double m0, double mf, double isp) {
    if (!(mf > 0.0) || mf > m0)
        throw std::domain_error("rocket equation needs 0 < mf <= m0");
    return isp * kG0 * std::log(m0 / mf);
}

} // namespace rfam
