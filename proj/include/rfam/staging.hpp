#pragma once

#include "rfam/vehicle.hpp"

namespace rfam {

// Inertial speed gain needed to reach the target orbit before any losses:
// circular speed at target altitude minus the Earth-rotation credit at the
// launch site (omega * r_site * cos latitude).
double ideal_ascent_dv(const MissionSpec& mission);

// Inertial launch azimuth in radians, measured from north toward east, that
// puts the ascent plane at the target inclination: sin(az) = cos(i)/cos(lat).
// Throws std::domain_error when the inclination is below the site latitude.
double launch_azimuth(double inclination_deg, double latitude_deg);

/** Rocket-equation mass budget at the payload-optimal split of speed gain. */
struct StagingResult {
    MassConfiguration masses;
    double glow = 0.0;
    double dv_total = 0.0;       // m/s, ideal ascent value plus loss allowance
    double dv_stage1 = 0.0;      // m/s assigned to the booster burn
    double dv_stage2 = 0.0;
    double burn_time1 = 0.0;     // s at constant vacuum mass flow
    double burn_time2 = 0.0;
    double payload_ratio = 0.0;  // m_L / GLOW
};

// Sizes both stages from the rocket equation alone. The required speed gain
// is ideal_ascent_dv plus the caller's loss allowance; the split between the
// stages maximizes the overall payload fraction. The fairing rides as
// stage-2 dead mass to burnout. A returning booster can be given a reserve
// speed gain flown by stage 1 on top of its ascent share (burned after
// separation, so it scales the booster without riding on stage 2's budget).
// Throws std::domain_error when no split can deliver a positive payload.
StagingResult classical_baseline_size(const VehicleSpec& vehicle, const MissionSpec& mission,
                                      double dv_loss, double stage1_reserve_dv = 0.0);

} // namespace rfam
