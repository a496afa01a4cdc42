#pragma once

#include <string>
#include <vector>

namespace rfam {

/** Piecewise-linear drag coefficient over Mach number plus reference area. */
struct DragModel {
    double reference_area = 0.0;        // m^2
    std::vector<double> mach;           // strictly increasing sample points
    std::vector<double> cd;             // C_D at each Mach sample, all >= 0

    // Linear interpolation between samples, clamped at the ends.
    double cd_at(double mach_number) const;
};

/** One stage: propulsion and structural fraction. */
struct StageSpec {
    double thrust_vacuum = 0.0;         // N
    double thrust_sea_level = 0.0;      // N
    double specific_impulse = 0.0;      // s
    double structure_ratio = 0.0;       // m_s / (m_s + m_p), in (0,1)
    bool reusable = false;

    // Propellant mass flow, constant over a burn (vacuum thrust / Isp-weight).
    double mass_flow() const;
};

enum class VehicleKind { ELV, RLV };

/** Two-stage launcher description; stage index 0 is the booster. */
struct VehicleSpec {
    VehicleKind kind = VehicleKind::ELV;
    StageSpec stages[2];
    double fairing_mass = 0.0;          // kg, carried to stage-2 burnout
    DragModel drag_model;
    std::string name;
};

/** Launch (and, for a returning booster, landing) site in geodetic terms. */
struct LaunchSite {
    double latitude_deg = 0.0;          // geodetic, [-90, 90]
    double longitude_deg = 0.0;         // [-180, 180]
    double altitude = 0.0;              // m above mean radius
};

/** Target orbit, payload floor, and campaign length for one launcher. */
struct MissionSpec {
    double target_altitude = 0.0;       // m above mean radius (semi-major axis = R_E + this)
    double target_eccentricity = 0.0;
    double target_inclination_deg = 0.0;
    double min_payload = 0.0;           // kg
    LaunchSite launch_site;
    int launch_count = 1;
};

/** Trajectory-constraint parameters (attitude, loads, descent events). */
struct ConstraintParams {
    double alpha_ascent_max_deg = 1.0;  // max angle of attack, powered ascent
    double alpha_descent_max_deg = 2.0; // max angle of attack, descent gravity turn
    double twr_max = 1.45;              // lift-off thrust-to-weight ceiling
    double axial_load_max = 6.0;        // g-units at stage-1 burnout
    double t_coast = 20.0;              // s, post-separation coast before boost-back
    double h_reentry_burn = 80e3;       // m, re-entry burn ignition altitude
    double v_rel_after_reentry = 60.0;  // m/s, relative speed at re-entry burn end
    double vertical_rise_duration = 10.0; // s of straight-up flight off the pad
    double landing_throttle_min = 0.06; // landing-burn thrust floor, fraction of stage-1 T_SL
    double landing_throttle_max = 0.12; // landing-burn thrust ceiling, fraction of stage-1 T_SL
};

/** Stage/payload mass split of a sized vehicle. */
struct MassConfiguration {
    double m_s1 = 0.0;                  // kg, stage-1 structure (includes engines)
    double m_s2 = 0.0;                  // kg, stage-2 structure
    double m_p1 = 0.0;                  // kg, stage-1 propellant (all burns)
    double m_p2 = 0.0;                  // kg, stage-2 propellant
    double m_L = 0.0;                   // kg, payload
};

// Propellant mass implied by a structure mass and structure ratio:
// m_p = m_s (1 - eps) / eps.  Throws std::domain_error outside eps in (0,1).
double propellant_from_structure(double m_s, double eps);

// Gross lift-off mass: every stage mass plus payload plus fairing.
double glow(const MassConfiguration& cfg, double fairing_mass);

// Lift-off thrust-to-weight using booster sea-level thrust.
double twr_liftoff(const VehicleSpec& vehicle, double m0);

// Longitudinal acceleration in g-units for a given thrust and mass.
double axial_load(double thrust, double m);

/** One finding from validate(); errors violate a type invariant, warnings
 *  flag physically implausible but representable values. */
struct ValidationIssue {
    enum class Severity { Error, Warning } severity;
    std::string path;                   // dotted field path, e.g. "stages[0].structure_ratio"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const;                    // true when no Error-severity issues
    std::vector<std::string> errors() const;
    std::vector<std::string> warnings() const;
};

// Checks every invariant of the three records and adds plausibility warnings
// (e.g. a re-entry end speed above orbital speed, or an ignition altitude in
// exosphere territory).  Pure: identical inputs give identical reports.
ValidationReport validate(const VehicleSpec& vehicle, const MissionSpec& mission,
                          const ConstraintParams& params);

} // namespace rfam
