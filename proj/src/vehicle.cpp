#include "rfam/vehicle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rfam/constants.hpp"

namespace rfam {

double DragModel::cd_at(double mach_number) const {
    if (mach.empty()) return 0.0;
    if (mach_number <= mach.front()) return cd.front();
    if (mach_number >= mach.back()) return cd.back();
    // Find the bracketing interval; tables are short, linear scan is fine.
    size_t i = 1;
    while (mach[i] < mach_number) ++i;
    const double w = (mach_number - mach[i - 1]) / (mach[i] - mach[i - 1]);
    return cd[i - 1] + w * (cd[i] - cd[i - 1]);
}

double StageSpec::mass_flow() const {
    return thrust_vacuum / (specific_impulse * kG0);
}

double propellant_from_structure(double m_s, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("structure ratio must lie in (0,1)");
    if (m_s < 0.0)
        throw std::domain_error("structure mass must be non-negative");
    return m_s * (1.0 - eps) / eps;
}

double glow(const MassConfiguration& cfg, double fairing_mass) {
    return cfg.m_s1 + cfg.m_p1 + cfg.m_s2 + cfg.m_p2 + cfg.m_L + fairing_mass;
}

double twr_liftoff(const VehicleSpec& vehicle, double m0) {
    if (!(m0 > 0.0)) throw std::domain_error("lift-off mass must be positive");
    return vehicle.stages[0].thrust_sea_level / (m0 * kG0);
}

double axial_load(double thrust, double m) {
    if (!(m > 0.0)) throw std::domain_error("mass must be positive");
    return thrust / (m * kG0);
}

bool ValidationReport::ok() const {
    for (const auto& i : issues)
        if (i.severity == ValidationIssue::Severity::Error) return false;
    return true;
}

std::vector<std::string> ValidationReport::errors() const {
    std::vector<std::string> out;
    for (const auto& i : issues)
        if (i.severity == ValidationIssue::Severity::Error)
            out.push_back(i.path + ": " + i.message);
    return out;
}

std::vector<std::string> ValidationReport::warnings() const {
    std::vector<std::string> out;
    for (const auto& i : issues)
        if (i.severity == ValidationIssue::Severity::Warning)
            out.push_back(i.path + ": " + i.message);
    return out;
}

namespace {

void add(ValidationReport& r, ValidationIssue::Severity sev, const std::string& path,
         const std::string& msg) {
    r.issues.push_back({sev, path, msg});
}

void check_stage(ValidationReport& r, const StageSpec& s, const std::string& path) {
    using Sev = ValidationIssue::Severity;
    if (!(s.structure_ratio > 0.0 && s.structure_ratio < 1.0))
        add(r, Sev::Error, path + ".structure_ratio", "must lie in (0,1)");
    if (!(s.thrust_sea_level > 0.0))
        add(r, Sev::Error, path + ".thrust_sea_level", "must be positive");
    if (s.thrust_sea_level > s.thrust_vacuum)
        add(r, Sev::Error, path + ".thrust_sea_level", "exceeds vacuum thrust");
    if (!(s.specific_impulse > 0.0))
        add(r, Sev::Error, path + ".specific_impulse", "must be positive");
}

} // namespace

ValidationReport validate(const VehicleSpec& vehicle, const MissionSpec& mission,
                          const ConstraintParams& params) {
    using Sev = ValidationIssue::Severity;
    ValidationReport r;

    check_stage(r, vehicle.stages[0], "stages[0]");
    check_stage(r, vehicle.stages[1], "stages[1]");
    if (vehicle.fairing_mass < 0.0)
        add(r, Sev::Error, "fairing_mass", "must be non-negative");
    if (vehicle.kind == VehicleKind::RLV) {
        if (!vehicle.stages[0].reusable)
            add(r, Sev::Error, "stages[0].reusable", "reusable launcher needs a reusable booster");
        if (vehicle.stages[1].reusable)
            add(r, Sev::Error, "stages[1].reusable", "second stage of a reusable launcher is expendable");
    }
    if (!(vehicle.drag_model.reference_area > 0.0))
        add(r, Sev::Error, "drag_model.reference_area", "must be positive");
    if (vehicle.drag_model.mach.size() != vehicle.drag_model.cd.size() ||
        vehicle.drag_model.mach.empty()) {
        add(r, Sev::Error, "drag_model", "needs matching, non-empty Mach and C_D samples");
    } else {
        for (size_t i = 1; i < vehicle.drag_model.mach.size(); ++i)
            if (vehicle.drag_model.mach[i] <= vehicle.drag_model.mach[i - 1])
                add(r, Sev::Error, "drag_model.mach", "sample points must strictly increase");
        for (double c : vehicle.drag_model.cd)
            if (c < 0.0) add(r, Sev::Error, "drag_model.cd", "coefficients must be non-negative");
    }

    if (!(mission.target_eccentricity >= 0.0 && mission.target_eccentricity < 1.0))
        add(r, Sev::Error, "mission.target_eccentricity", "must lie in [0,1)");
    if (!(mission.target_inclination_deg >= 0.0 && mission.target_inclination_deg <= 180.0))
        add(r, Sev::Error, "mission.target_inclination_deg", "must lie in [0,180]");
    if (!(mission.min_payload > 0.0))
        add(r, Sev::Error, "mission.min_payload", "must be positive");
    if (mission.launch_count < 1)
        add(r, Sev::Error, "mission.launch_count", "must be at least 1");
    if (std::abs(mission.launch_site.latitude_deg) > 90.0)
        add(r, Sev::Error, "mission.launch_site.latitude_deg", "must lie in [-90,90]");
    if (std::abs(mission.launch_site.longitude_deg) > 180.0)
        add(r, Sev::Error, "mission.launch_site.longitude_deg", "must lie in [-180,180]");
    {
        const double incl = mission.target_inclination_deg;
        const double lat = std::abs(mission.launch_site.latitude_deg);
        if (incl >= 0.0 && incl <= 180.0) {
            // Direct-injection reachability: |lat| must not exceed the inclination.
            const double reach = (incl <= 90.0) ? incl : 180.0 - incl;
            if (lat > reach + 1e-9)
                add(r, Sev::Warning, "mission.target_inclination_deg",
                    "below launch-site latitude; not reachable by direct injection");
        }
    }

    auto positive = [&](double v, const char* path) {
        if (!(v > 0.0)) add(r, Sev::Error, path, "must be positive");
    };
    positive(params.alpha_ascent_max_deg, "params.alpha_ascent_max_deg");
    positive(params.alpha_descent_max_deg, "params.alpha_descent_max_deg");
    positive(params.twr_max, "params.twr_max");
    positive(params.axial_load_max, "params.axial_load_max");
    positive(params.t_coast, "params.t_coast");
    positive(params.h_reentry_burn, "params.h_reentry_burn");
    positive(params.v_rel_after_reentry, "params.v_rel_after_reentry");
    positive(params.vertical_rise_duration, "params.vertical_rise_duration");
    if (!(params.twr_max > 1.0))
        add(r, Sev::Error, "params.twr_max", "must exceed 1 or the vehicle cannot lift off");
    if (!(params.landing_throttle_min > 0.0 &&
          params.landing_throttle_min <= params.landing_throttle_max))
        add(r, Sev::Error, "params.landing_throttle_min", "must be positive and <= the ceiling");

    // Plausibility screens: representable, but almost certainly unit mistakes.
    if (params.v_rel_after_reentry > 1000.0) {
        std::ostringstream os;
        os << "re-entry burn end speed " << params.v_rel_after_reentry
           << " m/s is implausibly high for a returning booster (orbital speed is ~7800 m/s); "
              "check units";
        add(r, Sev::Warning, "params.v_rel_after_reentry", os.str());
    }
    if (params.h_reentry_burn > 400e3) {
        std::ostringstream os;
        os << "re-entry burn ignition altitude " << params.h_reentry_burn / 1000.0
           << " km is above any sensible booster apogee; check units";
        add(r, Sev::Warning, "params.h_reentry_burn", os.str());
    }

    return r;
}

} // namespace rfam
