#include "rfam/staging.hpp"

#include <cmath>
#include <stdexcept>

#include "rfam/constants.hpp"

namespace rfam {

namespace {

// Payload fraction of a single stage flying a speed gain dv: with mass ratio
// R = exp(dv / (Isp g0)) and structure ratio eps, the stage leaves
// lambda = 1 - (1 - 1/R)/(1 - eps) of its ignition mass for everything above.
double stage_payload_fraction(double dv, double isp, double eps) {
    const double ratio = std::exp(dv / (isp * kG0));
    return 1.0 - (1.0 - 1.0 / ratio) / (1.0 - eps);
}

// Largest dv one stage can fly with non-negative payload: lambda = 0 at
// R = 1/eps, i.e. dv = Isp g0 ln(1/eps).
double stage_dv_limit(double isp, double eps) {
    return isp * kG0 * std::log(1.0 / eps);
}

} // namespace

double ideal_ascent_dv(const MissionSpec& mission) {
    const double r_orbit = kEarthRadius + mission.target_altitude;
    const double v_orbit = std::sqrt(kMu / r_orbit);
    const double r_site = kEarthRadius + mission.launch_site.altitude;
    const double credit =
        kEarthOmega * r_site * std::cos(mission.launch_site.latitude_deg * kDeg);
    return v_orbit - credit;
}

double launch_azimuth(double inclination_deg, double latitude_deg) {
    const double s = std::cos(inclination_deg * kDeg) / std::cos(latitude_deg * kDeg);
    if (!(s >= -1.0 && s <= 1.0))
        throw std::domain_error("target inclination lies below the launch-site latitude");
    return std::asin(s);
}

StagingResult classical_baseline_size(const VehicleSpec& vehicle, const MissionSpec& mission,
                                      double dv_loss, double stage1_reserve_dv) {
    if (!(dv_loss >= 0.0)) throw std::domain_error("loss allowance must be non-negative");
    if (!(stage1_reserve_dv >= 0.0))
        throw std::domain_error("booster reserve must be non-negative");
    const StageSpec& s1 = vehicle.stages[0];
    const StageSpec& s2 = vehicle.stages[1];

    // A post-separation reserve burn multiplies the booster's dry-plus-
    // reserve mass by exp(dv_res/(Isp g0)); carrying that through the stack
    // algebra is exactly a classical stage with the structure ratio inflated
    // by the same factor.
    const double eps1_eff =
        s1.structure_ratio * std::exp(stage1_reserve_dv / (s1.specific_impulse * kG0));
    if (!(eps1_eff < 1.0))
        throw std::domain_error("booster reserve exceeds what the structure ratio allows");

    const double dv_total = ideal_ascent_dv(mission) + dv_loss;
    // Feasible booster share: each stage must keep a positive payload.
    double lo = std::max(0.0, dv_total - stage_dv_limit(s2.specific_impulse, s2.structure_ratio));
    double hi = std::min(dv_total, stage_dv_limit(s1.specific_impulse, eps1_eff));
    if (!(lo < hi))
        throw std::domain_error("no stage split reaches the target with positive payload");

    const auto fraction = [&](double dv1) {
        return stage_payload_fraction(dv1, s1.specific_impulse, eps1_eff) *
               stage_payload_fraction(dv_total - dv1, s2.specific_impulse, s2.structure_ratio);
    };

    // Golden-section maximization of the overall payload fraction; the
    // objective is smooth and unimodal on the feasible split interval.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fraction(c), fd = fraction(d);
    while (b - a > 1e-10 * dv_total) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fraction(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fraction(d);
        }
    }
    const double dv1 = 0.5 * (a + b);
    const double dv2 = dv_total - dv1;

    const double lambda1 = stage_payload_fraction(dv1, s1.specific_impulse, eps1_eff);
    const double lambda2 = stage_payload_fraction(dv2, s2.specific_impulse, s2.structure_ratio);
    if (!(lambda1 > 0.0 && lambda2 > 0.0))
        throw std::domain_error("no stage split reaches the target with positive payload");

    StagingResult out;
    out.dv_total = dv_total;
    out.dv_stage1 = dv1;
    out.dv_stage2 = dv2;

    // Unwind the stack from the payload down; the fairing is dead mass on
    // stage 2 all the way to burnout.
    const double m_L = mission.min_payload;
    const double m02 = (m_L + vehicle.fairing_mass) / lambda2;
    const double m01 = m02 / lambda1;
    const double ratio1 = std::exp(dv1 / (s1.specific_impulse * kG0));
    const double ratio2 = std::exp(dv2 / (s2.specific_impulse * kG0));

    out.masses.m_L = m_L;
    out.masses.m_s1 = s1.structure_ratio * (m01 - m02);
    out.masses.m_p1 = out.masses.m_s1 * (1.0 - s1.structure_ratio) / s1.structure_ratio;
    out.masses.m_p2 = m02 * (1.0 - 1.0 / ratio2);
    out.masses.m_s2 = out.masses.m_p2 * s2.structure_ratio / (1.0 - s2.structure_ratio);
    out.glow = glow(out.masses, vehicle.fairing_mass);
    // Ascent share of the booster burn; the reserve is flown after
    // separation and does not extend the boost to staging.
    out.burn_time1 = m01 * (1.0 - 1.0 / ratio1) / s1.mass_flow();
    out.burn_time2 = out.masses.m_p2 / s2.mass_flow();
    out.payload_ratio = m_L / out.glow;
    return out;
}

} // namespace rfam
