#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rfam/constants.hpp"
#include "rfam/staging.hpp"
#include "test_helpers.hpp"

using namespace rfam;

namespace {

VehicleSpec two_stage(double isp1, double eps1, double isp2, double eps2) {
    VehicleSpec v;
    v.kind = VehicleKind::ELV;
    v.stages[0] = {2.4e6, 2.28e6, isp1, eps1, false};
    v.stages[1] = {4.0e5, 3.8e5, isp2, eps2, false};
    v.fairing_mass = 0.0;
    return v;
}

MissionSpec orbit_mission(double alt, double lat_deg, double payload) {
    MissionSpec m;
    m.target_altitude = alt;
    m.target_inclination_deg = 51.6;
    m.min_payload = payload;
    m.launch_site = {lat_deg, -80.6, 0.0};
    return m;
}

}  // namespace

TEST_CASE("ideal ascent speed gain") {
    // 300 km circular from 28.5 deg latitude: orbital speed minus the
    // eastward pad velocity.
    const auto m = orbit_mission(300e3, 28.5, 1000.0);
    const double expected = std::sqrt(kMu / (kEarthRadius + 300e3)) -
                            kEarthOmega * kEarthRadius * std::cos(28.5 * kDeg);
    CHECK(ideal_ascent_dv(m) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ideal_ascent_dv(m) == doctest::Approx(7317.0213891045805).epsilon(1e-10));

    // A polar-site launch gets no rotation credit.
    auto polar = m;
    polar.launch_site.latitude_deg = 90.0;
    CHECK(ideal_ascent_dv(polar) ==
          doctest::Approx(std::sqrt(kMu / (kEarthRadius + 300e3))).epsilon(1e-10));
}

TEST_CASE("launch azimuth reaches the target plane") {
    // Due-east launch gives an inclination equal to the latitude.
    CHECK(launch_azimuth(28.5, 28.5) == doctest::Approx(kPi / 2).epsilon(1e-12));
    // Polar target needs a due-north shot from anywhere.
    CHECK(launch_azimuth(90.0, 28.5) == doctest::Approx(0.0).epsilon(1e-12));
    // 51.6 deg from the 28.5 deg site.
    const double az = launch_azimuth(51.6, 28.5);
    CHECK(std::sin(az) == doctest::Approx(std::cos(51.6 * kDeg) / std::cos(28.5 * kDeg))
                              .epsilon(1e-12));
    CHECK_THROWS_AS(launch_azimuth(10.0, 28.5), std::domain_error);
}

TEST_CASE("identical stages split the speed gain evenly") {
    const auto v = two_stage(300.0, 0.08, 300.0, 0.08);
    const auto m = orbit_mission(300e3, 28.5, 1000.0);
    const auto r = classical_baseline_size(v, m, 8000.0 - ideal_ascent_dv(m));
    CHECK(r.dv_total == doctest::Approx(8000.0).epsilon(1e-12));
    CHECK(r.dv_stage1 == doctest::Approx(r.dv_stage2).epsilon(1e-5));
    CHECK(r.masses.m_p1 > r.masses.m_p2);  // booster also lifts the upper stage
}

TEST_CASE("massless structure reduces to the plain rocket equation") {
    // With vanishing structure ratios and equal Isp the split is irrelevant
    // and lift-off mass is exactly the payload times the total mass ratio.
    const auto v = two_stage(320.0, 1e-12, 320.0, 1e-12);
    auto m = orbit_mission(300e3, 28.5, 1200.0);
    const double dv_total = 7600.0;
    const auto r = classical_baseline_size(v, m, dv_total - ideal_ascent_dv(m));
    CHECK(r.glow ==
          doctest::Approx(1200.0 * std::exp(dv_total / (320.0 * kG0))).epsilon(1e-6));
}

TEST_CASE("sized stages reproduce the requested speed gain") {
    const auto v = two_stage(315.0, 0.0359, 340.0, 0.045);
    const auto m = orbit_mission(300e3, 28.5, 5766.0);
    const auto r = classical_baseline_size(v, m, 1700.0);

    const double m01 = r.glow;
    const double m02 = m01 - r.masses.m_p1 - r.masses.m_s1;
    const double dv1 = 315.0 * kG0 * std::log(m01 / (m01 - r.masses.m_p1));
    const double dv2 = 340.0 * kG0 * std::log(m02 / (m02 - r.masses.m_p2));
    CHECK(dv1 + dv2 == doctest::Approx(r.dv_total).epsilon(1e-9));

    // Mass bookkeeping: the stack above stage 1 is stage 2 plus fairing.
    CHECK(m02 == doctest::Approx(r.masses.m_p2 + r.masses.m_s2 + r.masses.m_L).epsilon(1e-12));
    // Structure ratios hold by construction.
    CHECK(r.masses.m_s1 / (r.masses.m_s1 + r.masses.m_p1) ==
          doctest::Approx(0.0359).epsilon(1e-12));
    CHECK(r.masses.m_s2 / (r.masses.m_s2 + r.masses.m_p2) ==
          doctest::Approx(0.045).epsilon(1e-12));
    CHECK(r.burn_time1 == doctest::Approx(r.masses.m_p1 / v.stages[0].mass_flow()).epsilon(1e-12));
}

TEST_CASE("light launcher budget lands near its trajectory-optimized size") {
    // With a healthy loss allowance the rocket-equation budget must fall
    // within 30% of the full trajectory-optimized lift-off mass (191785 kg
    // for this launcher), which anchors the initial guess it seeds.
    auto v = testing::light_elv();
    v.fairing_mass = 500.0;
    auto m = testing::light_mission();
    const auto r = classical_baseline_size(v, m, 1700.0);
    CHECK(r.masses.m_L == doctest::Approx(5766.0));
    CHECK(std::abs(r.glow - 191785.0) / 191785.0 < 0.30);
    // Frozen regression values for the same inputs.
    CHECK(r.glow == doctest::Approx(136847.253).epsilon(1e-5));
    CHECK(r.dv_stage1 == doctest::Approx(4076.856).epsilon(1e-5));
}

TEST_CASE("golden split beats a brute-force grid") {
    const auto v = two_stage(311.0, 0.0513, 348.0, 0.0359);
    const auto m = orbit_mission(257.5e3, 28.5, 15628.0);
    const auto r = classical_baseline_size(v, m, 1650.0);

    // Evaluate the payload fraction over a fine grid of splits; the golden
    // optimum must be at least as good as every grid point.
    const auto lambda = [&](double dv, double isp, double eps) {
        const double ratio = std::exp(dv / (isp * kG0));
        return 1.0 - (1.0 - 1.0 / ratio) / (1.0 - eps);
    };
    const double best = lambda(r.dv_stage1, 311.0, 0.0513) * lambda(r.dv_stage2, 348.0, 0.0359);
    for (int i = 1; i < 2000; ++i) {
        const double dv1 = r.dv_total * i / 2000.0;
        const double f = lambda(dv1, 311.0, 0.0513) * lambda(r.dv_total - dv1, 348.0, 0.0359);
        CHECK(best >= f - 1e-12);
    }
}

TEST_CASE("impossible missions are rejected") {
    // A heavy structure cannot fly an arbitrarily large speed gain.
    const auto v = two_stage(250.0, 0.25, 250.0, 0.25);
    const auto m = orbit_mission(300e3, 28.5, 1000.0);
    CHECK_THROWS_AS(classical_baseline_size(v, m, 20000.0), std::domain_error);
    CHECK_THROWS_AS(classical_baseline_size(v, m, -1.0), std::domain_error);
}
