#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rfam/constants.hpp"
#include "rfam/frames.hpp"
#include "rfam/nlp/sqp.hpp"
#include "rfam/ocp/rocket.hpp"
#include "rfam/staging.hpp"
#include "test_helpers.hpp"

using namespace rfam;
using namespace rfam::ocp;
using rfam::testing::default_params;
using rfam::testing::heavy_mission;
using rfam::testing::heavy_rlv;
using rfam::testing::heavy_rlv_cost_config;
using rfam::testing::independent_cost_evaluator;
using rfam::testing::light_elv;
using rfam::testing::light_elv_cost_config;
using rfam::testing::light_mission;

namespace {

MultiPhaseOCP light_p0() {
    return build_p0(light_elv(), light_mission(), default_params(),
                    independent_cost_evaluator(VehicleKind::ELV, light_elv_cost_config(), 50));
}

MultiPhaseOCP heavy_p0() {
    return build_p0(heavy_rlv(), heavy_mission(), default_params(),
                    independent_cost_evaluator(VehicleKind::RLV, heavy_rlv_cost_config(), 50));
}

const SegmentLayout& segment_of(const Transcription& tr, SegmentKind kind) {
    for (const SegmentLayout& s : tr.segments)
        if (s.kind == kind) return s;
    throw std::runtime_error("segment kind not present");
}

} // namespace

TEST_CASE("flight plans follow the vehicle kind") {
    const MultiPhaseOCP elv = light_p0();
    REQUIRE(elv.phases.size() == 2);
    REQUIRE(elv.phases[0].segments.size() == 2);
    CHECK(elv.phases[0].segments[0].kind == SegmentKind::VerticalRise);
    CHECK(elv.phases[0].segments[0].free_duration == false);
    CHECK(elv.phases[0].segments[0].duration == doctest::Approx(10.0));
    CHECK(elv.phases[0].segments[1].kind == SegmentKind::GuidedAscent);
    CHECK(elv.phases[0].segments[1].free_duration == true);
    CHECK(elv.phases[0].path.aoa_max_deg.has_value());
    CHECK(elv.phases[0].path.liftoff_twr_box);
    CHECK(elv.phases[0].path.axial_load_cap);
    REQUIRE(elv.phases[1].segments.size() == 1);
    CHECK(elv.phases[1].segments[0].kind == SegmentKind::UpperAscent);
    CHECK(elv.phases[1].stage == 1);
    REQUIRE(elv.linkages.size() == 1);
    CHECK(elv.linkages[0].kind == LinkKind::StageSeparation);
    CHECK(elv.stage1_reserve_dv == 0.0);

    const MultiPhaseOCP rlv = heavy_p0();
    REQUIRE(rlv.phases.size() == 6);
    CHECK(rlv.phases[2].segments[0].kind == SegmentKind::Coast);
    CHECK(rlv.phases[2].segments[0].duration == doctest::Approx(20.0));
    CHECK(rlv.phases[2].segments[1].kind == SegmentKind::BoostBack);
    CHECK(rlv.phases[3].segments[0].kind == SegmentKind::Freefall);
    CHECK(rlv.phases[3].segments[1].kind == SegmentKind::ReentryBurn);
    CHECK(rlv.phases[4].segments[0].kind == SegmentKind::DescentGravityTurn);
    CHECK(rlv.phases[5].segments[0].kind == SegmentKind::LandingBurn);
    CHECK(rlv.phases[5].segments[0].control == ControlMode::DirectionThrottle);
    CHECK(rlv.phases[5].path.landing_throttle_box);
    REQUIRE(rlv.linkages.size() == 5);
    CHECK(rlv.linkages[1].kind == LinkKind::BoosterBranch);
    CHECK(rlv.linkages[1].from_phase == 1);
    CHECK(rlv.linkages[1].to_phase == 3);
    CHECK(rlv.stage1_reserve_dv > 0.0);
    // Every booster phase flies on stage 1, the insertion phase on stage 2.
    for (int p : {2, 3, 4, 5}) CHECK(rlv.phases[p].stage == 0);
    CHECK(rlv.phases[1].stage == 1);
}

TEST_CASE("builders reject unusable setups") {
    const auto eval = independent_cost_evaluator(VehicleKind::ELV, light_elv_cost_config(), 50);

    // A landing booster cannot be the shared or probed stage.
    CHECK_THROWS_AS(build_commonality_problem(heavy_rlv(), heavy_mission(), default_params(),
                                              1, ProbeSense::Minimize),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sub_problem(heavy_rlv(), heavy_mission(), default_params(), 1,
                                      20000.0, eval),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sub_problem(light_elv(), light_mission(), default_params(), 2, 0.0,
                                      eval),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sub_problem(light_elv(), light_mission(), default_params(), 3,
                                      1000.0, eval),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_p0(light_elv(), light_mission(), default_params(), nullptr),
                    std::invalid_argument);

    // Structural tampering trips the validator.
    MultiPhaseOCP broken = light_p0();
    broken.linkages.clear();
    CHECK_THROWS_AS(validate(broken), std::invalid_argument);
    broken = light_p0();
    broken.linkages.push_back({1, 2, LinkKind::Continuous});
    CHECK_THROWS_AS(validate(broken), std::invalid_argument);
    broken = light_p0();
    broken.phases[0].index = 7;
    CHECK_THROWS_AS(validate(broken), std::invalid_argument);
}

TEST_CASE("a shared first stage fixes the booster burn time") {
    const auto eval = independent_cost_evaluator(VehicleKind::ELV, light_elv_cost_config(), 50);
    const double m_c = 5510.0;
    const MultiPhaseOCP sub =
        build_sub_problem(light_elv(), light_mission(), default_params(), 1, m_c, eval);
    const SegmentDef& ga = sub.phases[0].segments[1];
    CHECK(ga.free_duration == false);
    const StageSpec& s1 = light_elv().stages[0];
    const double capacity = m_c * (1.0 - s1.structure_ratio) / s1.structure_ratio;
    CHECK(ga.duration == doctest::Approx(capacity / s1.mass_flow() - 10.0).epsilon(1e-12));
    // Far too small a stage burns out during the vertical rise.
    CHECK_THROWS_AS(build_sub_problem(light_elv(), light_mission(), default_params(), 1, 100.0,
                                      eval),
                    std::invalid_argument);
}

TEST_CASE("transcription dimensions agree with a hand count") {
    SUBCASE("expendable launcher") {
        const Transcription tr = transcribe(light_p0(), Mesh{});
        // Nodes 5/25/30 with blocks 7/10/10, plus 2 free durations and the
        // three sizing variables.
        REQUIRE(tr.segments.size() == 3);
        CHECK(tr.segments[0].nodes == 5);
        CHECK(tr.segments[0].block == 7);
        CHECK(tr.segments[1].nodes == 25);
        CHECK(tr.segments[1].block == 10);
        CHECK(tr.segments[2].nodes == 30);
        CHECK(tr.segments[2].block == 10);
        CHECK(tr.problem.n == 590);
        CHECK(tr.ms1_var == 587);
        CHECK(tr.ms2_var == 588);
        CHECK(tr.ml_var == 589);
        // Defects 7*(4+24+29), unit norms 25+30, one in-phase join (7) and a
        // separation link (6), four mass identities, four orbit targets.
        CHECK(tr.problem.n_eq == 399 + 55 + 13 + 4 + 4);
        // Airspeed-cone rows over the guided ascent only.
        CHECK(tr.problem.n_in == 25);
        CHECK(static_cast<int>(tr.row_names.size()) == tr.problem.n_eq + tr.problem.n_in);
        CHECK(tr.x_scale.size() == tr.problem.n);
        CHECK(tr.constraint_scale.size() == tr.problem.n_eq + tr.problem.n_in);
        CHECK(!tr.problem.jacobian_pattern.empty());
        CHECK(tr.probe_var == -1);

        // Launch pins and the lift-off thrust-to-weight window.
        const FrameState site = site_state_eci(light_mission().launch_site, 0.0);
        for (int j = 0; j < 3; ++j) {
            CHECK(tr.problem.lb[j] == tr.problem.ub[j]);
            CHECK(tr.problem.lb[j] == doctest::Approx(site.r[j]));
            CHECK(tr.problem.lb[3 + j] == tr.problem.ub[3 + j]);
        }
        const double tsl = light_elv().stages[0].thrust_sea_level;
        CHECK(tr.problem.lb[6] == doctest::Approx(tsl / (1.45 * kG0)));
        CHECK(tr.problem.ub[6] == doctest::Approx(tsl / kG0));
        // Burn-out axial-load floor on the stage-1 end mass.
        const SegmentLayout& ga = segment_of(tr, SegmentKind::GuidedAscent);
        const int mf1 = ga.first_var + (ga.nodes - 1) * ga.block + 6;
        CHECK(tr.problem.lb[mf1] ==
              doctest::Approx(light_elv().stages[0].thrust_vacuum / (6.0 * kG0)));
    }

    SUBCASE("returning booster") {
        const Transcription tr = transcribe(heavy_p0(), Mesh{});
        REQUIRE(tr.segments.size() == 9);
        const int nodes[9] = {5, 25, 30, 5, 10, 6, 9, 15, 15};
        const int blocks[9] = {7, 10, 10, 7, 10, 7, 10, 7, 11};
        for (int i = 0; i < 9; ++i) {
            CHECK(tr.segments[i].nodes == nodes[i]);
            CHECK(tr.segments[i].block == blocks[i]);
        }
        CHECK(tr.problem.n == 1132);
        // Defects 7*111, units 89, joins 3*7 + links (6+6+7+7+7), five mass
        // identities, two descent events, four orbit targets, six touchdown
        // targets.
        CHECK(tr.problem.n_eq == 777 + 89 + 54 + 5 + 2 + 4 + 6);
        // Airspeed cone (25) plus the vertical-attitude row at touchdown.
        CHECK(tr.problem.n_in == 26);
        // The landing throttle rides inside its box.
        const SegmentLayout& lb = segment_of(tr, SegmentKind::LandingBurn);
        const int phi = lb.first_var + 10;
        CHECK(tr.problem.lb[phi] == doctest::Approx(0.06));
        CHECK(tr.problem.ub[phi] == doctest::Approx(0.12));
    }

    SUBCASE("probe and shared-stage variants") {
        const Transcription probe = transcribe(
            build_commonality_problem(light_elv(), light_mission(), default_params(), 1,
                                      ProbeSense::Maximize),
            Mesh{});
        CHECK(probe.probe_var == probe.ms1_var);

        const auto eval =
            independent_cost_evaluator(VehicleKind::ELV, light_elv_cost_config(), 50);
        const Transcription sub = transcribe(
            build_sub_problem(light_elv(), light_mission(), default_params(), 2, 1404.0, eval),
            Mesh{});
        // The shared-stage mass is pinned, its structure identity is dropped,
        // and the tank-capacity guard appears instead.
        CHECK(sub.problem.lb[sub.ms2_var] == doctest::Approx(1404.0));
        CHECK(sub.problem.ub[sub.ms2_var] == doctest::Approx(1404.0));
        CHECK(sub.problem.n_eq == 475 - 1);
        CHECK(sub.problem.n_in == 26);
    }

    SUBCASE("mesh floor") {
        CHECK_THROWS_AS(transcribe(light_p0(), Mesh{8, 15}), std::invalid_argument);
        CHECK_THROWS_AS(transcribe(heavy_p0(), Mesh{30, 7}), std::invalid_argument);
    }
}

TEST_CASE("simulated seed nearly satisfies the transcribed dynamics") {
    const MultiPhaseOCP ocp = light_p0();
    const Transcription tr = transcribe(ocp, Mesh{});
    const InitialGuess g = initial_guess(ocp, tr);
    REQUIRE_FALSE(g.fallback);
    CHECK(g.note.find("budget") != std::string::npos);

    // The seed starts exactly on the pad.
    const FrameState site = site_state_eci(light_mission().launch_site, 0.0);
    for (int j = 0; j < 3; ++j) {
        CHECK(g.x[j] == doctest::Approx(site.r[j]).epsilon(1e-12));
        CHECK(g.x[3 + j] == doctest::Approx(site.v[j]).epsilon(1e-9));
    }

    Eigen::VectorXd ce(tr.problem.n_eq), ci(tr.problem.n_in);
    tr.problem.constraints(g.x, ce, ci);

    double worst_defect = 0.0, worst_exact = 0.0;
    for (int i = 0; i < tr.problem.n_eq; ++i) {
        const double scaled = std::abs(ce[i]) / tr.constraint_scale[i];
        const std::string& name = tr.row_names[i];
        if (name.find(":defect") != std::string::npos) {
            worst_defect = std::max(worst_defect, scaled);
        } else if (name.find("orbit:") == std::string::npos) {
            // Joins, mass identities, and unit norms hold to round-off on a
            // simulated seed; only the orbit targets carry real error.
            worst_exact = std::max(worst_exact, scaled);
        }
    }
    // The hard attitude switch at the pitch kick costs Simpson a few 1e-3 of
    // local truncation; an assembly error would sit at order one.
    CHECK(worst_defect < 1e-2);
    CHECK(worst_exact < 1e-6);

    // Node masses never increase along the stack's flight.
    const SegmentLayout& ga = tr.segments[1];
    for (int k = 0; k + 1 < ga.nodes; ++k)
        CHECK(g.x[ga.first_var + (k + 1) * ga.block + 6] <=
              g.x[ga.first_var + k * ga.block + 6] + 1e-9);

    // Thrust directions are unit length.
    for (const SegmentLayout& lay : tr.segments) {
        if (lay.control == ControlMode::None) continue;
        for (int k = 0; k < lay.nodes; ++k) {
            const int u0 = lay.first_var + k * lay.block + 7;
            CHECK(g.x.segment<3>(u0).norm() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("booster seed flies home") {
    const MultiPhaseOCP ocp = heavy_p0();
    const Transcription tr = transcribe(ocp, Mesh{});
    const InitialGuess g = initial_guess(ocp, tr);
    REQUIRE_FALSE(g.fallback);
    CHECK(g.note.find("boost-back") != std::string::npos);

    Eigen::VectorXd ce(tr.problem.n_eq), ci(tr.problem.n_in);
    tr.problem.constraints(g.x, ce, ci);

    // The shot lands in the pad's neighbourhood: the touchdown position rows
    // sit at the kilometre scale, not the hundreds-of-kilometres scale of
    // the uncorrected ballistic arc.
    double pos_err = 0.0;
    for (int i = 0; i < tr.problem.n_eq; ++i)
        if (tr.row_names[i].find("landing:position") != std::string::npos)
            pos_err = std::max(pos_err, std::abs(ce[i]));
    CHECK(pos_err < 60e3);

    // Mass identities from the budget hold tightly on the seed.
    for (int i = 0; i < tr.problem.n_eq; ++i) {
        const std::string& name = tr.row_names[i];
        if (name.find("branch:mass") != std::string::npos ||
            name.find("structure-ratio") != std::string::npos ||
            name.find("payload:definition") != std::string::npos)
            CHECK(std::abs(ce[i]) / tr.constraint_scale[i] < 1e-6);
    }
}

TEST_CASE("transcribed derivatives agree with a dense reference") {
    nlp::SolverOptions opt;
    opt.derivative_mode = nlp::DerivativeMode::CentralDifference;

    SUBCASE("expendable launcher") {
        const MultiPhaseOCP ocp = light_p0();
        const Transcription tr = transcribe(ocp, Mesh{10, 8});
        const InitialGuess g = initial_guess(ocp, tr);
        opt.x_scale = tr.x_scale;
        opt.constraint_scale = tr.constraint_scale;
        const nlp::DerivativeReport rep = nlp::check_derivatives(tr.problem, g.x, opt);
        CAPTURE(rep.worst_row);
        if (rep.worst_row >= 0) CAPTURE(tr.row_names[rep.worst_row]);
        CHECK(rep.max_error < 1e-5);
    }

    SUBCASE("returning booster") {
        const MultiPhaseOCP ocp = heavy_p0();
        const Transcription tr = transcribe(ocp, Mesh{10, 8});
        const InitialGuess g = initial_guess(ocp, tr);
        opt.x_scale = tr.x_scale;
        opt.constraint_scale = tr.constraint_scale;
        const nlp::DerivativeReport rep = nlp::check_derivatives(tr.problem, g.x, opt);
        CAPTURE(rep.worst_row);
        if (rep.worst_row >= 0) CAPTURE(tr.row_names[rep.worst_row]);
        CHECK(rep.max_error < 1e-5);
    }
}
