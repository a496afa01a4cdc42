#include "rfam/ocp/rocket.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rfam/constants.hpp"

namespace rfam::ocp {

namespace {

void require_valid_inputs(const VehicleSpec& vehicle, const MissionSpec& mission,
                          const ConstraintParams& params) {
    ValidationReport report = ::rfam::validate(vehicle, mission, params);
    if (report.ok()) return;
    std::string what = "invalid vehicle or mission description:";
    for (const std::string& e : report.errors()) what += "\n  " + e;
    throw std::invalid_argument(what);
}

SegmentDef make_segment(SegmentKind kind, int stage, bool burning, ControlMode control,
                        AttitudeRule attitude, int nodes, bool free_duration, double duration,
                        double lb, double ub) {
    SegmentDef s;
    s.kind = kind;
    s.stage = stage;
    s.burning = burning;
    s.control = control;
    s.attitude = attitude;
    s.nodes = nodes;
    s.free_duration = free_duration;
    s.duration = duration;
    s.duration_lb = lb;
    s.duration_ub = ub;
    return s;
}

PhaseDefinition seal_phase(int index, int stage, std::vector<SegmentDef> segments,
                           PathConstraints path) {
    PhaseDefinition p;
    p.index = index;
    p.stage = stage;
    p.segments = std::move(segments);
    p.path = path;
    p.burning = false;
    p.nodes = 0;
    p.duration_lb = 0.0;
    p.duration_ub = 0.0;
    for (const SegmentDef& s : p.segments) {
        p.burning = p.burning || s.burning;
        p.nodes += s.nodes;
        p.duration_lb += s.free_duration ? s.duration_lb : s.duration;
        p.duration_ub += s.free_duration ? s.duration_ub : s.duration;
        if (s.control != ControlMode::None) p.control = s.control;
    }
    return p;
}

// The standard flight plan for each vehicle kind, on the default mesh.
void fill_phases(MultiPhaseOCP& ocp) {
    const ConstraintParams& cp = ocp.params;
    const double rise = cp.vertical_rise_duration;

    PathConstraints ascent1;
    ascent1.aoa_max_deg = cp.alpha_ascent_max_deg;
    ascent1.liftoff_twr_box = true;
    ascent1.axial_load_cap = true;

    std::vector<SegmentDef> ph1;
    ph1.push_back(make_segment(SegmentKind::VerticalRise, 0, true, ControlMode::None,
                               AttitudeRule::Radial, 5, false, rise, rise, rise));
    ph1.push_back(make_segment(SegmentKind::GuidedAscent, 0, true, ControlMode::Direction,
                               AttitudeRule::FromControl, 25, true, 150.0, 30.0, 600.0));
    ocp.phases.push_back(seal_phase(1, 0, std::move(ph1), ascent1));

    std::vector<SegmentDef> ph2;
    ph2.push_back(make_segment(SegmentKind::UpperAscent, 1, true, ControlMode::Direction,
                               AttitudeRule::FromControl, 30, true, 420.0, 50.0, 1500.0));
    ocp.phases.push_back(seal_phase(2, 1, std::move(ph2), PathConstraints{}));

    ocp.linkages.push_back({1, 2, LinkKind::StageSeparation});

    if (ocp.vehicle.kind != VehicleKind::RLV) return;

    std::vector<SegmentDef> ph3;
    ph3.push_back(make_segment(SegmentKind::Coast, 0, false, ControlMode::None,
                               AttitudeRule::Retrograde, 5, false, cp.t_coast, cp.t_coast,
                               cp.t_coast));
    ph3.push_back(make_segment(SegmentKind::BoostBack, 0, true, ControlMode::Direction,
                               AttitudeRule::FromControl, 10, true, 45.0, 5.0, 240.0));
    ocp.phases.push_back(seal_phase(3, 0, std::move(ph3), PathConstraints{}));

    std::vector<SegmentDef> ph4;
    ph4.push_back(make_segment(SegmentKind::Freefall, 0, false, ControlMode::None,
                               AttitudeRule::Retrograde, 6, true, 110.0, 5.0, 600.0));
    ph4.push_back(make_segment(SegmentKind::ReentryBurn, 0, true, ControlMode::Direction,
                               AttitudeRule::FromControl, 9, true, 25.0, 2.0, 150.0));
    ocp.phases.push_back(seal_phase(4, 0, std::move(ph4), PathConstraints{}));

    std::vector<SegmentDef> ph5;
    ph5.push_back(make_segment(SegmentKind::DescentGravityTurn, 0, false, ControlMode::None,
                               AttitudeRule::Retrograde, 15, true, 180.0, 5.0, 600.0));
    PathConstraints descent;
    descent.aoa_max_deg = cp.alpha_descent_max_deg;
    ocp.phases.push_back(seal_phase(5, 0, std::move(ph5), descent));

    std::vector<SegmentDef> ph6;
    ph6.push_back(make_segment(SegmentKind::LandingBurn, 0, true, ControlMode::DirectionThrottle,
                               AttitudeRule::FromControl, 15, true, 25.0, 3.0, 150.0));
    PathConstraints landing;
    landing.landing_throttle_box = true;
    ocp.phases.push_back(seal_phase(6, 0, std::move(ph6), landing));

    ocp.linkages.push_back({1, 3, LinkKind::BoosterBranch});
    ocp.linkages.push_back({3, 4, LinkKind::Continuous});
    ocp.linkages.push_back({4, 5, LinkKind::Continuous});
    ocp.linkages.push_back({5, 6, LinkKind::Continuous});
}

MultiPhaseOCP make_base(const VehicleSpec& vehicle, const MissionSpec& mission,
                        const ConstraintParams& params) {
    require_valid_inputs(vehicle, mission, params);
    if (!(mission.target_altitude > 0.0) || !(mission.min_payload > 0.0))
        throw std::invalid_argument("mission needs a positive target altitude and payload");
    MultiPhaseOCP ocp;
    ocp.vehicle = vehicle;
    ocp.mission = mission;
    ocp.params = params;
    // Scale anchor only; the initial guess recomputes a proper mass budget.
    ocp.glow_estimate = vehicle.stages[0].thrust_sea_level / (1.25 * kG0);
    ocp.stage1_reserve_dv = vehicle.kind == VehicleKind::RLV ? 3400.0 : 0.0;
    fill_phases(ocp);
    return ocp;
}

} // namespace

void validate(const MultiPhaseOCP& ocp) {
    require_valid_inputs(ocp.vehicle, ocp.mission, ocp.params);
    const int expected = ocp.vehicle.kind == VehicleKind::RLV ? 6 : 2;
    if (static_cast<int>(ocp.phases.size()) != expected)
        throw std::invalid_argument("expected " + std::to_string(expected) +
                                    " phases for this vehicle kind, got " +
                                    std::to_string(ocp.phases.size()));

    for (size_t i = 0; i < ocp.phases.size(); ++i) {
        const PhaseDefinition& p = ocp.phases[i];
        if (p.index != static_cast<int>(i) + 1)
            throw std::invalid_argument("phase indices must run 1..n in order");
        if (p.segments.empty())
            throw std::invalid_argument("phase " + std::to_string(p.index) + " has no segments");
        if (p.nodes < 5)
            throw std::invalid_argument("phase " + std::to_string(p.index) +
                                        " needs at least 5 nodes");
        for (const SegmentDef& s : p.segments) {
            if (s.nodes < 3)
                throw std::invalid_argument("segments need at least 3 nodes");
            if (s.stage != p.stage)
                throw std::invalid_argument("segment stage differs from its phase");
            if (s.free_duration) {
                if (!(s.duration_lb > 0.0) || !(s.duration_ub > s.duration_lb))
                    throw std::invalid_argument("free segment duration bounds must be positive");
            } else if (!(s.duration > 0.0)) {
                throw std::invalid_argument("fixed segment duration must be positive");
            }
        }
        if (!(p.duration_lb > 0.0) || !(p.duration_ub >= p.duration_lb))
            throw std::invalid_argument("phase duration bounds must be positive");
    }

    // Every phase after the first must be reached by exactly one linkage.
    std::vector<int> arrivals(ocp.phases.size() + 1, 0);
    int branches = 0;
    for (const Linkage& l : ocp.linkages) {
        if (l.from_phase < 1 || l.to_phase <= l.from_phase ||
            l.to_phase > static_cast<int>(ocp.phases.size()))
            throw std::invalid_argument("linkage endpoints out of order");
        arrivals[l.to_phase] += 1;
        if (l.kind == LinkKind::BoosterBranch) ++branches;
    }
    for (size_t p = 2; p <= ocp.phases.size(); ++p)
        if (arrivals[p] != 1)
            throw std::invalid_argument("phase " + std::to_string(p) +
                                        " must be the target of exactly one linkage");
    if (ocp.vehicle.kind == VehicleKind::RLV && branches != 1)
        throw std::invalid_argument("a returning booster needs exactly one branch linkage");
    if (ocp.vehicle.kind == VehicleKind::ELV && branches != 0)
        throw std::invalid_argument("an expendable vehicle has no branch linkage");

    switch (ocp.variant) {
        case ProblemVariant::Baseline:
            if (!ocp.cost_evaluator)
                throw std::invalid_argument("baseline sizing needs a cost evaluator");
            break;
        case ProblemVariant::CommonalityProbe:
            if (ocp.probe_stage != 1 && ocp.probe_stage != 2)
                throw std::invalid_argument("probe stage must be 1 or 2");
            if (ocp.vehicle.kind == VehicleKind::RLV && ocp.probe_stage == 1)
                throw std::invalid_argument(
                    "a reusable first stage cannot be probed for sharing");
            break;
        case ProblemVariant::FamilySub:
            if (!(ocp.m_c > 0.0))
                throw std::invalid_argument("shared-stage mass must be positive");
            if (ocp.compatible_stage != 1 && ocp.compatible_stage != 2)
                throw std::invalid_argument("compatible stage must be 1 or 2");
            if (ocp.vehicle.kind == VehicleKind::RLV && ocp.compatible_stage == 1)
                throw std::invalid_argument(
                    "a reusable first stage cannot be the shared stage");
            if (!ocp.cost_evaluator)
                throw std::invalid_argument("family sizing needs a cost evaluator");
            break;
    }
}

MultiPhaseOCP build_p0(const VehicleSpec& vehicle, const MissionSpec& mission,
                       const ConstraintParams& params,
                       std::function<double(const MassConfiguration&, double)> cost_evaluator) {
    MultiPhaseOCP ocp = make_base(vehicle, mission, params);
    ocp.variant = ProblemVariant::Baseline;
    ocp.cost_evaluator = std::move(cost_evaluator);
    validate(ocp);
    return ocp;
}

MultiPhaseOCP build_commonality_problem(const VehicleSpec& vehicle, const MissionSpec& mission,
                                        const ConstraintParams& params, int probe_stage,
                                        ProbeSense sense) {
    MultiPhaseOCP ocp = make_base(vehicle, mission, params);
    ocp.variant = ProblemVariant::CommonalityProbe;
    ocp.probe_stage = probe_stage;
    ocp.probe_sense = sense;
    validate(ocp);
    return ocp;
}

MultiPhaseOCP build_sub_problem(const VehicleSpec& vehicle, const MissionSpec& mission,
                                const ConstraintParams& params, int compatible_stage, double m_c,
                                std::function<double(const MassConfiguration&, double)>
                                    family_cost_evaluator) {
    MultiPhaseOCP ocp = make_base(vehicle, mission, params);
    ocp.variant = ProblemVariant::FamilySub;
    ocp.compatible_stage = compatible_stage;
    ocp.m_c = m_c;
    ocp.cost_evaluator = std::move(family_cost_evaluator);
    validate(ocp);

    if (compatible_stage == 1) {
        // A fixed first stage flies a full tank, so the stage-1 burn time is
        // no longer free: capacity over flow, less the vertical rise.
        const StageSpec& s1 = vehicle.stages[0];
        const double capacity = m_c * (1.0 - s1.structure_ratio) / s1.structure_ratio;
        const double burn = capacity / s1.mass_flow();
        const double guided = burn - params.vertical_rise_duration;
        if (!(guided > 5.0))
            throw std::invalid_argument(
                "shared-stage mass too small: the fixed stage-1 burn would end "
                "during the vertical rise");
        for (PhaseDefinition& p : ocp.phases)
            for (SegmentDef& s : p.segments)
                if (s.kind == SegmentKind::GuidedAscent) {
                    s.free_duration = false;
                    s.duration = guided;
                    s.duration_lb = s.duration_ub = guided;
                }
        ocp.phases[0] = seal_phase(1, 0, std::move(ocp.phases[0].segments),
                                   ocp.phases[0].path);
    }
    return ocp;
}

} // namespace rfam::ocp
